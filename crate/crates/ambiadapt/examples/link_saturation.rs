//! Overload a 2 Mbps link with a 12.3 Mbps third-order stream and watch
//! the queue saturate: drop-tail losses, delay growth, and a throughput
//! ceiling at the capacity.
//!
//! Run: `cargo run --example link_saturation`

use ambiadapt::netsim::{CapacityStep, Link, LinkConfig, SubmitOutcome};

fn main() {
    let config = LinkConfig {
        capacity: vec![CapacityStep {
            at_secs: 0.0,
            bps: 2_000_000.0,
        }],
        queue_limit_bytes: 16 * 1024,
        propagation_delay_secs: 0.020,
        jitter_stddev_secs: 0.0,
        loss_probability: 0.01,
        seed: 42,
    };
    let mut link = Link::new(config).expect("valid config");

    // One order-3 packet (16 channels x 128 samples x 16 bit + header)
    // every 2.667 ms.
    let packet = vec![0u8; 16 + 4096];
    let interval = 128.0 / 48_000.0;
    let mut overflow_seen_at = None;
    for k in 0..3750u64 {
        let now = k as f64 * interval;
        match link.submit(&packet, now).expect("monotone clock") {
            SubmitOutcome::Dropped(reason) if overflow_seen_at.is_none() => {
                overflow_seen_at = Some((now, reason));
            }
            _ => {}
        }
    }

    if let Some((t, reason)) = overflow_seen_at {
        println!("first drop at t={t:.3} s ({reason:?}) once the 16 KiB queue fills");
    }

    let deliveries = link.deliveries(f64::INFINITY);
    println!(
        "submitted 3750, delivered {}, queue drops {}, random losses {}",
        deliveries.len(),
        link.dropped_overflow,
        link.dropped_loss,
    );

    // Per-second delivered throughput stays at the 2 Mbps ceiling even
    // though the offered load is 12.3 Mbps.
    println!();
    println!("second  delivered_bits  latency of last packet");
    for s in 0..10u64 {
        let lo = s as f64;
        let hi = lo + 1.0;
        let in_window: Vec<_> = deliveries
            .iter()
            .filter(|d| d.delivery_time >= lo && d.delivery_time < hi)
            .collect();
        let bits: usize = in_window.iter().map(|d| d.bytes.len() * 8).sum();
        let last_latency = in_window
            .last()
            .map(|d| d.delivery_time - d.id as f64 * interval)
            .unwrap_or(0.0);
        println!("{s:>6}  {bits:>14}  {:.1} ms", last_latency * 1e3);
    }
    println!();
    println!("every submitted packet is accounted for exactly once:");
    println!(
        "  {} delivered + {} overflow + {} lost = {}",
        deliveries.len(),
        link.dropped_overflow,
        link.dropped_loss,
        deliveries.len() as u64 + link.dropped_overflow + link.dropped_loss,
    );
}
