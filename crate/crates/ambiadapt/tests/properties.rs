//! Property tests over the core invariants: wire round-trips, quantization
//! bounds, encoder algebra, direction normalization, and jitter-buffer
//! accounting.

use proptest::prelude::*;

use ambiadapt::ambi::{
    encode_plane_wave, high_order_residual, truncate_order, AmbisonicFrame, Direction,
    SourceSignal, Trajectory,
};
use ambiadapt::pipeline::JitterBuffer;
use ambiadapt::wire::{
    dequantize, encapsulate, parse_packet, payload_size, OverflowGuard, PacketFlags, HEADER_LEN,
};

/// The concurrency contracts: ambi values are freely shareable, state
/// machines and link state are exclusively owned but movable.
#[test]
fn core_types_are_send() {
    fn shareable<T: Send + Sync>() {}
    fn movable<T: Send>() {}
    shareable::<AmbisonicFrame>();
    shareable::<Direction>();
    shareable::<ambiadapt::ambi::CapsuleArray>();
    shareable::<ambiadapt::ambi::LoudspeakerLayout>();
    shareable::<ambiadapt::wire::WirePacket>();
    movable::<ambiadapt::netsim::Link>();
    movable::<ambiadapt::pipeline::Sender>();
    movable::<ambiadapt::pipeline::Receiver>();
}

fn arb_frame() -> impl Strategy<Value = AmbisonicFrame> {
    (0u32..=3, prop::sample::select(vec![64usize, 128, 256])).prop_flat_map(|(order, len)| {
        let channels = ((order + 1) * (order + 1)) as usize;
        (
            prop::collection::vec(-1.0f64..1.0, channels * len),
            0u64..1_000_000,
        )
            .prop_map(move |(samples, start)| {
                AmbisonicFrame::from_samples(order, len, 48_000, start, samples).unwrap()
            })
    })
}

fn arb_flags() -> impl Strategy<Value = PacketFlags> {
    (any::<bool>(), any::<bool>()).prop_map(|(fade_active, order_change)| PacketFlags {
        fade_active,
        order_change,
    })
}

proptest! {
    #[test]
    fn wire_roundtrip_is_bit_exact(
        frame in arb_frame(),
        depth in prop::sample::select(vec![16u8, 24, 32]),
        seq in any::<u16>(),
        fade_remaining in any::<u16>(),
        flags in arb_flags(),
    ) {
        let enc = encapsulate(&frame, depth, seq, fade_remaining, flags, OverflowGuard::Clamp)
            .unwrap();
        let bytes = enc.packet.serialize();
        prop_assert_eq!(
            bytes.len() as u64,
            HEADER_LEN as u64
                + payload_size(frame.order(), depth, frame.frame_length() as u16).unwrap() / 8
        );
        let parsed = parse_packet(&bytes).unwrap();
        prop_assert_eq!(parsed, enc.packet);
    }

    #[test]
    fn quantization_error_is_bounded(
        frame in arb_frame(),
        depth in prop::sample::select(vec![16u8, 24, 32]),
    ) {
        let enc = encapsulate(&frame, depth, 0, 0, PacketFlags::default(), OverflowGuard::Clamp)
            .unwrap();
        let back = dequantize(&enc.packet, 48_000);
        let step = 2f64.powi(-(depth as i32 - 1));
        for (a, b) in frame.raw().iter().zip(back.raw()) {
            prop_assert!((a - b).abs() <= step);
            if *a == 0.0 {
                prop_assert_eq!(*b, 0.0, "zero maps to zero exactly");
            }
        }
    }

    #[test]
    fn parser_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..512)) {
        let _ = parse_packet(&bytes);
    }

    #[test]
    fn parser_never_panics_with_plausible_header(
        mut bytes in prop::collection::vec(any::<u8>(), 16..4200)
    ) {
        bytes[0] = 0x48;
        bytes[1] = 0x41;
        bytes[2] = 1;
        bytes[3] &= 0x03;
        let _ = parse_packet(&bytes);
    }

    #[test]
    fn truncation_commutes_with_encoding(
        order in 1u32..=3,
        low in 0u32..=3,
        az in -std::f64::consts::PI..std::f64::consts::PI,
        colat in 0.0f64..std::f64::consts::PI,
        samples in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let low = low.min(order);
        let source = SourceSignal {
            samples,
            sample_rate: 48_000,
            trajectory: Trajectory::Static(Direction::new(az, colat)),
        };
        let full = encode_plane_wave(&source, order, 0, 16).unwrap();
        let truncated = truncate_order(&full, low).unwrap();
        let direct = encode_plane_wave(&source, low, 0, 16).unwrap();
        prop_assert_eq!(truncated, direct);
    }

    #[test]
    fn residual_identity_reassembles(
        frame in arb_frame(),
        low in 0u32..=3,
    ) {
        let low = low.min(frame.order());
        let padded = truncate_order(&frame, low).unwrap().zero_padded(frame.order());
        let residual = high_order_residual(&frame, low).unwrap();
        let sum: Vec<f64> = padded
            .raw()
            .iter()
            .zip(residual.raw())
            .map(|(a, b)| a + b)
            .collect();
        prop_assert_eq!(sum.as_slice(), frame.raw());
    }

    #[test]
    fn encoding_is_linear_within_1e9_relative(
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        az in -3.0f64..3.0,
        colat in 0.1f64..3.0,
        x in prop::collection::vec(-0.5f64..0.5, 8),
        y in prop::collection::vec(-0.5f64..0.5, 8),
    ) {
        let dir = Direction::new(az, colat);
        let make = |v: Vec<f64>| SourceSignal {
            samples: v,
            sample_rate: 48_000,
            trajectory: Trajectory::Static(dir),
        };
        let mixed: Vec<f64> = x.iter().zip(&y).map(|(xs, ys)| a * xs + b * ys).collect();
        let enc_mixed = encode_plane_wave(&make(mixed), 3, 0, 8).unwrap();
        let enc_x = encode_plane_wave(&make(x), 3, 0, 8).unwrap();
        let enc_y = encode_plane_wave(&make(y), 3, 0, 8).unwrap();
        for ((m, xs), ys) in enc_mixed.raw().iter().zip(enc_x.raw()).zip(enc_y.raw()) {
            let want = a * xs + b * ys;
            prop_assert!((m - want).abs() <= 1e-9 * want.abs().max(1e-12));
        }
    }

    #[test]
    fn direction_constructor_normalizes(
        az in -20.0f64..20.0,
        colat in -10.0f64..10.0,
    ) {
        let d = Direction::new(az, colat);
        prop_assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&d.azimuth));
        prop_assert!((0.0..=std::f64::consts::PI).contains(&d.colatitude));
    }

    #[test]
    fn jitter_buffer_totality(
        // which of 60 frames arrive, and in which of two interleaved orders
        arrivals in prop::collection::vec(any::<bool>(), 60),
        swap_pairs in any::<bool>(),
    ) {
        let mut buf = JitterBuffer::new(4);
        let mut sent: Vec<u16> = (0..60u16).filter(|&k| arrivals[k as usize]).collect();
        if swap_pairs {
            for pair in sent.chunks_mut(2) {
                pair.reverse();
            }
        }
        let frame = AmbisonicFrame::zeros(0, 4, 48_000, 0);
        for &seq in &sent {
            buf.insert(seq, frame.clone());
        }
        let mut concealed = 0u64;
        for _ in 0..60 {
            if buf.pop_next().1.is_none() {
                concealed += 1;
            }
        }
        // every expected frame popped exactly once
        prop_assert_eq!(buf.stats.popped, 60);
        prop_assert_eq!(buf.next_playout_seq(), 60);
        // conceal count = frames that never arrived (+ late, none here)
        let lost = 60 - sent.len() as u64;
        prop_assert_eq!(concealed, lost + buf.stats.late);
        prop_assert_eq!(buf.stats.concealed, concealed);
    }
}
