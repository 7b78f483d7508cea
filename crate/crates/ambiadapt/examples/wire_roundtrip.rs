//! Serialize an Ambisonics frame into a wire packet, hex-dump the header,
//! parse it back, and show the quantization bound.
//!
//! Run: `cargo run --example wire_roundtrip`

use ambiadapt::ambi::{encode_plane_wave, Direction, SourceSignal, Trajectory};
use ambiadapt::wire::{
    dequantize, encapsulate, parse_packet, payload_size, OverflowGuard, PacketFlags, HEADER_LEN,
};

fn main() {
    let source = SourceSignal {
        samples: (0..128)
            .map(|i| 0.8 * (std::f64::consts::TAU * 440.0 * i as f64 / 48_000.0).sin())
            .collect(),
        sample_rate: 48_000,
        trajectory: Trajectory::Static(Direction::from_az_el_deg(-45.0, 10.0)),
    };
    let frame = encode_plane_wave(&source, 1, 0, 128).expect("window in range");

    for bit_depth in [16u8, 24] {
        let enc = encapsulate(
            &frame,
            bit_depth,
            7,
            0,
            PacketFlags {
                fade_active: false,
                order_change: true,
            },
            OverflowGuard::Clamp,
        )
        .expect("encodable frame");
        let bytes = enc.packet.serialize();
        println!(
            "order {} at {bit_depth}-bit: payload {} bits -> {} bytes on the wire",
            frame.order(),
            payload_size(frame.order(), bit_depth, 128).unwrap(),
            bytes.len(),
        );

        print!("header:");
        for b in &bytes[..HEADER_LEN] {
            print!(" {b:02x}");
        }
        println!();

        let parsed = parse_packet(&bytes).expect("self-produced packet");
        assert_eq!(parsed, enc.packet);
        let back = dequantize(&parsed, 48_000);
        let worst = frame
            .raw()
            .iter()
            .zip(back.raw())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!(
            "round-trip max error {worst:.2e} (one step is {:.2e})",
            2f64.powi(-(bit_depth as i32 - 1)),
        );
        println!();
    }

    // The parser rejects anything that is not a packet, without panicking.
    for (what, bytes) in [
        ("truncated header", vec![0x48u8, 0x41, 1]),
        ("wrong magic", vec![0u8; 32]),
    ] {
        match parse_packet(&bytes) {
            Err(e) => println!("{what}: {e}"),
            Ok(_) => unreachable!(),
        }
    }
}
