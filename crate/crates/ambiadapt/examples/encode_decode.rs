//! Encode two sources (one static, one sweeping) into third-order
//! Ambisonics and decode to a virtual loudspeaker ring. Sources mix by
//! plain addition in the SH domain; the decoded beam of the moving source
//! follows its trajectory speaker by speaker.
//!
//! Run: `cargo run --example encode_decode`

use ambiadapt::ambi::{
    decode_loudspeakers, encode_plane_wave, AmbisonicFrame, Direction, LoudspeakerLayout,
    SourceSignal, Trajectory,
};

fn loudest(layout: &LoudspeakerLayout, speakers: &[f64], frame_length: usize) -> usize {
    (0..layout.speaker_count())
        .max_by(|&a, &b| {
            let ra: f64 = speakers[a * frame_length..(a + 1) * frame_length]
                .iter()
                .map(|s| s * s)
                .sum();
            let rb: f64 = speakers[b * frame_length..(b + 1) * frame_length]
                .iter()
                .map(|s| s * s)
                .sum();
            ra.partial_cmp(&rb).unwrap()
        })
        .unwrap()
}

fn main() {
    let sample_rate = 48_000;
    let frame_length = 128;
    let order = 3;

    // A 440 Hz tone fixed 30 degrees to the left, and a 587 Hz tone
    // sweeping the horizon from hard left to hard right in half a second.
    let duration = sample_rate / 2;
    let tone = |freq: f64, amp: f64| -> Vec<f64> {
        (0..duration)
            .map(|i| amp * (std::f64::consts::TAU * freq * i as f64 / sample_rate as f64).sin())
            .collect()
    };
    let static_source = SourceSignal {
        samples: tone(440.0, 0.35),
        sample_rate,
        trajectory: Trajectory::Static(Direction::from_az_el_deg(30.0, 0.0)),
    };
    let moving_source = SourceSignal {
        samples: tone(587.0, 0.3),
        sample_rate,
        trajectory: Trajectory::AzimuthSweep {
            from_deg: -90.0,
            to_deg: 90.0,
            elevation_deg: 0.0,
            duration_secs: 0.5,
        },
    };

    let layout = LoudspeakerLayout::fibonacci(36, order).expect("valid layout");
    println!(
        "decoding to {} speakers, order {order}",
        layout.speaker_count()
    );
    println!();
    println!("frame  sweep azimuth   beam of moving source   beam of the 2-source mix");

    let frames = duration as u64 / frame_length as u64;
    for k in 0..frames {
        let start = k * frame_length as u64;
        let moving = encode_plane_wave(&moving_source, order, start, frame_length).unwrap();
        let fixed = encode_plane_wave(&static_source, order, start, frame_length).unwrap();
        // Mixing is linear in the SH domain: add coefficients.
        let mut mix = AmbisonicFrame::zeros(order, frame_length, sample_rate, start);
        for c in 0..mix.channel_count() {
            for ((acc, a), b) in mix
                .channel_mut(c)
                .iter_mut()
                .zip(moving.channel(c))
                .zip(fixed.channel(c))
            {
                *acc = a + b;
            }
        }

        if k % 31 != 0 {
            continue;
        }
        let solo = decode_loudspeakers(&moving, &layout).unwrap();
        let both = decode_loudspeakers(&mix, &layout).unwrap();
        let solo_dir = layout.directions()[loudest(&layout, &solo, frame_length)];
        let both_dir = layout.directions()[loudest(&layout, &both, frame_length)];
        println!(
            "{k:>5}  {:>8.1} deg   {:>8.1} deg az           {:>8.1} deg az",
            moving_source.direction_at(start).azimuth.to_degrees(),
            solo_dir.azimuth.to_degrees(),
            both_dir.azimuth.to_degrees(),
        );
    }
    println!();
    println!("the solo beam follows the sweep; the mix beam sits with whichever source dominates locally");
}
