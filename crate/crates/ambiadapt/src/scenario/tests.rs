use std::path::PathBuf;

use super::config::ScenarioConfig;
use super::*;
use crate::ambi::Direction;

fn two_source_config(duration_secs: f64, extra: &str) -> ScenarioConfig {
    let text = format!(
        r#"
version = 1

[scene]
duration_secs = {duration_secs}

[[scene.sources]]
signal = {{ kind = "sine", frequency_hz = 440.0, amplitude = 0.35 }}
trajectory = {{ kind = "static", azimuth_deg = 30.0, elevation_deg = 0.0 }}

[[scene.sources]]
signal = {{ kind = "sine", frequency_hz = 587.0, amplitude = 0.3 }}
trajectory = {{ kind = "azimuth_sweep" }}

{extra}
"#
    );
    ScenarioConfig::from_toml_str(&text).unwrap()
}

#[test]
fn build_scene_static_and_sweep() {
    let cfg = two_source_config(1.0, "");
    let sources = build_scene(&cfg).unwrap();
    assert_eq!(sources.len(), 2);

    let static_dir = sources[0].direction_at(0);
    assert_eq!(static_dir, Direction::from_az_el_deg(30.0, 0.0));
    assert_eq!(sources[0].direction_at(40_000), static_dir);

    // default sweep -90 -> 90 over the scene; sample 24000 of 48000 is the
    // exact midpoint
    let mid = sources[1].direction_at(24_000);
    assert!(
        mid.azimuth.abs() < 1e-12,
        "midpoint azimuth {}",
        mid.azimuth
    );
    let first = sources[1].direction_at(0);
    assert!((first.azimuth + std::f64::consts::PI / 2.0).abs() < 1e-12);
}

#[test]
fn sweep_endpoints_exact_when_sweep_fits_scene() {
    // Sweep one frame shorter than the scene: the clamp makes the last
    // trajectory sample sit exactly on the configured endpoint.
    let cfg = two_source_config(1.0, "");
    let mut cfg = cfg;
    cfg.scene.sources[1].trajectory = super::TrajectorySpec::AzimuthSweep {
        from_deg: -90.0,
        to_deg: 90.0,
        elevation_deg: 0.0,
        duration_secs: Some(1.0 - 128.0 / 48_000.0),
    };
    let sources = build_scene(&cfg).unwrap();
    let last_index = cfg.frames_total() * 128 - 1;
    let first = sources[1].direction_at(0);
    let last = sources[1].direction_at(last_index);
    assert_eq!(first, Direction::from_az_el_deg(-90.0, 0.0));
    assert_eq!(last, Direction::from_az_el_deg(90.0, 0.0));
}

#[test]
fn elevation_sweep_endpoints_follow_convention() {
    let mut cfg = two_source_config(1.0, "");
    cfg.scene.sources[1].trajectory = super::TrajectorySpec::ElevationSweep {
        from_deg: 0.0,
        to_deg: 180.0,
        azimuth_deg: 0.0,
        duration_secs: Some(0.5),
    };
    let sources = build_scene(&cfg).unwrap();
    // elevation 0 -> colatitude 90
    assert!((sources[1].direction_at(0).colatitude - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    // elevation 180 -> colatitude 90 on the opposite azimuth
    let end = sources[1].direction_at(24_000);
    assert!((end.colatitude - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((end.azimuth.abs() - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn reference_stimulus_equals_direct_chain() {
    let cfg = two_source_config(1.0, "[stimulus]\nkind = \"reference\"\n");
    let result = simulate(&cfg).unwrap();
    assert_eq!(result.conceal_count, 0, "clean chain must not conceal");
    assert_eq!(result.output_frames.len(), cfg.frames_total() as usize);

    let sources = build_scene(&cfg).unwrap();
    let step = 2f64.powi(-15);
    for (k, got) in result.output_frames.iter().enumerate() {
        let start = k as u64 * 128;
        let mut want = AmbisonicFrame::zeros(3, 128, 48_000, start);
        for source in &sources {
            let enc = encode_plane_wave(source, 3, start, 128).unwrap();
            for c in 0..16 {
                for (o, v) in want.channel_mut(c).iter_mut().zip(enc.channel(c)) {
                    *o += v;
                }
            }
        }
        for (a, b) in got.raw().iter().zip(want.raw()) {
            assert!((a - b).abs() <= step, "frame {k}: {a} vs {b}");
        }
    }
}

#[test]
fn forced_order_stimuli_have_expected_channel_counts() {
    for (kind, channels) in [("omni", 1usize), ("first_order", 4)] {
        let cfg = two_source_config(0.25, &format!("[stimulus]\nkind = \"{kind}\"\n"));
        let result = simulate(&cfg).unwrap();
        assert_eq!(result.ambisonics_channels().len(), channels, "{kind}");
        assert!(result
            .header_orders
            .iter()
            .all(|&o| o as usize == channels.isqrt() - 1));
    }
}

#[test]
fn corrupted_stimulus_conceals_roughly_five_percent() {
    let cfg = two_source_config(2.0, "[stimulus]\nkind = \"corrupted\"\n");
    let result = simulate(&cfg).unwrap();
    let frames = cfg.frames_total() as f64;
    let rate = result.conceal_count as f64 / frames;
    assert!((0.02..=0.09).contains(&rate), "conceal rate {rate}");
    // trace rows match the conceal count
    let conceal_rows = result
        .rows
        .iter()
        .filter(|r| r.event == TraceEvent::Conceal)
        .count() as u64;
    assert_eq!(conceal_rows, result.conceal_count);
}

#[test]
fn conceal_count_matches_zero_frames_in_audio() {
    // A tone-only scene never produces an all-zero frame except by
    // concealment.
    let mut cfg = two_source_config(2.0, "[stimulus]\nkind = \"corrupted\"\n");
    cfg.scene.sources.truncate(1);
    let result = simulate(&cfg).unwrap();
    let zero_frames = result
        .output_frames
        .iter()
        .filter(|f| f.raw().iter().all(|&s| s == 0.0))
        .count() as u64;
    assert!(
        result.conceal_count > 0,
        "seeded loss should conceal something"
    );
    assert_eq!(zero_frames, result.conceal_count);
}

#[test]
fn instantaneous_stimulus_switches_once_to_order_one() {
    let cfg = two_source_config(3.0, "[stimulus]\nkind = \"instantaneous\"\n");
    let result = simulate(&cfg).unwrap();

    let down_switches: Vec<&TraceRow> = result
        .rows
        .iter()
        .filter(|r| r.event == TraceEvent::OrderChanged)
        .collect();
    assert_eq!(down_switches.len(), 1, "exactly one order change");
    assert_eq!(down_switches[0].order, Some(1));

    let switch_seq = down_switches[0].seq.unwrap();
    for (k, &order) in result.header_orders.iter().enumerate() {
        if (k as u64) < switch_seq {
            assert_eq!(order, 3, "packet {k} before the switch");
        } else {
            assert_eq!(order, 1, "packet {k} after the switch");
        }
    }
    assert_eq!(
        result.conceal_count, 0,
        "the link never drops in this stimulus"
    );
}

#[test]
fn emitted_orders_are_budget_optimal_while_triggered() {
    // While the trigger governs, every packet's payload fits the rate
    // budget and the next order up would not (checked across the trace).
    let cfg = two_source_config(3.0, "[stimulus]\nkind = \"instantaneous\"\n");
    let result = simulate(&cfg).unwrap();
    let t_p = cfg.packet_interval_secs();
    // r_max under trigger is the threshold floor (3.5 Mbps for this
    // stimulus); budget per packet in bits:
    let budget = 3.5e6 * t_p;
    let switch_seq = result
        .rows
        .iter()
        .find(|r| r.event == TraceEvent::OrderChanged)
        .and_then(|r| r.seq)
        .unwrap();
    for (k, &order) in result.header_orders.iter().enumerate() {
        if (k as u64) < switch_seq {
            continue;
        }
        let fits = crate::wire::payload_size(order as u32, 16, 128).unwrap() as f64;
        assert!(fits <= budget, "packet {k}: order {order} over budget");
        let next = crate::wire::payload_size(order as u32 + 1, 16, 128).unwrap() as f64;
        assert!(
            next > budget,
            "packet {k}: order {} would also fit",
            order + 1
        );
    }
}

#[test]
fn crossfade_stimulus_fades_then_truncates() {
    let cfg = two_source_config(3.0, "[stimulus]\nkind = \"crossfade\"\n");
    let result = simulate(&cfg).unwrap();
    let started = result
        .rows
        .iter()
        .find(|r| r.event == TraceEvent::FadeStarted)
        .unwrap();
    let completed = result
        .rows
        .iter()
        .find(|r| r.event == TraceEvent::FadeCompleted)
        .unwrap();
    assert_eq!(started.order, Some(1));
    assert_eq!(completed.order, Some(1));
    let fade_ns = completed.time_ns - started.time_ns;
    assert!(
        (fade_ns as f64 - 1e9).abs() < 5e6,
        "one second fade, got {fade_ns} ns"
    );
    assert_eq!(result.conceal_count, 0);
}

#[test]
fn wav_channel_c_is_acn_channel_c() {
    // Probe with a real order-3 frame stream: each WAV channel must carry
    // the matching ACN channel of the playout frames, on the PCM grid so
    // the re-read is bit-exact.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = two_source_config(0.25, "");
    cfg.output.directory = dir.path().to_path_buf();
    cfg.output.ambisonics_wav = Some(PathBuf::from("probe.wav"));
    let (result, artifacts) = run_stimulus(&cfg).unwrap();
    let (read_back, rate, depth) =
        audio::read_wav(artifacts.ambisonics_wav.as_ref().unwrap()).unwrap();
    assert_eq!((rate, depth), (48_000, 16));
    let in_memory = result.ambisonics_channels();
    assert_eq!(read_back.len(), 16);
    for (c, (disk, memory)) in read_back.iter().zip(&in_memory).enumerate() {
        assert_eq!(disk, memory, "ACN channel {c} differs on disk");
    }
}

#[test]
fn stimuli_emits_six_files_with_suffixes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = two_source_config(0.25, "");
    cfg.output.directory = dir.path().to_path_buf();
    let results = run_all_stimuli(&cfg).unwrap();
    assert_eq!(results.len(), 6);
    for suffix in ["ref", "omni", "o1", "inst", "fade", "corr"] {
        assert!(
            dir.path().join(format!("scene_{suffix}.wav")).exists(),
            "{suffix} wav"
        );
        assert!(
            dir.path().join(format!("scene_{suffix}.csv")).exists(),
            "{suffix} csv"
        );
    }
    // channel counts: ref 16, omni 1, o1 4
    let (ref_ch, _, _) = audio::read_wav(&dir.path().join("scene_ref.wav")).unwrap();
    let (omni_ch, _, _) = audio::read_wav(&dir.path().join("scene_omni.wav")).unwrap();
    let (o1_ch, _, _) = audio::read_wav(&dir.path().join("scene_o1.wav")).unwrap();
    assert_eq!((ref_ch.len(), omni_ch.len(), o1_ch.len()), (16, 1, 4));
}

#[test]
fn identical_seeds_give_byte_identical_outputs() {
    let run = |dir: &std::path::Path| {
        let mut cfg = two_source_config(0.5, "[stimulus]\nkind = \"corrupted\"\n");
        cfg.output.directory = dir.to_path_buf();
        cfg.output.ambisonics_wav = Some(PathBuf::from("a.wav"));
        cfg.output.trace_csv = Some(PathBuf::from("t.csv"));
        run_stimulus(&cfg).unwrap();
        (
            std::fs::read(dir.join("a.wav")).unwrap(),
            std::fs::read(dir.join("t.csv")).unwrap(),
        )
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let (wav1, csv1) = run(d1.path());
    let (wav2, csv2) = run(d2.path());
    assert_eq!(wav1, wav2);
    assert_eq!(csv1, csv2);
}

#[test]
fn different_seed_changes_corrupted_output() {
    let mut cfg = two_source_config(0.5, "[stimulus]\nkind = \"corrupted\"\n");
    let a = simulate(&cfg).unwrap();
    cfg.scene.seed = 7;
    let b = simulate(&cfg).unwrap();
    let a_seqs: Vec<u64> = a
        .rows
        .iter()
        .filter(|r| r.event == TraceEvent::Conceal)
        .filter_map(|r| r.seq)
        .collect();
    let b_seqs: Vec<u64> = b
        .rows
        .iter()
        .filter(|r| r.event == TraceEvent::Conceal)
        .filter_map(|r| r.seq)
        .collect();
    assert_ne!(a_seqs, b_seqs);
}

#[test]
fn invalid_config_is_a_validation_error() {
    let mut cfg = two_source_config(1.0, "");
    cfg.link.loss_probability = 1.5;
    match simulate(&cfg) {
        Err(ScenarioError::Validation(errs)) => {
            assert!(errs[0].starts_with("link.loss_probability:"));
        }
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn trace_rows_are_time_ordered() {
    let cfg = two_source_config(1.0, "[stimulus]\nkind = \"corrupted\"\n");
    let result = simulate(&cfg).unwrap();
    for pair in result.rows.windows(2) {
        assert!(pair[0].time_ns <= pair[1].time_ns);
    }
}

mod cli {
    use super::*;
    use std::io::Write;

    fn write_config(dir: &std::path::Path, body: &str) -> PathBuf {
        let path = dir.join("scene.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    const VALID: &str = r#"
version = 1
[scene]
duration_secs = 0.25
[[scene.sources]]
signal = { kind = "sine", frequency_hz = 440.0 }
trajectory = { kind = "static", azimuth_deg = 0.0, elevation_deg = 0.0 }
[output]
ambisonics_wav = "out.wav"
trace_csv = "out.csv"
packets_file = "out.pkts"
"#;

    #[test]
    fn validate_rejects_bad_loss_with_exit_3() {
        let dir = tempfile::tempdir().unwrap();
        let bad = VALID.to_string() + "[link]\nloss_probability = 1.5\n";
        let path = write_config(dir.path(), &bad);
        let code = cli_main(["ambiadapt", "validate", path.to_str().unwrap()]);
        assert_eq!(code, 3);
    }

    #[test]
    fn validate_accepts_good_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), VALID);
        let code = cli_main(["ambiadapt", "--quiet", "validate", path.to_str().unwrap()]);
        assert_eq!(code, 0);
    }

    #[test]
    fn run_produces_configured_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), VALID);
        let out = dir.path().join("results");
        let code = cli_main([
            "ambiadapt",
            "--quiet",
            "--out-dir",
            out.to_str().unwrap(),
            "run",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert!(out.join("out.wav").exists());
        assert!(out.join("out.csv").exists());
        assert!(out.join("out.pkts").exists());
    }

    #[test]
    fn wire_dump_reads_packets_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), VALID);
        let out = dir.path().join("results");
        assert_eq!(
            cli_main([
                "ambiadapt",
                "--quiet",
                "--out-dir",
                out.to_str().unwrap(),
                "run",
                path.to_str().unwrap(),
            ]),
            0
        );
        let code = cli_main([
            "ambiadapt",
            "wire-dump",
            out.join("out.pkts").to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }

    #[test]
    fn usage_error_is_exit_2() {
        assert_eq!(cli_main(["ambiadapt", "frobnicate"]), 2);
        assert_eq!(cli_main(["ambiadapt"]), 2);
    }

    #[test]
    fn missing_config_file_is_exit_3() {
        assert_eq!(cli_main(["ambiadapt", "run", "/nonexistent/nope.toml"]), 3);
    }

    #[test]
    fn wire_dump_rejects_garbage_with_exit_3() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("garbage.bin");
        std::fs::write(&path, b"not a dump").unwrap();
        assert_eq!(
            cli_main(["ambiadapt", "wire-dump", path.to_str().unwrap()]),
            3
        );
    }

    #[test]
    fn seed_flag_overrides_scene_seed() {
        let dir = tempfile::tempdir().unwrap();
        let body = VALID.to_string() + "[stimulus]\nkind = \"corrupted\"\n";
        let path = write_config(dir.path(), &body);
        let out1 = dir.path().join("r1");
        let out2 = dir.path().join("r2");
        for (out, seed) in [(&out1, "42"), (&out2, "99")] {
            assert_eq!(
                cli_main([
                    "ambiadapt",
                    "--quiet",
                    "--seed",
                    seed,
                    "--out-dir",
                    out.to_str().unwrap(),
                    "run",
                    path.to_str().unwrap(),
                ]),
                0
            );
        }
        let a = std::fs::read(out1.join("out.wav")).unwrap();
        let b = std::fs::read(out2.join("out.wav")).unwrap();
        assert_ne!(a, b, "different seeds must change the corrupted stream");
    }
}
