//! Configuration-driven experiment runner: builds sound scenes, runs the
//! encode -> adapt -> link -> decode chain, and reproduces the six
//! experimental stimulus conditions with WAV and CSV trace outputs.

pub mod audio;
mod cli;
pub mod config;
pub mod signal;
pub mod trace;

pub use cli::cli_main;
pub use config::{
    DropSpec, EstimateSource, ScenarioConfig, SignalSpec, StimulusSpec, TrajectorySpec,
};
pub use trace::{write_trace, TraceEvent, TraceRow, TRACE_HEADER};

use std::io::Write;
use std::path::PathBuf;

use thiserror::Error;

use crate::ambi::{
    decode_loudspeakers, encode_plane_wave, AmbisonicFrame, LoudspeakerLayout, SourceSignal,
    Trajectory,
};
use crate::netsim::{to_ns, CapacityStep, Link, LinkConfig, LinkEvent};
use crate::pipeline::{
    AdaptationConfig, AdaptationState, BandwidthEstimate, ControlEvent, JitterStats, Receiver,
    Sender,
};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error("config invalid:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("audio: {0}")]
    Audio(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Pipeline(#[from] crate::pipeline::PipelineError),
    #[error(transparent)]
    Netsim(#[from] crate::netsim::NetsimError),
    #[error(transparent)]
    Ambi(#[from] crate::ambi::AmbiError),
}

impl ScenarioError {
    /// CLI exit code class: 3 for configuration problems, 4 for runtime
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) | ScenarioError::Validation(_) => 3,
            _ => 4,
        }
    }
}

/// Everything a simulation produced, in memory.
#[derive(Debug)]
pub struct SimResult {
    /// Receiver playout frames at the session order, one per packet period.
    pub output_frames: Vec<AmbisonicFrame>,
    /// Time-ordered trace rows.
    pub rows: Vec<TraceRow>,
    /// Wire order of every sent packet, by sequence.
    pub header_orders: Vec<u8>,
    /// Serialized bytes of every sent packet, by sequence.
    pub sent_packets: Vec<Vec<u8>>,
    pub session_order: u32,
    pub conceal_count: u64,
    pub jitter_stats: JitterStats,
    pub clamped_samples: u64,
    pub starvation_count: u64,
}

impl SimResult {
    /// Flatten the playout frames into channel-major sample buffers.
    pub fn ambisonics_channels(&self) -> Vec<Vec<f64>> {
        let channels = ((self.session_order + 1) * (self.session_order + 1)) as usize;
        let total: usize = self.output_frames.iter().map(|f| f.frame_length()).sum();
        let mut out = vec![Vec::with_capacity(total); channels];
        for frame in &self.output_frames {
            for (c, acc) in out.iter_mut().enumerate() {
                acc.extend_from_slice(frame.channel(c));
            }
        }
        out
    }
}

/// Build the per-source signals and trajectories for a scene.
pub fn build_scene(cfg: &ScenarioConfig) -> Result<Vec<SourceSignal>, ScenarioError> {
    let scene_len = cfg.frames_total() as usize * cfg.scene.frame_length as usize;
    build_scene_samples(cfg, scene_len)
}

fn build_scene_samples(
    cfg: &ScenarioConfig,
    scene_len: usize,
) -> Result<Vec<SourceSignal>, ScenarioError> {
    // Domain-separated RNG tree: the link consumes children of the raw
    // scene seed (see netsim); signals branch from an xored root so adding
    // a source never perturbs loss draws.
    let mut signal_root = SplitMix64::new(cfg.scene.seed ^ 0x5349_474E_414C_5321);
    let fs = cfg.scene.sample_rate;
    let scene_duration = cfg.scene.duration_secs;
    let mut sources = Vec::with_capacity(cfg.scene.sources.len());
    for spec in &cfg.scene.sources {
        let mut rng = signal_root.split();
        let samples = signal::render_signal(&spec.signal, scene_len, fs, &mut rng)?;
        let trajectory = match spec.trajectory {
            TrajectorySpec::Static {
                azimuth_deg,
                elevation_deg,
            } => Trajectory::Static(crate::ambi::Direction::from_az_el_deg(
                azimuth_deg,
                elevation_deg,
            )),
            TrajectorySpec::AzimuthSweep {
                from_deg,
                to_deg,
                elevation_deg,
                duration_secs,
            } => Trajectory::AzimuthSweep {
                from_deg,
                to_deg,
                elevation_deg,
                duration_secs: duration_secs.unwrap_or(scene_duration),
            },
            TrajectorySpec::ElevationSweep {
                from_deg,
                to_deg,
                azimuth_deg,
                duration_secs,
            } => Trajectory::ElevationSweep {
                from_deg,
                to_deg,
                azimuth_deg,
                duration_secs: duration_secs.unwrap_or(scene_duration),
            },
        };
        sources.push(SourceSignal {
            samples,
            sample_rate: fs,
            trajectory,
        });
    }
    Ok(sources)
}

/// A stimulus resolved against the config: what actually drives the run.
#[derive(Debug, Clone)]
struct ResolvedRun {
    session_order: u32,
    adaptation_enabled: bool,
    threshold_bps: f64,
    fade_secs: f64,
    estimate_source: ResolvedEstimates,
    link: LinkConfig,
}

#[derive(Debug, Clone)]
enum ResolvedEstimates {
    Measured,
    /// Piecewise-constant (time, bps) schedule.
    Scripted(Vec<(f64, f64)>),
}

fn scheduled_bps(schedule: &[(f64, f64)], now: f64) -> f64 {
    let mut bps = schedule[0].1;
    for &(at, value) in schedule {
        if at <= now {
            bps = value;
        } else {
            break;
        }
    }
    bps
}

fn link_config(cfg: &ScenarioConfig, loss_override: Option<f64>) -> LinkConfig {
    let l = &cfg.link;
    let mut capacity = vec![CapacityStep {
        at_secs: 0.0,
        bps: l.capacity_bps,
    }];
    capacity.extend(l.capacity_steps.iter().map(|s| CapacityStep {
        at_secs: s.at_secs,
        bps: s.capacity_bps,
    }));
    LinkConfig {
        capacity,
        queue_limit_bytes: l.queue_limit_bytes,
        propagation_delay_secs: l.propagation_delay_secs,
        jitter_stddev_secs: l.jitter_stddev_secs,
        loss_probability: loss_override.unwrap_or(l.loss_probability),
        seed: cfg.scene.seed,
    }
}

fn resolve_stimulus(cfg: &ScenarioConfig) -> ResolvedRun {
    let max = cfg.scene.max_order;
    let a = &cfg.adaptation;
    match &cfg.stimulus {
        // Full-order clean chain.
        StimulusSpec::Reference => ResolvedRun {
            session_order: max,
            adaptation_enabled: false,
            threshold_bps: a.threshold_bps,
            fade_secs: 0.0,
            estimate_source: ResolvedEstimates::Measured,
            link: link_config(cfg, Some(0.0)),
        },
        // Omnidirectional the whole run: no directional cues at all.
        StimulusSpec::Omni => ResolvedRun {
            session_order: 0,
            adaptation_enabled: false,
            threshold_bps: a.threshold_bps,
            fade_secs: 0.0,
            estimate_source: ResolvedEstimates::Measured,
            link: link_config(cfg, Some(0.0)),
        },
        // Continuously maintained first-order stream.
        StimulusSpec::FirstOrder => ResolvedRun {
            session_order: max.min(1),
            adaptation_enabled: false,
            threshold_bps: a.threshold_bps,
            fade_secs: 0.0,
            estimate_source: ResolvedEstimates::Measured,
            link: link_config(cfg, Some(0.0)),
        },
        // Scripted estimate drop, switch on the next packet.
        StimulusSpec::Instantaneous { drop } => scripted_drop_run(cfg, drop, 0.0),
        // Same drop, cross-faded.
        StimulusSpec::Crossfade { fade_secs, drop } => scripted_drop_run(cfg, drop, *fade_secs),
        // Full order with induced loss, no adaptation.
        StimulusSpec::Corrupted { loss_probability } => ResolvedRun {
            session_order: max,
            adaptation_enabled: false,
            threshold_bps: a.threshold_bps,
            fade_secs: 0.0,
            estimate_source: ResolvedEstimates::Measured,
            link: link_config(cfg, Some(*loss_probability)),
        },
        // Passthrough: the config's adaptation and link sections as-is.
        StimulusSpec::Adaptive => resolve_raw(cfg),
    }
}

fn scripted_drop_run(cfg: &ScenarioConfig, drop: &DropSpec, fade_secs: f64) -> ResolvedRun {
    let drop_at = drop.at_secs.unwrap_or(cfg.scene.duration_secs / 3.0);
    ResolvedRun {
        session_order: cfg.scene.max_order,
        adaptation_enabled: true,
        threshold_bps: drop.threshold_bps,
        fade_secs,
        estimate_source: ResolvedEstimates::Scripted(vec![
            (0.0, drop.from_bps),
            (drop_at, drop.to_bps),
        ]),
        link: link_config(cfg, Some(0.0)),
    }
}

/// Run the configured stimulus. Seed-deterministic end to end.
pub fn simulate(cfg: &ScenarioConfig) -> Result<SimResult, ScenarioError> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(ScenarioError::Validation(errs));
    }
    run_resolved(cfg, resolve_stimulus(cfg))
}

/// Run with the `[adaptation]` and `[link]` sections exactly as written,
/// ignoring the `[stimulus]` presets. This is the raw experiment mode used
/// for measured-estimation scenarios (capacity drops on a real queue); the
/// `adaptive` stimulus kind reaches it from the CLI.
pub fn simulate_raw(cfg: &ScenarioConfig) -> Result<SimResult, ScenarioError> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(ScenarioError::Validation(errs));
    }
    run_resolved(cfg, resolve_raw(cfg))
}

fn resolve_raw(cfg: &ScenarioConfig) -> ResolvedRun {
    let a = &cfg.adaptation;
    ResolvedRun {
        session_order: cfg.scene.max_order,
        adaptation_enabled: a.enabled,
        threshold_bps: a.threshold_bps,
        fade_secs: a.fade_secs,
        estimate_source: match a.estimate_source {
            EstimateSource::Measured => ResolvedEstimates::Measured,
            EstimateSource::Scripted => ResolvedEstimates::Scripted(
                a.scripted_estimates
                    .iter()
                    .map(|s| (s.at_secs, s.bps))
                    .collect(),
            ),
        },
        link: link_config(cfg, None),
    }
}

fn run_resolved(cfg: &ScenarioConfig, run: ResolvedRun) -> Result<SimResult, ScenarioError> {
    let fs = cfg.scene.sample_rate;
    let frame_length = cfg.scene.frame_length as usize;
    let packet_interval = cfg.packet_interval_secs();
    let frames_total = cfg.frames_total();
    let scene_len = frames_total as usize * frame_length;
    let estimate_window = cfg.adaptation.estimate_window_secs;
    let depth = cfg.adaptation.jitter_buffer_depth;

    let sources = build_scene_samples(cfg, scene_len)?;
    let mut link = Link::new(run.link)?;
    let mut receiver = Receiver::new(run.session_order, fs, frame_length, depth, estimate_window);
    let mut sender = Sender::new(AdaptationState::new(AdaptationConfig {
        max_order: run.session_order,
        threshold_bps: run.threshold_bps,
        hysteresis_hold_secs: cfg.adaptation.hysteresis_hold_secs,
        fade_secs: run.fade_secs,
        estimate_window_secs: estimate_window,
        bit_depth: cfg.scene.bit_depth,
        frame_length: cfg.scene.frame_length as u16,
        sample_rate: fs,
    }));
    let idle_estimate = BandwidthEstimate::scripted(f64::INFINITY);
    let playout_delay = cfg.link.propagation_delay_secs + depth as f64 * packet_interval;

    let mut rows: Vec<TraceRow> = Vec::new();
    let mut output_frames: Vec<AmbisonicFrame> = Vec::with_capacity(frames_total as usize);
    let mut header_orders: Vec<u8> = Vec::with_capacity(frames_total as usize);
    let mut sent_packets: Vec<Vec<u8>> = Vec::with_capacity(frames_total as usize);
    let mut next_playout: u64 = 0;
    let mut scripted_row_boundary: u64 = 0;

    let measured = matches!(run.estimate_source, ResolvedEstimates::Measured);
    let push_estimates =
        |rows: &mut Vec<TraceRow>, published: &[crate::pipeline::PublishedEstimate]| {
            for p in published {
                rows.push(TraceRow {
                    time_ns: to_ns(p.window_end),
                    event: TraceEvent::BandwidthEstimate,
                    seq: None,
                    order: None,
                    bandwidth_bps: Some(p.bps.round() as u64),
                    queue_bytes: None,
                });
            }
        };

    for k in 0..frames_total {
        let now = k as f64 * packet_interval;

        // Receive everything the link has delivered by now; the estimator
        // advances on the delivery clock.
        for delivery in link.deliveries(now) {
            let (published, _) = receiver.ingest(&delivery.bytes, delivery.delivery_time)?;
            if measured {
                push_estimates(&mut rows, &published);
            }
        }
        let published = receiver.advance_clock(now)?;
        if measured {
            push_estimates(&mut rows, &published);
        }

        // Controller feed: receiver measurements (ideal feedback path) or
        // the scripted schedule.
        let estimate = match &run.estimate_source {
            ResolvedEstimates::Measured => receiver.estimator.clone(),
            ResolvedEstimates::Scripted(schedule) => {
                // trace the scripted view at window boundaries
                while (scripted_row_boundary as f64 + 1.0) * estimate_window <= now {
                    scripted_row_boundary += 1;
                    let t = scripted_row_boundary as f64 * estimate_window;
                    rows.push(TraceRow {
                        time_ns: to_ns(t),
                        event: TraceEvent::BandwidthEstimate,
                        seq: None,
                        order: None,
                        bandwidth_bps: Some(scheduled_bps(schedule, t).round() as u64),
                        queue_bytes: None,
                    });
                }
                BandwidthEstimate::scripted(scheduled_bps(schedule, now))
            }
        };

        // Scene content for this packet period, mixed in the SH domain.
        let start = k * frame_length as u64;
        let mut frame = AmbisonicFrame::zeros(run.session_order, frame_length, fs, start);
        for source in &sources {
            let enc = encode_plane_wave(source, run.session_order, start, frame_length)?;
            for c in 0..frame.channel_count() {
                let dst = frame.channel_mut(c);
                for (o, v) in dst.iter_mut().zip(enc.channel(c)) {
                    *o += v;
                }
            }
        }

        let est_ref = if run.adaptation_enabled {
            &estimate
        } else {
            &idle_estimate
        };
        let tick = sender.sender_tick(&frame, est_ref, now)?;
        for event in &tick.events {
            let (event_kind, order) = match *event {
                ControlEvent::OrderChanged { to, .. } => (TraceEvent::OrderChanged, to as u8),
                ControlEvent::FadeStarted { target, .. } => (TraceEvent::FadeStarted, target as u8),
                ControlEvent::FadeCompleted { order } => (TraceEvent::FadeCompleted, order as u8),
            };
            rows.push(TraceRow {
                time_ns: to_ns(now),
                event: event_kind,
                seq: Some(k),
                order: Some(order),
                bandwidth_bps: None,
                queue_bytes: None,
            });
        }

        link.submit(&tick.bytes, now)?;
        rows.push(TraceRow {
            time_ns: to_ns(now),
            event: TraceEvent::PacketSent,
            seq: Some(k),
            order: Some(tick.packet.header.order),
            bandwidth_bps: if run.adaptation_enabled && est_ref.has_estimate() {
                Some(est_ref.estimate_bps().round() as u64)
            } else {
                None
            },
            queue_bytes: Some(link.queued_bytes(now) as u64),
        });
        header_orders.push(tick.packet.header.order);
        sent_packets.push(tick.bytes);

        // Playout clock: frame j leaves the jitter buffer at
        // j * T_P + playout_delay.
        while next_playout < frames_total
            && next_playout as f64 * packet_interval + playout_delay <= now
        {
            playout_one(
                &mut receiver,
                &mut rows,
                &mut output_frames,
                next_playout,
                playout_delay,
                packet_interval,
            );
            next_playout += 1;
        }
    }

    // Tail: flush remaining deliveries and playouts.
    let end_time = frames_total as f64 * packet_interval + playout_delay + 1.0;
    for delivery in link.deliveries(end_time) {
        let (published, _) = receiver.ingest(&delivery.bytes, delivery.delivery_time)?;
        if measured {
            push_estimates(&mut rows, &published);
        }
    }
    while next_playout < frames_total {
        playout_one(
            &mut receiver,
            &mut rows,
            &mut output_frames,
            next_playout,
            playout_delay,
            packet_interval,
        );
        next_playout += 1;
    }

    // Drops become packet_lost rows; the submission id is the sequence.
    for event in link.events() {
        if let LinkEvent::Drop { id, time, .. } = *event {
            rows.push(TraceRow {
                time_ns: to_ns(time),
                event: TraceEvent::PacketLost,
                seq: Some(id),
                order: header_orders.get(id as usize).copied(),
                bandwidth_bps: None,
                queue_bytes: None,
            });
        }
    }

    rows.sort_by_key(|r| r.time_ns);

    Ok(SimResult {
        output_frames,
        rows,
        header_orders,
        sent_packets,
        session_order: run.session_order,
        conceal_count: receiver.buffer.stats.concealed,
        jitter_stats: receiver.buffer.stats,
        clamped_samples: sender.clamped_samples,
        starvation_count: sender.state.starvation_count,
    })
}

fn playout_one(
    receiver: &mut Receiver,
    rows: &mut Vec<TraceRow>,
    output_frames: &mut Vec<AmbisonicFrame>,
    index: u64,
    playout_delay: f64,
    packet_interval: f64,
) {
    let out = receiver.receiver_reconstruct();
    if out.concealed {
        rows.push(TraceRow {
            time_ns: to_ns(index as f64 * packet_interval + playout_delay),
            event: TraceEvent::Conceal,
            seq: Some(out.sequence),
            order: None,
            bandwidth_bps: None,
            queue_bytes: None,
        });
    }
    output_frames.push(out.frame);
}

/// Paths written by a run.
#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub ambisonics_wav: Option<PathBuf>,
    pub loudspeakers_wav: Option<PathBuf>,
    pub trace_csv: Option<PathBuf>,
    pub packets_file: Option<PathBuf>,
}

/// Magic prefix of a packets dump (`wire-dump` input).
pub const PACKETS_MAGIC: &[u8; 8] = b"HAPKTS01";

/// Execute the configured stimulus and write the configured outputs.
/// Partial outputs are removed if anything fails.
pub fn run_stimulus(cfg: &ScenarioConfig) -> Result<(SimResult, RunArtifacts), ScenarioError> {
    let result = simulate(cfg)?;
    let artifacts = write_outputs(cfg, &result)?;
    Ok((result, artifacts))
}

fn write_outputs(cfg: &ScenarioConfig, result: &SimResult) -> Result<RunArtifacts, ScenarioError> {
    let mut artifacts = RunArtifacts::default();
    let mut written: Vec<PathBuf> = Vec::new();
    let out = &cfg.output;
    std::fs::create_dir_all(&out.directory)?;

    let mut attempt = || -> Result<RunArtifacts, ScenarioError> {
        if let Some(name) = &out.ambisonics_wav {
            let path = out.directory.join(name);
            audio::write_wav(
                &path,
                &result.ambisonics_channels(),
                cfg.scene.sample_rate,
                cfg.scene.bit_depth,
            )?;
            written.push(path.clone());
            artifacts.ambisonics_wav = Some(path);
        }
        if let Some(name) = &out.loudspeakers_wav {
            let path = out.directory.join(name);
            let layout = LoudspeakerLayout::fibonacci(out.loudspeaker_count, result.session_order)?;
            let len: usize = result.output_frames.iter().map(|f| f.frame_length()).sum();
            let mut channels = vec![Vec::with_capacity(len); layout.speaker_count()];
            for frame in &result.output_frames {
                let decoded = decode_loudspeakers(frame, &layout)?;
                let flen = frame.frame_length();
                for (s, acc) in channels.iter_mut().enumerate() {
                    acc.extend_from_slice(&decoded[s * flen..(s + 1) * flen]);
                }
            }
            audio::write_wav(&path, &channels, cfg.scene.sample_rate, cfg.scene.bit_depth)?;
            written.push(path.clone());
            artifacts.loudspeakers_wav = Some(path);
        }
        if let Some(name) = &out.trace_csv {
            let path = out.directory.join(name);
            let mut file = std::fs::File::create(&path)?;
            write_trace(&result.rows, &mut file)?;
            written.push(path.clone());
            artifacts.trace_csv = Some(path);
        }
        if let Some(name) = &out.packets_file {
            let path = out.directory.join(name);
            let mut file = std::fs::File::create(&path)?;
            file.write_all(PACKETS_MAGIC)?;
            for packet in &result.sent_packets {
                file.write_all(&(packet.len() as u32).to_be_bytes())?;
                file.write_all(packet)?;
            }
            written.push(path.clone());
            artifacts.packets_file = Some(path);
        }
        Ok(artifacts.clone())
    };

    match attempt() {
        Ok(a) => Ok(a),
        Err(e) => {
            for path in written {
                let _ = std::fs::remove_file(path);
            }
            Err(e)
        }
    }
}

/// Emit all six stimulus conditions of one scene, named
/// `scene_{ref,omni,o1,inst,fade,corr}.{wav,csv}` under the output
/// directory. Returns the per-stimulus results in that order.
pub fn run_all_stimuli(
    cfg: &ScenarioConfig,
) -> Result<Vec<(SimResult, RunArtifacts)>, ScenarioError> {
    let mut results = Vec::new();
    for stimulus in StimulusSpec::all_six() {
        let mut variant = cfg.clone();
        let suffix = stimulus.suffix();
        variant.stimulus = stimulus;
        variant.output.ambisonics_wav = Some(PathBuf::from(format!("scene_{suffix}.wav")));
        variant.output.trace_csv = Some(PathBuf::from(format!("scene_{suffix}.csv")));
        variant.output.loudspeakers_wav = None;
        variant.output.packets_file = None;
        results.push(run_stimulus(&variant)?);
    }
    Ok(results)
}

#[cfg(test)]
mod tests;
