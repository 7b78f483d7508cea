//! Declarative scenario configuration: the versioned TOML schema, defaults,
//! and field-path validation.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::ScenarioError;

pub const CONFIG_VERSION: u32 = 1;

/// Whole scenario file. See `docs/config.md` for the schema reference.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub scene: SceneConfig,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub adaptation: AdaptationSection,
    #[serde(default)]
    pub stimulus: StimulusSpec,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default = "default_sample_rate")]
    pub sample_rate: u32,
    #[serde(default = "default_frame_length")]
    pub frame_length: u32,
    #[serde(default = "default_bit_depth")]
    pub bit_depth: u8,
    #[serde(default = "default_max_order")]
    pub max_order: u32,
    #[serde(default = "default_duration")]
    pub duration_secs: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub sources: Vec<SourceSpec>,
}

fn default_sample_rate() -> u32 {
    48_000
}
fn default_frame_length() -> u32 {
    128
}
fn default_bit_depth() -> u8 {
    16
}
fn default_max_order() -> u32 {
    3
}
fn default_duration() -> f64 {
    10.0
}
fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub signal: SignalSpec,
    pub trajectory: TrajectorySpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Sine {
        frequency_hz: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Low-passed white-noise bursts with cosine edges, `burst_secs` on,
    /// `gap_secs` off.
    NoiseBurst {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_burst_secs")]
        burst_secs: f64,
        #[serde(default = "default_gap_secs")]
        gap_secs: f64,
    },
    /// Exponential frequency sweep.
    Sweep {
        start_hz: f64,
        end_hz: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Mono WAV file (first channel of a multichannel file).
    File {
        path: PathBuf,
        #[serde(default = "default_gain")]
        gain: f64,
    },
}

fn default_amplitude() -> f64 {
    0.35
}
fn default_burst_secs() -> f64 {
    0.25
}
fn default_gap_secs() -> f64 {
    0.25
}
fn default_gain() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Static {
        azimuth_deg: f64,
        elevation_deg: f64,
    },
    AzimuthSweep {
        #[serde(default = "default_az_from")]
        from_deg: f64,
        #[serde(default = "default_az_to")]
        to_deg: f64,
        #[serde(default)]
        elevation_deg: f64,
        /// Defaults to the scene duration.
        duration_secs: Option<f64>,
    },
    ElevationSweep {
        #[serde(default)]
        from_deg: f64,
        #[serde(default = "default_el_to")]
        to_deg: f64,
        #[serde(default)]
        azimuth_deg: f64,
        duration_secs: Option<f64>,
    },
}

fn default_az_from() -> f64 {
    -90.0
}
fn default_az_to() -> f64 {
    90.0
}
fn default_el_to() -> f64 {
    180.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    #[serde(default = "default_capacity")]
    pub capacity_bps: f64,
    #[serde(default = "default_queue_limit")]
    pub queue_limit_bytes: usize,
    #[serde(default = "default_propagation")]
    pub propagation_delay_secs: f64,
    #[serde(default)]
    pub jitter_stddev_secs: f64,
    #[serde(default)]
    pub loss_probability: f64,
    #[serde(default)]
    pub capacity_steps: Vec<CapacityStepSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityStepSpec {
    pub at_secs: f64,
    pub capacity_bps: f64,
}

fn default_capacity() -> f64 {
    13_000_000.0
}
fn default_queue_limit() -> usize {
    64 * 1024
}
fn default_propagation() -> f64 {
    0.020
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            capacity_bps: default_capacity(),
            queue_limit_bytes: default_queue_limit(),
            propagation_delay_secs: default_propagation(),
            jitter_stddev_secs: 0.0,
            loss_probability: 0.0,
            capacity_steps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptationSection {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "default_threshold")]
    pub threshold_bps: f64,
    #[serde(default = "default_estimate_window")]
    pub estimate_window_secs: f64,
    #[serde(default = "default_hold")]
    pub hysteresis_hold_secs: f64,
    #[serde(default)]
    pub fade_secs: f64,
    #[serde(default = "default_buffer_depth")]
    pub jitter_buffer_depth: usize,
    #[serde(default)]
    pub estimate_source: EstimateSource,
    /// Piecewise-constant controller feed when `estimate_source` is
    /// `scripted`.
    #[serde(default)]
    pub scripted_estimates: Vec<ScriptedEstimateSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    #[default]
    Measured,
    Scripted,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedEstimateSpec {
    pub at_secs: f64,
    pub bps: f64,
}

fn default_true() -> bool {
    true
}
fn default_threshold() -> f64 {
    2_000_000.0
}
fn default_estimate_window() -> f64 {
    0.1
}
fn default_hold() -> f64 {
    2.0
}
fn default_buffer_depth() -> usize {
    4
}

impl Default for AdaptationSection {
    fn default() -> Self {
        Self {
            enabled: true,
            threshold_bps: default_threshold(),
            estimate_window_secs: default_estimate_window(),
            hysteresis_hold_secs: default_hold(),
            fade_secs: 0.0,
            jitter_buffer_depth: default_buffer_depth(),
            estimate_source: EstimateSource::Measured,
            scripted_estimates: Vec::new(),
        }
    }
}

/// The six experiment conditions, plus `adaptive`, the passthrough mode
/// that runs the `[adaptation]` and `[link]` sections exactly as written
/// (measured estimation against a real capacity schedule).
///
/// `instantaneous` and `crossfade` script a bandwidth-estimate drop
/// (13 -> 1 Mbps at one third of the scene by default) with the trigger
/// threshold placed so the landing order is 1; the link itself stays clean
/// for these two, so only the order transition is audible.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StimulusSpec {
    #[default]
    Reference,
    Omni,
    FirstOrder,
    Instantaneous {
        #[serde(default)]
        drop: DropSpec,
    },
    Crossfade {
        #[serde(default = "default_fade")]
        fade_secs: f64,
        #[serde(default)]
        drop: DropSpec,
    },
    Corrupted {
        #[serde(default = "default_loss")]
        loss_probability: f64,
    },
    Adaptive,
}

fn default_fade() -> f64 {
    1.0
}
fn default_loss() -> f64 {
    0.05
}

impl StimulusSpec {
    /// File suffix for `stimuli` outputs.
    pub fn suffix(&self) -> &'static str {
        match self {
            StimulusSpec::Reference => "ref",
            StimulusSpec::Omni => "omni",
            StimulusSpec::FirstOrder => "o1",
            StimulusSpec::Instantaneous { .. } => "inst",
            StimulusSpec::Crossfade { .. } => "fade",
            StimulusSpec::Corrupted { .. } => "corr",
            StimulusSpec::Adaptive => "adaptive",
        }
    }

    /// All six conditions with their default parameters.
    pub fn all_six() -> Vec<StimulusSpec> {
        vec![
            StimulusSpec::Reference,
            StimulusSpec::Omni,
            StimulusSpec::FirstOrder,
            StimulusSpec::Instantaneous {
                drop: DropSpec::default(),
            },
            StimulusSpec::Crossfade {
                fade_secs: default_fade(),
                drop: DropSpec::default(),
            },
            StimulusSpec::Corrupted {
                loss_probability: default_loss(),
            },
        ]
    }
}

/// Scripted estimate drop for the adaptive stimuli.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropSpec {
    /// Defaults to one third of the scene duration.
    pub at_secs: Option<f64>,
    #[serde(default = "default_drop_to")]
    pub to_bps: f64,
    #[serde(default = "default_pre_drop")]
    pub from_bps: f64,
    /// Trigger threshold for these stimuli; the default places the
    /// budget selection on order 1.
    #[serde(default = "default_stimulus_threshold")]
    pub threshold_bps: f64,
}

fn default_drop_to() -> f64 {
    1_000_000.0
}
fn default_pre_drop() -> f64 {
    13_000_000.0
}
fn default_stimulus_threshold() -> f64 {
    3_500_000.0
}

impl Default for DropSpec {
    fn default() -> Self {
        Self {
            at_secs: None,
            to_bps: default_drop_to(),
            from_bps: default_pre_drop(),
            threshold_bps: default_stimulus_threshold(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub directory: PathBuf,
    /// Raw Ambisonics output (ACN channel order), written when set.
    pub ambisonics_wav: Option<PathBuf>,
    /// Decoded loudspeaker mix, written when set.
    pub loudspeakers_wav: Option<PathBuf>,
    pub trace_csv: Option<PathBuf>,
    /// Length-prefixed dump of every sent packet (`wire-dump` input).
    pub packets_file: Option<PathBuf>,
    #[serde(default = "default_speaker_count")]
    pub loudspeaker_count: usize,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_speaker_count() -> usize {
    36
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_out_dir(),
            ambisonics_wav: None,
            loudspeakers_wav: None,
            trace_csv: None,
            packets_file: None,
            loudspeaker_count: default_speaker_count(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Config(format!("{}: {}", path.display(), e)))?;
        Self::from_toml_str(&text)
    }

    pub fn frames_total(&self) -> u64 {
        (self.scene.duration_secs * self.scene.sample_rate as f64 / self.scene.frame_length as f64)
            .floor() as u64
    }

    pub fn packet_interval_secs(&self) -> f64 {
        self.scene.frame_length as f64 / self.scene.sample_rate as f64
    }

    /// Validate every invariant the runner relies on; returns one
    /// field-path message per violation.
    pub fn validate(&self) -> Vec<String> {
        let mut errs: Vec<String> = Vec::new();

        if self.version != CONFIG_VERSION {
            errs.push(format!(
                "version: unsupported version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        let s = &self.scene;
        if s.sample_rate == 0 {
            errs.push("scene.sample_rate: must be positive".into());
        }
        if s.frame_length == 0 || s.frame_length > u16::MAX as u32 {
            errs.push(format!(
                "scene.frame_length: {} outside 1..=65535",
                s.frame_length
            ));
        }
        if !matches!(s.bit_depth, 16 | 24 | 32) {
            errs.push(format!(
                "scene.bit_depth: {} not one of 16, 24, 32",
                s.bit_depth
            ));
        }
        if s.max_order > 15 {
            errs.push(format!(
                "scene.max_order: {} exceeds the wire maximum 15",
                s.max_order
            ));
        }
        if s.duration_secs <= 0.0 {
            errs.push(format!(
                "scene.duration_secs: {} must be positive",
                s.duration_secs
            ));
        }
        if s.sources.is_empty() {
            errs.push("scene.sources: at least one source required".into());
        }
        for (i, src) in s.sources.iter().enumerate() {
            let base = format!("scene.sources[{i}]");
            match &src.signal {
                SignalSpec::Sine {
                    frequency_hz,
                    amplitude,
                } => {
                    if *frequency_hz <= 0.0 {
                        errs.push(format!(
                            "{base}.signal.frequency_hz: {frequency_hz} must be positive"
                        ));
                    }
                    check_amplitude(&mut errs, &base, *amplitude);
                }
                SignalSpec::NoiseBurst {
                    amplitude,
                    burst_secs,
                    gap_secs,
                } => {
                    check_amplitude(&mut errs, &base, *amplitude);
                    if *burst_secs <= 0.0 {
                        errs.push(format!(
                            "{base}.signal.burst_secs: {burst_secs} must be positive"
                        ));
                    }
                    if *gap_secs < 0.0 {
                        errs.push(format!(
                            "{base}.signal.gap_secs: {gap_secs} must be non-negative"
                        ));
                    }
                }
                SignalSpec::Sweep {
                    start_hz,
                    end_hz,
                    amplitude,
                } => {
                    if *start_hz <= 0.0 || *end_hz <= 0.0 {
                        errs.push(format!(
                            "{base}.signal: sweep endpoints must be positive, got {start_hz}..{end_hz}"
                        ));
                    }
                    check_amplitude(&mut errs, &base, *amplitude);
                }
                SignalSpec::File { path, gain } => {
                    if path.as_os_str().is_empty() {
                        errs.push(format!("{base}.signal.path: empty"));
                    }
                    if !(*gain > 0.0 && *gain <= 1.0) {
                        errs.push(format!("{base}.signal.gain: {gain} outside (0, 1]"));
                    }
                }
            }
            match &src.trajectory {
                TrajectorySpec::Static { .. } => {}
                TrajectorySpec::AzimuthSweep { duration_secs, .. }
                | TrajectorySpec::ElevationSweep { duration_secs, .. } => {
                    if let Some(d) = duration_secs {
                        if *d <= 0.0 {
                            errs.push(format!(
                                "{base}.trajectory.duration_secs: {d} must be positive"
                            ));
                        }
                    }
                }
            }
        }

        let l = &self.link;
        if l.capacity_bps <= 0.0 {
            errs.push(format!(
                "link.capacity_bps: {} must be positive",
                l.capacity_bps
            ));
        }
        if !(0.0..=1.0).contains(&l.loss_probability) {
            errs.push(format!(
                "link.loss_probability: {} outside [0, 1]",
                l.loss_probability
            ));
        }
        if l.propagation_delay_secs < 0.0 {
            errs.push(format!(
                "link.propagation_delay_secs: {} must be non-negative",
                l.propagation_delay_secs
            ));
        }
        if l.jitter_stddev_secs < 0.0 {
            errs.push(format!(
                "link.jitter_stddev_secs: {} must be non-negative",
                l.jitter_stddev_secs
            ));
        }
        let mut prev = 0.0;
        for (i, step) in l.capacity_steps.iter().enumerate() {
            if step.capacity_bps <= 0.0 {
                errs.push(format!(
                    "link.capacity_steps[{i}].capacity_bps: {} must be positive",
                    step.capacity_bps
                ));
            }
            if step.at_secs <= prev {
                errs.push(format!(
                    "link.capacity_steps[{i}].at_secs: {} not strictly increasing",
                    step.at_secs
                ));
            }
            prev = step.at_secs;
        }

        let a = &self.adaptation;
        if a.threshold_bps <= 0.0 {
            errs.push(format!(
                "adaptation.threshold_bps: {} must be positive",
                a.threshold_bps
            ));
        }
        if a.estimate_window_secs <= 0.0 {
            errs.push(format!(
                "adaptation.estimate_window_secs: {} must be positive",
                a.estimate_window_secs
            ));
        }
        if a.hysteresis_hold_secs < 0.0 {
            errs.push(format!(
                "adaptation.hysteresis_hold_secs: {} must be non-negative",
                a.hysteresis_hold_secs
            ));
        }
        check_fade(
            &mut errs,
            "adaptation.fade_secs",
            a.fade_secs,
            s.sample_rate,
        );
        if a.jitter_buffer_depth == 0 {
            errs.push("adaptation.jitter_buffer_depth: must be at least 1".into());
        }
        if a.estimate_source == EstimateSource::Scripted && a.scripted_estimates.is_empty() {
            errs.push(
                "adaptation.scripted_estimates: scripted estimate source needs at least one entry"
                    .into(),
            );
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, step) in a.scripted_estimates.iter().enumerate() {
            if step.bps <= 0.0 {
                errs.push(format!(
                    "adaptation.scripted_estimates[{i}].bps: {} must be positive",
                    step.bps
                ));
            }
            if step.at_secs <= prev {
                errs.push(format!(
                    "adaptation.scripted_estimates[{i}].at_secs: {} not strictly increasing",
                    step.at_secs
                ));
            }
            prev = step.at_secs;
        }

        match &self.stimulus {
            StimulusSpec::Crossfade { fade_secs, drop } => {
                check_fade(&mut errs, "stimulus.fade_secs", *fade_secs, s.sample_rate);
                check_drop(&mut errs, drop, s.duration_secs);
            }
            StimulusSpec::Instantaneous { drop } => check_drop(&mut errs, drop, s.duration_secs),
            StimulusSpec::Corrupted { loss_probability }
                if !(0.0..=1.0).contains(loss_probability) =>
            {
                errs.push(format!(
                    "stimulus.loss_probability: {loss_probability} outside [0, 1]"
                ));
            }
            _ => {}
        }

        if self.output.loudspeaker_count < ((s.max_order + 1) * (s.max_order + 1)) as usize {
            errs.push(format!(
                "output.loudspeaker_count: {} speakers cannot decode order {}",
                self.output.loudspeaker_count, s.max_order
            ));
        }

        errs
    }
}

fn check_amplitude(errs: &mut Vec<String>, base: &str, amplitude: f64) {
    if !(amplitude > 0.0 && amplitude <= 1.0) {
        errs.push(format!(
            "{base}.signal.amplitude: {amplitude} outside (0, 1]"
        ));
    }
}

fn check_fade(errs: &mut Vec<String>, path: &str, fade_secs: f64, sample_rate: u32) {
    if fade_secs < 0.0 {
        errs.push(format!("{path}: {fade_secs} must be non-negative"));
        return;
    }
    let samples = (fade_secs * sample_rate as f64).round();
    if samples > u16::MAX as f64 {
        errs.push(format!(
            "{path}: {fade_secs} s is {samples} samples, beyond the 16-bit fade_remaining field"
        ));
    }
}

fn check_drop(errs: &mut Vec<String>, drop: &DropSpec, duration: f64) {
    if drop.to_bps <= 0.0 {
        errs.push(format!(
            "stimulus.drop.to_bps: {} must be positive",
            drop.to_bps
        ));
    }
    if drop.from_bps <= 0.0 {
        errs.push(format!(
            "stimulus.drop.from_bps: {} must be positive",
            drop.from_bps
        ));
    }
    if drop.threshold_bps <= 0.0 {
        errs.push(format!(
            "stimulus.drop.threshold_bps: {} must be positive",
            drop.threshold_bps
        ));
    }
    if let Some(at) = drop.at_secs {
        if at <= 0.0 || at >= duration {
            errs.push(format!(
                "stimulus.drop.at_secs: {at} outside (0, {duration})"
            ));
        }
    }
}
