//! Builtin deterministic test signals and the WAV source loader.

use super::audio;
use super::config::SignalSpec;
use super::ScenarioError;
use crate::rng::SplitMix64;

/// Render a signal spec to `length` mono samples at `sample_rate`. Builtin
/// signals are pure functions of (spec, seed), so scenes rebuild
/// bit-identically.
pub fn render_signal(
    spec: &SignalSpec,
    length: usize,
    sample_rate: u32,
    rng: &mut SplitMix64,
) -> Result<Vec<f64>, ScenarioError> {
    match spec {
        SignalSpec::Sine {
            frequency_hz,
            amplitude,
        } => {
            let step = std::f64::consts::TAU * frequency_hz / sample_rate as f64;
            Ok((0..length)
                .map(|i| amplitude * (step * i as f64).sin())
                .collect())
        }
        SignalSpec::NoiseBurst {
            amplitude,
            burst_secs,
            gap_secs,
        } => Ok(noise_bursts(
            *amplitude,
            *burst_secs,
            *gap_secs,
            length,
            sample_rate,
            rng,
        )),
        SignalSpec::Sweep {
            start_hz,
            end_hz,
            amplitude,
        } => Ok(exponential_sweep(
            *start_hz,
            *end_hz,
            *amplitude,
            length,
            sample_rate,
        )),
        SignalSpec::File { path, gain } => {
            let (channels, file_rate, _depth) = audio::read_wav(path)?;
            if file_rate != sample_rate {
                return Err(ScenarioError::Config(format!(
                    "{}: sample rate {} does not match the scene rate {}",
                    path.display(),
                    file_rate,
                    sample_rate
                )));
            }
            let first = channels
                .into_iter()
                .next()
                .ok_or_else(|| ScenarioError::Config(format!("{}: no channels", path.display())))?;
            let mut out: Vec<f64> = first.iter().map(|s| s * gain).collect();
            out.resize(length, 0.0);
            Ok(out)
        }
    }
}

/// White noise through a 4-tap moving average, gated into bursts with 5 ms
/// raised-cosine edges.
fn noise_bursts(
    amplitude: f64,
    burst_secs: f64,
    gap_secs: f64,
    length: usize,
    sample_rate: u32,
    rng: &mut SplitMix64,
) -> Vec<f64> {
    let burst = (burst_secs * sample_rate as f64).round().max(1.0) as usize;
    let gap = (gap_secs * sample_rate as f64).round().max(0.0) as usize;
    let period = burst + gap;
    let edge = ((0.005 * sample_rate as f64) as usize)
        .min(burst / 2)
        .max(1);

    let mut taps = [0.0; 4];
    let mut out = Vec::with_capacity(length);
    for i in 0..length {
        let white = 2.0 * rng.next_f64() - 1.0;
        taps.rotate_right(1);
        taps[0] = white;
        let smoothed = taps.iter().sum::<f64>() / 4.0;

        let pos = if period == 0 { 0 } else { i % period };
        let gate = if pos >= burst {
            0.0
        } else if pos < edge {
            0.5 * (1.0 - (std::f64::consts::PI * pos as f64 / edge as f64).cos())
        } else if pos >= burst - edge {
            let k = burst - pos;
            0.5 * (1.0 - (std::f64::consts::PI * k as f64 / edge as f64).cos())
        } else {
            1.0
        };
        out.push(amplitude * smoothed * gate);
    }
    out
}

fn exponential_sweep(
    start_hz: f64,
    end_hz: f64,
    amplitude: f64,
    length: usize,
    sample_rate: u32,
) -> Vec<f64> {
    let duration = length as f64 / sample_rate as f64;
    let ratio = (end_hz / start_hz).ln();
    (0..length)
        .map(|i| {
            let t = i as f64 / sample_rate as f64;
            let phase = if ratio.abs() < 1e-12 {
                std::f64::consts::TAU * start_hz * t
            } else {
                std::f64::consts::TAU * start_hz * duration / ratio
                    * ((t / duration * ratio).exp() - 1.0)
            };
            amplitude * phase.sin()
        })
        .collect()
}
