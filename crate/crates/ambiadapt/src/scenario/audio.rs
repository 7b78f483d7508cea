//! Multichannel PCM WAV input/output.
//!
//! Samples cross this boundary as f64 in [-1, 1] and are quantized with the
//! same round-half-away-from-zero rule as the wire format, so values coming
//! off the receive path (already on the PCM grid) re-encode losslessly and
//! output files are bit-stable across runs.

use std::path::Path;

use super::ScenarioError;

/// Write channel-major samples as an interleaved PCM WAV at `bit_depth`
/// (16, 24, or 32). All channels must have equal length.
pub fn write_wav(
    path: &Path,
    channels: &[Vec<f64>],
    sample_rate: u32,
    bit_depth: u8,
) -> Result<(), ScenarioError> {
    if channels.is_empty() {
        return Err(ScenarioError::Audio("no channels to write".into()));
    }
    let len = channels[0].len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(ScenarioError::Audio("channel lengths differ".into()));
    }
    if !matches!(bit_depth, 16 | 24 | 32) {
        return Err(ScenarioError::Audio(format!(
            "unsupported bit depth {bit_depth}"
        )));
    }

    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: bit_depth as u16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer =
        hound::WavWriter::create(path, spec).map_err(|e| ScenarioError::Audio(e.to_string()))?;
    let full_scale = (1u64 << (bit_depth - 1)) as f64;
    let max_code = (1i64 << (bit_depth - 1)) - 1;
    let min_code = -(1i64 << (bit_depth - 1));
    for i in 0..len {
        for ch in channels {
            let scaled = ch[i] * full_scale;
            let rounded = if scaled >= 0.0 {
                (scaled + 0.5).floor()
            } else {
                (scaled - 0.5).ceil()
            } as i64;
            let code = rounded.clamp(min_code, max_code);
            writer
                .write_sample(code as i32)
                .map_err(|e| ScenarioError::Audio(e.to_string()))?;
        }
    }
    writer
        .finalize()
        .map_err(|e| ScenarioError::Audio(e.to_string()))
}

/// Read an integer-PCM WAV into channel-major f64 samples in [-1, 1).
pub fn read_wav(path: &Path) -> Result<(Vec<Vec<f64>>, u32, u8), ScenarioError> {
    let mut reader = hound::WavReader::open(path)
        .map_err(|e| ScenarioError::Audio(format!("{}: {}", path.display(), e)))?;
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int {
        return Err(ScenarioError::Audio(format!(
            "{}: float WAV not supported",
            path.display()
        )));
    }
    let bit_depth = spec.bits_per_sample as u8;
    if !matches!(bit_depth, 16 | 24 | 32) {
        return Err(ScenarioError::Audio(format!(
            "{}: unsupported bit depth {bit_depth}",
            path.display()
        )));
    }
    let full_scale = (1u64 << (bit_depth - 1)) as f64;
    let n_channels = spec.channels as usize;
    let mut channels = vec![Vec::new(); n_channels];
    for (i, sample) in reader.samples::<i32>().enumerate() {
        let code = sample.map_err(|e| ScenarioError::Audio(e.to_string()))?;
        channels[i % n_channels].push(code as f64 / full_scale);
    }
    Ok((channels, spec.sample_rate, bit_depth))
}
