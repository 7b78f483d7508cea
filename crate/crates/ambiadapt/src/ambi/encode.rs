//! Encoding capsule pressures and synthetic plane-wave sources into
//! Ambisonics frames, plus order truncation and the high-order residual.

use super::sh::sh_basis;
use super::{AmbiError, AmbisonicFrame, CapsuleArray, SourceSignal};

/// Project capsule pressures onto the SH basis:
/// `alpha_{n,m}[t] = sum_q w_q p[q][t] Y_{n,m}(dir_q)` (unit per-order gain;
/// open-array idealization, no radial filters).
///
/// `pressures` is channel-major: capsule q's samples at
/// `pressures[q*frame_length .. (q+1)*frame_length]`.
pub fn encode_capsules(
    pressures: &[f64],
    frame_length: usize,
    array: &CapsuleArray,
    order: u32,
    sample_rate: u32,
    start_index: u64,
) -> Result<AmbisonicFrame, AmbiError> {
    if order > array.order_limit() {
        return Err(AmbiError::OrderTooHigh {
            requested: order,
            limit: array.order_limit(),
        });
    }
    if pressures.len() != array.len() * frame_length {
        return Err(AmbiError::ShapeMismatch {
            context: format!(
                "pressures: expected {} capsules x {} samples = {}, got {}",
                array.len(),
                frame_length,
                array.len() * frame_length,
                pressures.len()
            ),
        });
    }

    let mut frame = AmbisonicFrame::zeros(order, frame_length, sample_rate, start_index);
    for (q, (dir, w)) in array.directions().iter().zip(array.weights()).enumerate() {
        let basis = sh_basis(order, dir.colatitude, dir.azimuth);
        let row = &pressures[q * frame_length..(q + 1) * frame_length];
        for (c, y) in basis.iter().enumerate() {
            let gain = w * y;
            let ch = frame.channel_mut(c);
            for (o, p) in ch.iter_mut().zip(row) {
                *o += gain * p;
            }
        }
    }
    Ok(frame)
}

/// Synthetic reference encoder: channel `acn(n,m)` sample `i` is
/// `source[t_k + i] * Y_{n,m}(trajectory(t_k + i))`. The trajectory is
/// evaluated per sample, so moving sources sweep smoothly.
pub fn encode_plane_wave(
    source: &SourceSignal,
    order: u32,
    start_index: u64,
    frame_length: usize,
) -> Result<AmbisonicFrame, AmbiError> {
    let end = start_index as usize + frame_length;
    if end > source.samples.len() {
        return Err(AmbiError::WindowOutOfRange {
            start: start_index,
            len: frame_length,
            source_len: source.samples.len(),
        });
    }

    let mut frame = AmbisonicFrame::zeros(order, frame_length, source.sample_rate, start_index);
    let channels = frame.channel_count();
    for i in 0..frame_length {
        let t = start_index + i as u64;
        let sample = source.samples[t as usize];
        let dir = source.direction_at(t);
        let basis = sh_basis(order, dir.colatitude, dir.azimuth);
        for (c, y) in basis.iter().enumerate().take(channels) {
            frame.channel_mut(c)[i] = sample * y;
        }
    }
    Ok(frame)
}

/// Keep the first `(new_order+1)^2` channels unchanged; no resampling, no
/// gain change.
pub fn truncate_order(frame: &AmbisonicFrame, new_order: u32) -> Result<AmbisonicFrame, AmbiError> {
    if new_order > frame.order() {
        return Err(AmbiError::OrderTooHigh {
            requested: new_order,
            limit: frame.order(),
        });
    }
    let channels = ((new_order + 1) * (new_order + 1)) as usize;
    let samples = frame.raw()[..channels * frame.frame_length()].to_vec();
    AmbisonicFrame::from_samples(
        new_order,
        frame.frame_length(),
        frame.sample_rate,
        frame.start_index,
        samples,
    )
}

/// The part removed by truncation: channels at or below `low_order` zeroed,
/// channels above copied. Frame order preserved, so
/// `zero_pad(truncate(F, N')) + high_order_residual(F, N') == F` bit-exact.
pub fn high_order_residual(
    frame: &AmbisonicFrame,
    low_order: u32,
) -> Result<AmbisonicFrame, AmbiError> {
    if low_order > frame.order() {
        return Err(AmbiError::OrderTooHigh {
            requested: low_order,
            limit: frame.order(),
        });
    }
    let keep_from = ((low_order + 1) * (low_order + 1)) as usize;
    let mut out = frame.clone();
    for c in 0..keep_from {
        out.channel_mut(c).fill(0.0);
    }
    Ok(out)
}
