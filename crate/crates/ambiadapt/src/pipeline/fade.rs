//! The raised-cosine fade-out window and its application to the channels
//! being removed by an order down-switch.

use crate::ambi::AmbisonicFrame;

/// Raised-cosine fade from 1 to 0 over a fixed number of samples:
/// `w(t) = (1 + cos(pi t / T)) / 2`. Continuous, monotone non-increasing,
/// `w(0) = 1`, `w(T) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadeWindow {
    duration_samples: u64,
}

impl FadeWindow {
    pub fn new(duration_secs: f64, sample_rate: u32) -> Self {
        Self {
            duration_samples: (duration_secs * sample_rate as f64).round() as u64,
        }
    }

    pub fn duration_samples(&self) -> u64 {
        self.duration_samples
    }

    /// `w` at `offset` samples past the fade start; clamps to 1 before the
    /// start and 0 at or past the end.
    pub fn value_at(&self, offset_samples: i64) -> f64 {
        if offset_samples <= 0 {
            return 1.0;
        }
        if offset_samples as u64 >= self.duration_samples {
            return 0.0;
        }
        let phase = offset_samples as f64 / self.duration_samples as f64;
        0.5 * (1.0 + (std::f64::consts::PI * phase).cos())
    }
}

/// Scale the channels above `pending_order` per-sample by the fade value at
/// each sample's offset from `fade_start_sample`; channels at or below
/// `pending_order` pass through untouched.
pub fn sender_apply_fade(
    frame: &AmbisonicFrame,
    pending_order: u32,
    fade_start_sample: u64,
    window: &FadeWindow,
) -> AmbisonicFrame {
    let keep = ((pending_order + 1) * (pending_order + 1)) as usize;
    let mut out = frame.clone();
    let len = frame.frame_length();
    let mut gains = Vec::with_capacity(len);
    for i in 0..len {
        let offset = (frame.start_index + i as u64) as i64 - fade_start_sample as i64;
        gains.push(window.value_at(offset));
    }
    for c in keep..frame.channel_count() {
        for (s, g) in out.channel_mut(c).iter_mut().zip(&gains) {
            *s *= g;
        }
    }
    out
}
