//! Receiver-side bandwidth estimation: bits accumulated over fixed windows
//! of `T_R` seconds, published as `C_A = L_R / T_R` at each window close.

use std::collections::VecDeque;

use super::PipelineError;

/// How many published estimates the history ring keeps.
const HISTORY_LEN: usize = 32;

#[derive(Debug, Clone)]
pub struct BandwidthEstimate {
    window_secs: f64,
    window_start: f64,
    accumulated_bits: u64,
    estimate_bps: f64,
    has_estimate: bool,
    history: VecDeque<f64>,
    last_now: f64,
}

/// One window-close record: the estimate and when it was published.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedEstimate {
    pub window_end: f64,
    pub bps: f64,
}

impl BandwidthEstimate {
    pub fn new(window_secs: f64) -> Self {
        Self {
            window_secs,
            window_start: 0.0,
            accumulated_bits: 0,
            estimate_bps: 0.0,
            has_estimate: false,
            history: VecDeque::new(),
            last_now: 0.0,
        }
    }

    /// A frozen estimate that never updates; used when the controller is
    /// driven by a scripted bandwidth schedule instead of measurements.
    pub fn scripted(bps: f64) -> Self {
        let mut est = Self::new(f64::INFINITY);
        est.estimate_bps = bps;
        est.has_estimate = true;
        est
    }

    pub fn window_secs(&self) -> f64 {
        self.window_secs
    }

    /// Latest published `C_A`, bits/second.
    pub fn estimate_bps(&self) -> f64 {
        self.estimate_bps
    }

    /// False until the first window has completed.
    pub fn has_estimate(&self) -> bool {
        self.has_estimate
    }

    pub fn history(&self) -> impl Iterator<Item = f64> + '_ {
        self.history.iter().copied()
    }

    /// Advance the window clock to `now`, publishing one estimate per
    /// completed window (idle windows publish 0).
    pub fn advance(&mut self, now: f64) -> Result<Vec<PublishedEstimate>, PipelineError> {
        if now < self.last_now {
            return Err(PipelineError::ClockRegression {
                now,
                last: self.last_now,
            });
        }
        self.last_now = now;
        let mut published = Vec::new();
        while now >= self.window_start + self.window_secs {
            let bps = self.accumulated_bits as f64 / self.window_secs;
            self.estimate_bps = bps;
            self.has_estimate = true;
            self.accumulated_bits = 0;
            self.window_start += self.window_secs;
            if self.history.len() == HISTORY_LEN {
                self.history.pop_front();
            }
            self.history.push_back(bps);
            published.push(PublishedEstimate {
                window_end: self.window_start,
                bps,
            });
        }
        Ok(published)
    }

    /// Record `bits` received at `now`, closing any windows that ended
    /// before it.
    pub fn update_bandwidth(
        &mut self,
        bits: u64,
        now: f64,
    ) -> Result<Vec<PublishedEstimate>, PipelineError> {
        let published = self.advance(now)?;
        self.accumulated_bits += bits;
        Ok(published)
    }
}

/// Free-function spelling of [`BandwidthEstimate::update_bandwidth`].
pub fn update_bandwidth(
    est: &mut BandwidthEstimate,
    bits: u64,
    now: f64,
) -> Result<Vec<PublishedEstimate>, PipelineError> {
    est.update_bandwidth(bits, now)
}
