//! The order-adaptation controller: budget selection against the
//! payload size, a threshold trigger with a clamped rate target, fade
//! scheduling for down-switches, and a hysteresis ladder for recovery.

use super::bandwidth::BandwidthEstimate;
use super::fade::FadeWindow;
use crate::wire::{payload_size, WireError, HEADER_LEN};

/// Result of the budget enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderSelection {
    pub order: u32,
    /// Set when even order 0 exceeds the budget; the stream stays at order
    /// 0 rather than muting.
    pub starved: bool,
}

/// Largest order in `[0, max_order]` whose payload fits the per-packet
/// budget `r_max * packet_interval`.
pub fn select_order(
    r_max_bps: f64,
    packet_interval_secs: f64,
    bit_depth: u8,
    frame_length: u16,
    max_order: u32,
) -> Result<OrderSelection, WireError> {
    let budget_bits = r_max_bps * packet_interval_secs;
    let mut best = None;
    for order in 0..=max_order {
        if payload_size(order, bit_depth, frame_length)? as f64 <= budget_bits {
            best = Some(order);
        } else {
            break;
        }
    }
    Ok(match best {
        Some(order) => OrderSelection {
            order,
            starved: false,
        },
        None => OrderSelection {
            order: 0,
            starved: true,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationConfig {
    pub max_order: u32,
    /// Trigger threshold, bits/second. Doubles as the floor of the rate
    /// target, so the landing order under saturation is a pure function
    /// of configuration.
    pub threshold_bps: f64,
    /// How long the estimate must stay clean before each one-step
    /// up-switch.
    pub hysteresis_hold_secs: f64,
    /// Cross-fade duration for down-switches; 0 switches on the next
    /// packet.
    pub fade_secs: f64,
    /// The estimator's `T_R`, used to blank decisions right after an
    /// up-switch while published windows still describe the old order.
    pub estimate_window_secs: f64,
    pub bit_depth: u8,
    pub frame_length: u16,
    pub sample_rate: u32,
}

impl AdaptationConfig {
    pub fn packet_interval_secs(&self) -> f64 {
        self.frame_length as f64 / self.sample_rate as f64
    }

    /// Offered wire rate (header + payload) at `order`.
    pub fn offered_bps(&self, order: u32) -> f64 {
        let payload_bits =
            payload_size(order, self.bit_depth, self.frame_length).expect("validated depth");
        (payload_bits + (HEADER_LEN as u64) * 8) as f64 / self.packet_interval_secs()
    }
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        Self {
            max_order: 3,
            threshold_bps: 2_000_000.0,
            hysteresis_hold_secs: 2.0,
            fade_secs: 0.0,
            estimate_window_secs: 0.1,
            bit_depth: 16,
            frame_length: 128,
            sample_rate: 48_000,
        }
    }
}

/// Controller events, in decision order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlEvent {
    /// The transmitted order changed (fade completion, instantaneous
    /// down-switch, or recovery step).
    OrderChanged {
        from: u32,
        to: u32,
    },
    FadeStarted {
        target: u32,
        at_sample: u64,
    },
    FadeCompleted {
        order: u32,
    },
}

#[derive(Debug, Clone)]
pub struct AdaptationState {
    pub config: AdaptationConfig,
    pub current_order: u32,
    /// Landing order of the running fade; equals `current_order` when idle.
    pub pending_order: u32,
    pub fade_active: bool,
    fade_start_sample: u64,
    fade_window: FadeWindow,
    /// Latest rate target the budget selection ran against.
    pub r_max_bps: f64,
    /// Windows in which the budget could not fit even order 0.
    pub starvation_count: u64,
    up_eligible_since: Option<f64>,
    /// Trigger decisions are suspended until this time after an up-switch,
    /// so a probe is not killed by windows measured at the previous order.
    decision_blackout_until: f64,
}

impl AdaptationState {
    pub fn new(config: AdaptationConfig) -> Self {
        Self {
            current_order: config.max_order,
            pending_order: config.max_order,
            fade_active: false,
            fade_start_sample: 0,
            fade_window: FadeWindow::new(config.fade_secs, config.sample_rate),
            r_max_bps: 0.0,
            starvation_count: 0,
            up_eligible_since: None,
            decision_blackout_until: 0.0,
            config,
        }
    }

    pub fn fade_window(&self) -> &FadeWindow {
        &self.fade_window
    }

    pub fn fade_start_sample(&self) -> u64 {
        self.fade_start_sample
    }

    /// Samples until the running fade completes, measured at `now_sample`;
    /// 0 when no fade is active.
    pub fn fade_remaining_at(&self, now_sample: u64) -> u64 {
        if !self.fade_active {
            return 0;
        }
        (self.fade_start_sample + self.fade_window.duration_samples()).saturating_sub(now_sample)
    }

    /// One controller step; see [`adaptation_tick`].
    pub fn adaptation_tick(
        &mut self,
        est: &BandwidthEstimate,
        now_secs: f64,
        now_sample: u64,
    ) -> Vec<ControlEvent> {
        let mut events = Vec::new();

        // Fade completion first, so the frame starting at the fade end is
        // the first truncated one.
        if self.fade_active
            && now_sample >= self.fade_start_sample + self.fade_window.duration_samples()
        {
            self.fade_active = false;
            events.push(ControlEvent::FadeCompleted {
                order: self.pending_order,
            });
            events.push(ControlEvent::OrderChanged {
                from: self.current_order,
                to: self.pending_order,
            });
            self.current_order = self.pending_order;
        }

        if !est.has_estimate() || now_secs < self.decision_blackout_until {
            return events;
        }
        let c_a = est.estimate_bps();
        let cfg = self.config;

        if c_a < cfg.threshold_bps {
            // rate target, floored at the threshold
            self.r_max_bps = c_a.max(cfg.threshold_bps);
            let selection = select_order(
                self.r_max_bps,
                cfg.packet_interval_secs(),
                cfg.bit_depth,
                cfg.frame_length,
                cfg.max_order,
            )
            .expect("config bit depth validated");
            if selection.starved {
                self.starvation_count += 1;
            }
            let target = selection.order;

            if self.fade_active {
                // Retarget a running fade downward; never upward.
                if target < self.pending_order {
                    self.pending_order = target;
                }
                self.up_eligible_since = None;
            } else if target < self.current_order {
                self.up_eligible_since = None;
                if cfg.fade_secs > 0.0 {
                    self.fade_active = true;
                    self.pending_order = target;
                    self.fade_start_sample = now_sample;
                    events.push(ControlEvent::FadeStarted {
                        target,
                        at_sample: now_sample,
                    });
                } else {
                    events.push(ControlEvent::OrderChanged {
                        from: self.current_order,
                        to: target,
                    });
                    self.current_order = target;
                    self.pending_order = target;
                }
                return events;
            }
        }

        // Recovery ladder: a window is clean when the estimate clears the
        // threshold, or when it accounts for (95% of) everything the sender
        // offered — delivered bits can never exceed the offered stream, so
        // a small clean stream must not read as congestion.
        let clean = c_a >= cfg.threshold_bps || c_a >= 0.95 * cfg.offered_bps(self.current_order);
        if self.fade_active || self.current_order >= cfg.max_order || !clean {
            if !clean {
                self.up_eligible_since = None;
            }
            return events;
        }
        match self.up_eligible_since {
            None => self.up_eligible_since = Some(now_secs),
            Some(since) => {
                if now_secs - since >= cfg.hysteresis_hold_secs {
                    events.push(ControlEvent::OrderChanged {
                        from: self.current_order,
                        to: self.current_order + 1,
                    });
                    self.current_order += 1;
                    self.pending_order = self.current_order;
                    // next step needs its own hold period, and published
                    // windows need time to cover the new order's traffic
                    self.up_eligible_since = Some(now_secs);
                    self.decision_blackout_until = now_secs + 3.0 * cfg.estimate_window_secs;
                }
            }
        }
        events
    }
}

/// Free-function spelling of [`AdaptationState::adaptation_tick`]: decides
/// the target order from the latest estimate and schedules fades
/// (down-switches) or single-step recoveries (up-switches).
pub fn adaptation_tick(
    state: &mut AdaptationState,
    est: &BandwidthEstimate,
    now_secs: f64,
    now_sample: u64,
) -> Vec<ControlEvent> {
    state.adaptation_tick(est, now_secs, now_sample)
}
