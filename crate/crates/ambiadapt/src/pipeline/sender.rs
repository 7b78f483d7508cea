//! Sender state machine: one packet per tick, carrying the controller's
//! current order decision, with fades applied to outgoing coefficients.

use super::control::{AdaptationState, ControlEvent};
use super::fade::sender_apply_fade;
use super::BandwidthEstimate;
use super::PipelineError;
use crate::ambi::{truncate_order, AmbisonicFrame};
use crate::wire::{encapsulate, OverflowGuard, PacketFlags, WirePacket};

/// Output of one sender tick.
#[derive(Debug, Clone)]
pub struct SenderTick {
    pub packet: WirePacket,
    pub bytes: Vec<u8>,
    pub events: Vec<ControlEvent>,
    /// Header `order_change` flag value (first packet at a new order).
    pub order_changed: bool,
}

#[derive(Debug)]
pub struct Sender {
    pub state: AdaptationState,
    guard: OverflowGuard,
    next_seq: u16,
    last_sent_order: Option<u32>,
    pub clamped_samples: u64,
}

impl Sender {
    pub fn new(state: AdaptationState) -> Self {
        Self {
            state,
            guard: OverflowGuard::Clamp,
            next_seq: 0,
            last_sent_order: None,
            clamped_samples: 0,
        }
    }

    pub fn with_overflow_guard(mut self, guard: OverflowGuard) -> Self {
        self.guard = guard;
        self
    }

    /// Encode-side step for one frame period: run the controller, apply a
    /// running fade or truncate to the current order, and encapsulate.
    /// `frame` is the scene content at the session's maximum order with
    /// `start_index` equal to this tick's first sample.
    pub fn sender_tick(
        &mut self,
        frame: &AmbisonicFrame,
        estimate: &BandwidthEstimate,
        now_secs: f64,
    ) -> Result<SenderTick, PipelineError> {
        let events = self
            .state
            .adaptation_tick(estimate, now_secs, frame.start_index);

        let (tx_frame, fade_remaining) = if self.state.fade_active {
            let faded = sender_apply_fade(
                frame,
                self.state.pending_order,
                self.state.fade_start_sample(),
                self.state.fade_window(),
            );
            let remaining = self
                .state
                .fade_remaining_at(frame.start_index)
                .min(u16::MAX as u64) as u16;
            (faded, remaining)
        } else {
            (truncate_order(frame, self.state.current_order)?, 0)
        };

        let order_changed = self.last_sent_order != Some(tx_frame.order());
        self.last_sent_order = Some(tx_frame.order());

        let flags = PacketFlags {
            fade_active: self.state.fade_active,
            order_change: order_changed,
        };
        let seq = self.next_seq;
        self.next_seq = self.next_seq.wrapping_add(1);

        let enc = encapsulate(
            &tx_frame,
            self.state.config.bit_depth,
            seq,
            fade_remaining,
            flags,
            self.guard,
        )?;
        self.clamped_samples += enc.clamped_samples;
        let bytes = enc.packet.serialize();
        Ok(SenderTick {
            packet: enc.packet,
            bytes,
            events,
            order_changed,
        })
    }
}
