//! The adaptive sender and receiver state machines: bandwidth estimation,
//! the threshold trigger and order selection, sender-side fade scheduling,
//! receiver jitter buffering, and frame reconstruction.
//!
//! Sender and receiver are independent state machines advanced by one
//! deterministic scheduler in simulation; each is exclusively owned and
//! movable between threads. The receiver-to-sender measurement feedback is
//! modeled as instantaneous and lossless: the scenario runner hands the
//! receiver's latest published estimate straight to the sender's controller.

mod bandwidth;
mod control;
mod fade;
mod jitter;
mod receiver;
mod sender;

pub use bandwidth::{update_bandwidth, BandwidthEstimate, PublishedEstimate};
pub use control::{
    adaptation_tick, select_order, AdaptationConfig, AdaptationState, ControlEvent, OrderSelection,
};
pub use fade::{sender_apply_fade, FadeWindow};
pub use jitter::{InsertOutcome, JitterBuffer, JitterStats, DEFAULT_DEPTH};
pub use receiver::{Receiver, ReconstructedFrame};
pub use sender::{Sender, SenderTick};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("clock regression: now {now} < last {last}")]
    ClockRegression { now: f64, last: f64 },
    #[error(transparent)]
    Wire(#[from] crate::wire::WireError),
    #[error(transparent)]
    Ambi(#[from] crate::ambi::AmbiError),
}
