//! Receiver state machine: parse incoming bytes, feed the bandwidth
//! estimator, buffer frames by sequence, and reconstruct a constant-shape
//! frame stream for the decoder.

use super::bandwidth::{BandwidthEstimate, PublishedEstimate};
use super::jitter::{InsertOutcome, JitterBuffer};
use super::PipelineError;
use crate::ambi::AmbisonicFrame;
use crate::wire::{dequantize, parse_packet, PacketHeader};

/// One playout step: the frame (zero-padded to the session order so the
/// decoder shape never changes) plus what happened.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedFrame {
    pub sequence: u64,
    pub frame: AmbisonicFrame,
    pub concealed: bool,
}

#[derive(Debug)]
pub struct Receiver {
    pub buffer: JitterBuffer,
    pub estimator: BandwidthEstimate,
    session_order: u32,
    sample_rate: u32,
    frame_length: usize,
    pub malformed_packets: u64,
    /// Headers of parsed packets, newest last (order/fade metadata for
    /// traces).
    last_header: Option<PacketHeader>,
}

impl Receiver {
    pub fn new(
        session_order: u32,
        sample_rate: u32,
        frame_length: usize,
        buffer_depth: usize,
        estimate_window_secs: f64,
    ) -> Self {
        Self {
            buffer: JitterBuffer::new(buffer_depth),
            estimator: BandwidthEstimate::new(estimate_window_secs),
            session_order,
            sample_rate,
            frame_length,
            malformed_packets: 0,
            last_header: None,
        }
    }

    pub fn session_order(&self) -> u32 {
        self.session_order
    }

    pub fn last_header(&self) -> Option<&PacketHeader> {
        self.last_header.as_ref()
    }

    /// Ingest one delivered datagram at `now`. Malformed packets are
    /// counted, never fatal. Returns the bandwidth estimates the arrival
    /// published, plus what the jitter buffer did with the frame.
    pub fn ingest(
        &mut self,
        bytes: &[u8],
        now: f64,
    ) -> Result<(Vec<PublishedEstimate>, Option<InsertOutcome>), PipelineError> {
        // The received load counts everything that arrived, parsed or not.
        let published = self
            .estimator
            .update_bandwidth(bytes.len() as u64 * 8, now)?;
        let packet = match parse_packet(bytes) {
            Ok(p) => p,
            Err(_) => {
                self.malformed_packets += 1;
                return Ok((published, None));
            }
        };
        let frame = dequantize(&packet, self.sample_rate);
        let outcome = self.buffer.insert(packet.header.sequence, frame);
        self.last_header = Some(packet.header);
        Ok((published, Some(outcome)))
    }

    /// Advance the estimator clock without an arrival (idle windows must
    /// still publish).
    pub fn advance_clock(&mut self, now: f64) -> Result<Vec<PublishedEstimate>, PipelineError> {
        self.estimator.advance(now)
    }

    /// Pop the next playout frame. A missing frame is concealed as zeros
    /// (one conceal event); present frames pass through as sent — during a
    /// fade the attenuation is already embedded in the coefficients — and
    /// are zero-padded up to the session order.
    pub fn receiver_reconstruct(&mut self) -> ReconstructedFrame {
        let (sequence, slot) = self.buffer.pop_next();
        match slot {
            Some(frame) => ReconstructedFrame {
                sequence,
                frame: frame.zero_padded(self.session_order),
                concealed: false,
            },
            None => ReconstructedFrame {
                sequence,
                frame: AmbisonicFrame::zeros(
                    self.session_order,
                    self.frame_length,
                    self.sample_rate,
                    sequence * self.frame_length as u64,
                ),
                concealed: true,
            },
        }
    }
}
