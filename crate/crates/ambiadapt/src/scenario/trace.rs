//! The simulation event trace and its byte-stable CSV form.

use std::io::Write;

use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    PacketSent,
    PacketLost,
    OrderChanged,
    FadeStarted,
    FadeCompleted,
    Conceal,
    BandwidthEstimate,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::PacketSent => "packet_sent",
            TraceEvent::PacketLost => "packet_lost",
            TraceEvent::OrderChanged => "order_changed",
            TraceEvent::FadeStarted => "fade_started",
            TraceEvent::FadeCompleted => "fade_completed",
            TraceEvent::Conceal => "conceal",
            TraceEvent::BandwidthEstimate => "bandwidth_estimate",
        }
    }
}

/// One trace row. Fields that do not apply to an event stay `None` and
/// serialize as empty CSV cells; everything else is integral, so the byte
/// form is identical across platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    pub time_ns: u64,
    pub event: TraceEvent,
    pub seq: Option<u64>,
    pub order: Option<u8>,
    pub bandwidth_bps: Option<u64>,
    pub queue_bytes: Option<u64>,
}

pub const TRACE_HEADER: &str = "time_ns,event,seq,order,bandwidth_bps,queue_bytes";

fn cell<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write rows (already time-ordered) under the fixed header.
pub fn write_trace<W: Write>(rows: &[TraceRow], mut w: W) -> Result<(), ScenarioError> {
    writeln!(w, "{TRACE_HEADER}").map_err(ScenarioError::Io)?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.time_ns,
            row.event.as_str(),
            cell(row.seq),
            cell(row.order),
            cell(row.bandwidth_bps),
            cell(row.queue_bytes),
        )
        .map_err(ScenarioError::Io)?;
    }
    Ok(())
}
