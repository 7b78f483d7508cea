//! Sequence-ordered playout buffer. Slots are keyed by an extended (64-bit)
//! sequence number recovered from the wrapping 16-bit wire field with
//! standard serial-number arithmetic; pops advance strictly monotonically
//! and a sequence that never arrived yields exactly one concealed frame.

use std::collections::BTreeMap;

use crate::ambi::AmbisonicFrame;

pub const DEFAULT_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    Stored,
    /// Same extended sequence already buffered or already played.
    Duplicate,
    /// Arrived after its playout slot was already popped.
    Late,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JitterStats {
    pub stored: u64,
    pub duplicates: u64,
    pub late: u64,
    pub concealed: u64,
    pub popped: u64,
}

#[derive(Debug)]
pub struct JitterBuffer {
    depth: usize,
    slots: BTreeMap<u64, AmbisonicFrame>,
    /// Highest extended sequence seen, for unwrapping.
    highest_seen: Option<u64>,
    next_playout: u64,
    pub stats: JitterStats,
}

impl JitterBuffer {
    pub fn new(depth: usize) -> Self {
        Self {
            depth,
            slots: BTreeMap::new(),
            highest_seen: None,
            next_playout: 0,
            stats: JitterStats::default(),
        }
    }

    /// Nominal buffering depth in frames; the playout schedule (not the
    /// buffer itself) enforces it by lagging arrivals this many frames.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn next_playout_seq(&self) -> u64 {
        self.next_playout
    }

    pub fn buffered(&self) -> usize {
        self.slots.len()
    }

    /// Recover the extended sequence nearest to the highest seen.
    fn extend_seq(&self, seq: u16) -> u64 {
        match self.highest_seen {
            None => seq as u64,
            Some(high) => {
                let delta = seq.wrapping_sub(high as u16) as i16 as i64;
                (high as i64 + delta).max(0) as u64
            }
        }
    }

    pub fn insert(&mut self, seq: u16, frame: AmbisonicFrame) -> InsertOutcome {
        let ext = self.extend_seq(seq);
        if ext < self.next_playout {
            self.stats.late += 1;
            return InsertOutcome::Late;
        }
        if self.slots.contains_key(&ext) {
            self.stats.duplicates += 1;
            return InsertOutcome::Duplicate;
        }
        self.highest_seen = Some(self.highest_seen.map_or(ext, |h| h.max(ext)));
        self.slots.insert(ext, frame);
        self.stats.stored += 1;
        InsertOutcome::Stored
    }

    /// Pop the frame for the next playout sequence; `None` when it never
    /// arrived (a conceal event, counted once).
    pub fn pop_next(&mut self) -> (u64, Option<AmbisonicFrame>) {
        let seq = self.next_playout;
        self.next_playout += 1;
        self.stats.popped += 1;
        match self.slots.remove(&seq) {
            Some(frame) => (seq, Some(frame)),
            None => {
                self.stats.concealed += 1;
                (seq, None)
            }
        }
    }
}
