//! Bit-exact serialization of Ambisonics frames into RTP-like packets.
//!
//! Layout (everything big-endian, documented byte-by-byte in
//! `docs/wire-format.md`):
//!
//! ```text
//! offset  size  field
//! 0       2     magic 0x48 0x41 ("HA")
//! 2       1     version (1)
//! 3       1     flags: bit0 fade_active, bit1 order_change,
//!               bits 2-7 reserved for error-correction signaling (0 in v1)
//! 4       2     sequence number (wrapping)
//! 6       4     timestamp: absolute index of the frame's first sample
//! 10      1     Ambisonics order of the payload (<= 15)
//! 11      1     bit depth (16, 24, or 32)
//! 12      2     frame length in samples
//! 14      2     fade_remaining: samples until the running fade completes
//! 16      -     payload: signed PCM coefficients, channel-major (all
//!               samples of ACN channel 0, then channel 1, ...); 24-bit
//!               samples packed as 3 bytes, no padding
//! ```

use thiserror::Error;

use crate::ambi::AmbisonicFrame;

pub const MAGIC: [u8; 2] = [0x48, 0x41];
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum WireError {
    #[error("unsupported bit depth {0} (expected 16, 24, or 32)")]
    UnsupportedBitDepth(u8),
    #[error("order {0} exceeds the wire maximum 15")]
    OrderTooHigh(u32),
    #[error("frame length {0} does not fit the 16-bit header field")]
    FrameTooLong(usize),
    #[error("sample {value} at channel {channel} exceeds full scale")]
    SampleOverflow { channel: usize, value: f64 },
    #[error("packet truncated: {got} bytes, need at least {need}")]
    Truncated { got: usize, need: usize },
    #[error("bad magic {0:02x?}")]
    BadMagic([u8; 2]),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("reserved flag bits set: {0:#04x}")]
    ReservedFlags(u8),
    #[error("payload length {got} does not match header ({want} bytes for order {order})")]
    LengthMismatch { got: usize, want: usize, order: u8 },
}

/// Payload size in bits for a frame at `order`, per-coefficient depth
/// `bit_depth`, and `frame_length` samples. Written as the full
/// order/degree double sum so per-channel depths can slot in without a
/// format change; v1 allocates a uniform depth.
pub fn payload_size(order: u32, bit_depth: u8, frame_length: u16) -> Result<u64, WireError> {
    check_bit_depth(bit_depth)?;
    let mut bits = 0u64;
    for n in 0..=order {
        for _m in -(n as i64)..=n as i64 {
            bits += bit_depth as u64 * frame_length as u64;
        }
    }
    Ok(bits)
}

fn check_bit_depth(bit_depth: u8) -> Result<(), WireError> {
    match bit_depth {
        16 | 24 | 32 => Ok(()),
        other => Err(WireError::UnsupportedBitDepth(other)),
    }
}

/// What to do with samples outside `[-1, 1]` during quantization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverflowGuard {
    /// Clamp at full scale and count the clamps (the default).
    #[default]
    Clamp,
    /// Refuse the frame.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PacketFlags {
    pub fade_active: bool,
    pub order_change: bool,
}

impl PacketFlags {
    fn to_byte(self) -> u8 {
        (self.fade_active as u8) | ((self.order_change as u8) << 1)
    }

    fn from_byte(b: u8) -> Result<Self, WireError> {
        if b & 0xFC != 0 {
            return Err(WireError::ReservedFlags(b));
        }
        Ok(Self {
            fade_active: b & 0x01 != 0,
            order_change: b & 0x02 != 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketHeader {
    pub flags: PacketFlags,
    pub sequence: u16,
    /// Absolute sample index of the frame start.
    pub timestamp: u32,
    pub order: u8,
    pub bit_depth: u8,
    pub frame_length: u16,
    /// Samples until the running fade completes; 0 when no fade.
    pub fade_remaining: u16,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WirePacket {
    pub header: PacketHeader,
    /// Quantized coefficients, channel-major.
    pub payload: Vec<u8>,
}

/// Result of encapsulation: the packet plus how many samples the overflow
/// guard clamped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encapsulated {
    pub packet: WirePacket,
    pub clamped_samples: u64,
}

/// Quantize a frame to signed PCM (round half away from zero, clamp at full
/// scale) and wrap it with a header. Deterministic byte output.
pub fn encapsulate(
    frame: &AmbisonicFrame,
    bit_depth: u8,
    sequence: u16,
    fade_remaining: u16,
    flags: PacketFlags,
    guard: OverflowGuard,
) -> Result<Encapsulated, WireError> {
    check_bit_depth(bit_depth)?;
    if frame.order() > 15 {
        return Err(WireError::OrderTooHigh(frame.order()));
    }
    if frame.frame_length() > u16::MAX as usize {
        return Err(WireError::FrameTooLong(frame.frame_length()));
    }

    let header = PacketHeader {
        flags,
        sequence,
        timestamp: frame.start_index as u32,
        order: frame.order() as u8,
        bit_depth,
        frame_length: frame.frame_length() as u16,
        fade_remaining,
    };

    let bytes_per_sample = bit_depth as usize / 8;
    let mut payload =
        Vec::with_capacity(frame.channel_count() * frame.frame_length() * bytes_per_sample);
    let full_scale = (1u64 << (bit_depth - 1)) as f64;
    let max_code = (1i64 << (bit_depth - 1)) - 1;
    let min_code = -(1i64 << (bit_depth - 1));
    let mut clamped = 0u64;

    for c in 0..frame.channel_count() {
        for &sample in frame.channel(c) {
            if sample.abs() > 1.0 && guard == OverflowGuard::Error {
                return Err(WireError::SampleOverflow {
                    channel: c,
                    value: sample,
                });
            }
            // round half away from zero
            let scaled = sample * full_scale;
            let rounded = if scaled >= 0.0 {
                (scaled + 0.5).floor()
            } else {
                (scaled - 0.5).ceil()
            } as i64;
            let code = if rounded > max_code {
                clamped += 1;
                max_code
            } else if rounded < min_code {
                clamped += 1;
                min_code
            } else {
                rounded
            };
            let raw = (code as u64) & ((1u64 << bit_depth) - 1);
            for b in (0..bytes_per_sample).rev() {
                payload.push((raw >> (8 * b)) as u8);
            }
        }
    }

    Ok(Encapsulated {
        packet: WirePacket { header, payload },
        clamped_samples: clamped,
    })
}

impl WirePacket {
    /// Serialized length in bytes: header plus payload.
    pub fn wire_len(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    pub fn serialize(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(h.flags.to_byte());
        out.extend_from_slice(&h.sequence.to_be_bytes());
        out.extend_from_slice(&h.timestamp.to_be_bytes());
        out.push(h.order);
        out.push(h.bit_depth);
        out.extend_from_slice(&h.frame_length.to_be_bytes());
        out.extend_from_slice(&h.fade_remaining.to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }
}

/// Parse arbitrary bytes into a packet. Exact inverse of
/// [`WirePacket::serialize`] on valid input; never panics on anything.
pub fn parse_packet(bytes: &[u8]) -> Result<WirePacket, WireError> {
    if bytes.len() < HEADER_LEN {
        return Err(WireError::Truncated {
            got: bytes.len(),
            need: HEADER_LEN,
        });
    }
    if bytes[0..2] != MAGIC {
        return Err(WireError::BadMagic([bytes[0], bytes[1]]));
    }
    if bytes[2] != VERSION {
        return Err(WireError::BadVersion(bytes[2]));
    }
    let flags = PacketFlags::from_byte(bytes[3])?;
    let sequence = u16::from_be_bytes([bytes[4], bytes[5]]);
    let timestamp = u32::from_be_bytes([bytes[6], bytes[7], bytes[8], bytes[9]]);
    let order = bytes[10];
    let bit_depth = bytes[11];
    check_bit_depth(bit_depth)?;
    if order > 15 {
        return Err(WireError::OrderTooHigh(order as u32));
    }
    let frame_length = u16::from_be_bytes([bytes[12], bytes[13]]);
    let fade_remaining = u16::from_be_bytes([bytes[14], bytes[15]]);

    let want_bits = payload_size(order as u32, bit_depth, frame_length)?;
    let want_bytes = (want_bits / 8) as usize;
    let got = bytes.len() - HEADER_LEN;
    if got != want_bytes {
        return Err(WireError::LengthMismatch {
            got,
            want: want_bytes,
            order,
        });
    }

    Ok(WirePacket {
        header: PacketHeader {
            flags,
            sequence,
            timestamp,
            order,
            bit_depth,
            frame_length,
            fade_remaining,
        },
        payload: bytes[HEADER_LEN..].to_vec(),
    })
}

/// Map PCM words back to `[-1, 1)`. Frame order and length come from the
/// header; the sample rate is session state the wire does not carry.
/// Expects a packet whose payload length matches its header, as
/// [`parse_packet`] and [`encapsulate`] guarantee.
pub fn dequantize(packet: &WirePacket, sample_rate: u32) -> AmbisonicFrame {
    let h = &packet.header;
    let bytes_per_sample = h.bit_depth as usize / 8;
    let full_scale = (1u64 << (h.bit_depth - 1)) as f64;
    let channels = ((h.order as usize) + 1) * ((h.order as usize) + 1);
    let len = h.frame_length as usize;
    let mut frame = AmbisonicFrame::zeros(h.order as u32, len, sample_rate, h.timestamp as u64);
    for c in 0..channels {
        let ch = frame.channel_mut(c);
        for (i, out) in ch.iter_mut().enumerate() {
            let off = (c * len + i) * bytes_per_sample;
            let mut raw = 0u64;
            for b in 0..bytes_per_sample {
                raw = (raw << 8) | packet.payload[off + b] as u64;
            }
            // sign-extend
            let shift = 64 - h.bit_depth as u32;
            let code = ((raw << shift) as i64) >> shift;
            *out = code as f64 / full_scale;
        }
    }
    frame
}
