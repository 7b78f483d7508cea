//! Spherical-harmonics core: directions, capsule arrays, Ambisonics frames,
//! encoders, order truncation, and loudspeaker decoding.
//!
//! Angle conventions, used everywhere in this crate:
//! - `azimuth` in radians, normalized to `[-pi, pi)`, counter-clockwise,
//! - `colatitude` (zenith angle) in radians in `[0, pi]`: 0 = zenith,
//!   pi/2 = horizon, pi = nadir,
//! - listener-facing configs use azimuth/elevation in degrees; elevation
//!   maps to colatitude as `colat = 90deg - elevation`. Values that leave
//!   `[0, 180]`deg reflect over the pole and flip azimuth by 180deg, so an
//!   elevation sweep 0 -> 180deg passes through the zenith and comes down
//!   on the opposite side:
//!
//!   | elevation | colatitude | azimuth shift |
//!   |-----------|------------|---------------|
//!   | -90       | 180        | none          |
//!   | 0         | 90         | none          |
//!   | 90        | 0          | none          |
//!   | 180       | 90         | +180deg       |
//!
//! The associated Legendre functions carry no Condon–Shortley phase and the
//! real SH basis is N3D-normalized in ACN order (see [`sh_eval`]).

mod capsules;
mod encode;
mod layout;
mod sh;

pub use capsules::CapsuleArray;
pub use encode::{encode_capsules, encode_plane_wave, high_order_residual, truncate_order};
pub use layout::{decode_loudspeakers, LoudspeakerLayout};
pub use sh::{acn_index, associated_legendre, sh_basis, sh_eval};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AmbiError {
    #[error("degree m={m} out of range for order n={n}")]
    DegreeOutOfRange { n: u32, m: i32 },
    #[error("Legendre argument {x} outside [-1, 1]")]
    LegendreArgument { x: f64 },
    #[error("requested order {requested} exceeds limit {limit}")]
    OrderTooHigh { requested: u32, limit: u32 },
    #[error("shape mismatch: {context}")]
    ShapeMismatch { context: String },
    #[error("window [{start}, {start}+{len}) exceeds source length {source_len}")]
    WindowOutOfRange {
        start: u64,
        len: usize,
        source_len: usize,
    },
    #[error("invalid capsule array: {reason}")]
    InvalidCapsuleArray { reason: String },
    #[error("invalid loudspeaker layout: {reason}")]
    InvalidLayout { reason: String },
    #[error("layout config: {0}")]
    LayoutConfig(String),
}

/// A direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    /// Radians in `[-pi, pi)`.
    pub azimuth: f64,
    /// Radians in `[0, pi]`.
    pub colatitude: f64,
}

impl Direction {
    /// Build from radians, normalizing azimuth into `[-pi, pi)` and
    /// reflecting out-of-range colatitude over the poles.
    pub fn new(azimuth: f64, colatitude: f64) -> Self {
        let mut az = azimuth;
        let mut colat = colatitude;
        // reflect over the poles until colatitude lands in [0, pi]
        loop {
            if colat < 0.0 {
                colat = -colat;
                az += std::f64::consts::PI;
            } else if colat > std::f64::consts::PI {
                colat = 2.0 * std::f64::consts::PI - colat;
                az += std::f64::consts::PI;
            } else {
                break;
            }
        }
        Self {
            azimuth: wrap_azimuth(az),
            colatitude: colat,
        }
    }

    /// Build from listener-facing degrees (azimuth, elevation).
    pub fn from_az_el_deg(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self::new(
            azimuth_deg.to_radians(),
            (90.0 - elevation_deg).to_radians(),
        )
    }

    /// Unit vector (x toward azimuth 0 on the horizon, z up).
    pub fn to_unit_vector(self) -> [f64; 3] {
        let (sc, cc) = self.colatitude.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [sc * ca, sc * sa, cc]
    }

    /// Great-circle angle to another direction, radians in `[0, pi]`.
    pub fn angle_to(self, other: Direction) -> f64 {
        let a = self.to_unit_vector();
        let b = other.to_unit_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }
}

fn wrap_azimuth(az: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let wrapped = az - TAU * ((az + PI) / TAU).floor();
    // floor rounding can land exactly on +pi
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// One packetized window of Ambisonics coefficients: `(order+1)^2` channels
/// of `frame_length` samples, channel-major, rows in ACN order.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbisonicFrame {
    order: u32,
    frame_length: usize,
    pub sample_rate: u32,
    /// Absolute index of the first sample covered by this frame.
    pub start_index: u64,
    samples: Vec<f64>,
}

impl AmbisonicFrame {
    pub fn zeros(order: u32, frame_length: usize, sample_rate: u32, start_index: u64) -> Self {
        let channels = ((order + 1) * (order + 1)) as usize;
        Self {
            order,
            frame_length,
            sample_rate,
            start_index,
            samples: vec![0.0; channels * frame_length],
        }
    }

    /// Wrap channel-major data; `samples.len()` must be
    /// `(order+1)^2 * frame_length` and all values finite.
    pub fn from_samples(
        order: u32,
        frame_length: usize,
        sample_rate: u32,
        start_index: u64,
        samples: Vec<f64>,
    ) -> Result<Self, AmbiError> {
        let channels = ((order + 1) * (order + 1)) as usize;
        if samples.len() != channels * frame_length {
            return Err(AmbiError::ShapeMismatch {
                context: format!(
                    "expected {} samples for {} channels x {}, got {}",
                    channels * frame_length,
                    channels,
                    frame_length,
                    samples.len()
                ),
            });
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(AmbiError::ShapeMismatch {
                context: "non-finite sample".into(),
            });
        }
        Ok(Self {
            order,
            frame_length,
            sample_rate,
            start_index,
            samples,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn channel_count(&self) -> usize {
        ((self.order + 1) * (self.order + 1)) as usize
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.samples[c * self.frame_length..(c + 1) * self.frame_length]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.samples[c * self.frame_length..(c + 1) * self.frame_length]
    }

    /// Channel-major backing storage.
    pub fn raw(&self) -> &[f64] {
        &self.samples
    }

    /// Extend with zero-valued channels up to `order`. No-op when the frame
    /// is already at or above it.
    pub fn zero_padded(&self, order: u32) -> AmbisonicFrame {
        if order <= self.order {
            return self.clone();
        }
        let mut out =
            AmbisonicFrame::zeros(order, self.frame_length, self.sample_rate, self.start_index);
        out.samples[..self.samples.len()].copy_from_slice(&self.samples);
        out
    }
}

/// A mono source with a per-sample direction.
#[derive(Debug, Clone)]
pub struct SourceSignal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub trajectory: Trajectory,
}

impl SourceSignal {
    pub fn direction_at(&self, sample_index: u64) -> Direction {
        self.trajectory.direction_at(sample_index, self.sample_rate)
    }
}

/// Per-sample source direction. Sweeps interpolate linearly in the
/// configured angles; the interpolation parameter is
/// `min(index / (duration * sample_rate), 1)`, so a sweep that finishes at
/// or before the last scene sample hits its endpoint exactly and the
/// midpoint sample of an even-length sweep sits exactly halfway.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    Static(Direction),
    /// Azimuth moves `from_deg -> to_deg` over `duration_secs`; elevation
    /// fixed at `elevation_deg`.
    AzimuthSweep {
        from_deg: f64,
        to_deg: f64,
        elevation_deg: f64,
        duration_secs: f64,
    },
    /// Elevation moves `from_deg -> to_deg` over `duration_secs`; azimuth
    /// fixed at `azimuth_deg`. Elevations beyond 90deg reflect over the
    /// zenith (see the module docs).
    ElevationSweep {
        from_deg: f64,
        to_deg: f64,
        azimuth_deg: f64,
        duration_secs: f64,
    },
}

impl Trajectory {
    pub fn direction_at(&self, sample_index: u64, sample_rate: u32) -> Direction {
        match *self {
            Trajectory::Static(d) => d,
            Trajectory::AzimuthSweep {
                from_deg,
                to_deg,
                elevation_deg,
                duration_secs,
            } => {
                let u = sweep_progress(sample_index, duration_secs, sample_rate);
                Direction::from_az_el_deg(from_deg + (to_deg - from_deg) * u, elevation_deg)
            }
            Trajectory::ElevationSweep {
                from_deg,
                to_deg,
                azimuth_deg,
                duration_secs,
            } => {
                let u = sweep_progress(sample_index, duration_secs, sample_rate);
                Direction::from_az_el_deg(azimuth_deg, from_deg + (to_deg - from_deg) * u)
            }
        }
    }
}

fn sweep_progress(sample_index: u64, duration_secs: f64, sample_rate: u32) -> f64 {
    let total = duration_secs * sample_rate as f64;
    if total <= 0.0 {
        return 1.0;
    }
    (sample_index as f64 / total).min(1.0)
}
