//! Virtual loudspeaker layouts and inverse-SH decoding.

use serde::Deserialize;

use super::sh::sh_basis;
use super::{AmbiError, AmbisonicFrame, Direction};

/// Tolerance on the pseudo-inverse identity check.
const DECODE_IDENTITY_TOL: f64 = 1e-6;

/// A loudspeaker set with a mode-matching decode matrix for a fixed maximum
/// order: the Moore–Penrose pseudo-inverse of the channels-by-speakers SH
/// sampling matrix, so re-encoding the speaker feeds reproduces the
/// coefficients.
#[derive(Debug, Clone)]
pub struct LoudspeakerLayout {
    directions: Vec<Direction>,
    order: u32,
    /// Row-major speakers x channels.
    decode_matrix: Vec<f64>,
}

impl LoudspeakerLayout {
    /// Build the decode matrix `D = Y (Y^T Y)^{-1}` for the given
    /// directions and order, and verify `Y^T D = I` within 1e-6.
    pub fn new(directions: Vec<Direction>, order: u32) -> Result<Self, AmbiError> {
        let channels = ((order + 1) * (order + 1)) as usize;
        let speakers = directions.len();
        if speakers < channels {
            return Err(AmbiError::InvalidLayout {
                reason: format!("{speakers} speakers < {channels} channels for order {order}"),
            });
        }

        // Y: speakers x channels sampling matrix.
        let mut y = vec![0.0; speakers * channels];
        for (s, dir) in directions.iter().enumerate() {
            let basis = sh_basis(order, dir.colatitude, dir.azimuth);
            y[s * channels..(s + 1) * channels].copy_from_slice(&basis);
        }

        // Gram = Y^T Y (channels x channels).
        let mut gram = vec![0.0; channels * channels];
        for a in 0..channels {
            for b in 0..channels {
                let mut acc = 0.0;
                for s in 0..speakers {
                    acc += y[s * channels + a] * y[s * channels + b];
                }
                gram[a * channels + b] = acc;
            }
        }
        let inv = invert(&gram, channels).ok_or_else(|| AmbiError::InvalidLayout {
            reason: "SH sampling matrix is rank-deficient for this order".into(),
        })?;

        // D = Y * Gram^{-1}.
        let mut decode = vec![0.0; speakers * channels];
        for s in 0..speakers {
            for c in 0..channels {
                let mut acc = 0.0;
                for k in 0..channels {
                    acc += y[s * channels + k] * inv[k * channels + c];
                }
                decode[s * channels + c] = acc;
            }
        }

        // Verify Y^T D = I.
        for a in 0..channels {
            for b in 0..channels {
                let mut acc = 0.0;
                for s in 0..speakers {
                    acc += y[s * channels + a] * decode[s * channels + b];
                }
                let delta = if a == b { 1.0 } else { 0.0 };
                if (acc - delta).abs() > DECODE_IDENTITY_TOL {
                    return Err(AmbiError::InvalidLayout {
                        reason: format!(
                            "decode identity off by {:.3e} at ({a},{b})",
                            (acc - delta).abs()
                        ),
                    });
                }
            }
        }

        Ok(Self {
            directions,
            order,
            decode_matrix: decode,
        })
    }

    /// Quasi-uniform layout from a golden-angle (Fibonacci) spiral.
    pub fn fibonacci(speakers: usize, order: u32) -> Result<Self, AmbiError> {
        let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
        let dirs = (0..speakers)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / speakers as f64;
                let az = std::f64::consts::TAU * i as f64 / golden;
                Direction::new(az, z.acos())
            })
            .collect();
        Self::new(dirs, order)
    }

    /// Ring layout on the builtin capsule grid geometry: exact-design
    /// placement, so the decode of an order-0 frame is uniform across
    /// speakers to machine precision.
    pub fn builtin_rings(order: u32) -> Result<Self, AmbiError> {
        let grid = super::CapsuleArray::builtin_grid(order)?;
        Self::new(grid.directions().to_vec(), order)
    }

    /// Load from the structured text format in `docs/config.md`.
    pub fn from_toml_str(text: &str) -> Result<Self, AmbiError> {
        #[derive(Deserialize)]
        struct SpeakerEntry {
            azimuth_deg: f64,
            colatitude_deg: f64,
        }
        #[derive(Deserialize)]
        struct LayoutFile {
            order: u32,
            speakers: Vec<SpeakerEntry>,
        }
        let parsed: LayoutFile =
            toml::from_str(text).map_err(|e| AmbiError::LayoutConfig(e.to_string()))?;
        let dirs = parsed
            .speakers
            .iter()
            .map(|s| Direction::new(s.azimuth_deg.to_radians(), s.colatitude_deg.to_radians()))
            .collect();
        Self::new(dirs, parsed.order)
    }

    pub fn speaker_count(&self) -> usize {
        self.directions.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn decode_matrix(&self) -> &[f64] {
        &self.decode_matrix
    }

    /// Index of the speaker nearest a direction.
    pub fn nearest_speaker(&self, dir: Direction) -> usize {
        let mut best = 0;
        let mut best_angle = f64::INFINITY;
        for (s, d) in self.directions.iter().enumerate() {
            let a = d.angle_to(dir);
            if a < best_angle {
                best_angle = a;
                best = s;
            }
        }
        best
    }
}

/// Decode a frame to loudspeaker signals: `output = decode_matrix * frame`.
/// Returns speaker-major samples (`speakers x frame_length`). Frames below
/// the layout order are zero-extended; frames above it are a shape error.
pub fn decode_loudspeakers(
    frame: &AmbisonicFrame,
    layout: &LoudspeakerLayout,
) -> Result<Vec<f64>, AmbiError> {
    if frame.order() > layout.order() {
        return Err(AmbiError::ShapeMismatch {
            context: format!(
                "frame order {} exceeds layout order {}",
                frame.order(),
                layout.order()
            ),
        });
    }
    let channels = ((layout.order() + 1) * (layout.order() + 1)) as usize;
    let present = frame.channel_count();
    let len = frame.frame_length();
    let speakers = layout.speaker_count();
    let mut out = vec![0.0; speakers * len];
    for s in 0..speakers {
        let row = &layout.decode_matrix[s * channels..s * channels + present];
        let dst = &mut out[s * len..(s + 1) * len];
        for (c, &gain) in row.iter().enumerate() {
            if gain == 0.0 {
                continue;
            }
            for (o, v) in dst.iter_mut().zip(frame.channel(c)) {
                *o += gain * v;
            }
        }
    }
    Ok(out)
}

/// Gauss–Jordan inversion with partial pivoting; `None` when singular.
fn invert(matrix: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut a = matrix.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[pivot * n + col].abs() {
                pivot = r;
            }
        }
        if a[pivot * n + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(col * n + c, pivot * n + c);
                inv.swap(col * n + c, pivot * n + c);
            }
        }
        let diag = a[col * n + col];
        for c in 0..n {
            a[col * n + c] /= diag;
            inv[col * n + c] /= diag;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col];
            if factor == 0.0 {
                continue;
            }
            for c in 0..n {
                a[r * n + c] -= factor * a[col * n + c];
                inv[r * n + c] -= factor * inv[col * n + c];
            }
        }
    }
    Some(inv)
}
