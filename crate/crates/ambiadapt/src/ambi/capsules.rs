//! Capsule arrays: sampling grids on the sphere whose weighted sums make
//! the discrete SH projection valid.

use serde::Deserialize;

use super::sh::{acn_index, sh_eval};
use super::{AmbiError, Direction};

/// A spherical microphone layout: `Q` capsule directions with quadrature
/// weights summing to 4pi, valid for SH projection up to `order_limit`.
#[derive(Debug, Clone)]
pub struct CapsuleArray {
    directions: Vec<Direction>,
    weights: Vec<f64>,
    order_limit: u32,
}

/// Relative tolerance on the weight sum (vs 4pi).
const WEIGHT_SUM_REL_TOL: f64 = 1e-9;
/// Absolute tolerance on discrete SH orthonormality.
pub const QUADRATURE_TOL: f64 = 1e-6;

impl CapsuleArray {
    /// Validating constructor. Checks capsule count, weight sum, and the
    /// discrete orthonormality of the SH basis up to `order_limit`.
    pub fn new(
        directions: Vec<Direction>,
        weights: Vec<f64>,
        order_limit: u32,
    ) -> Result<Self, AmbiError> {
        if directions.len() != weights.len() {
            return Err(AmbiError::InvalidCapsuleArray {
                reason: format!(
                    "{} directions vs {} weights",
                    directions.len(),
                    weights.len()
                ),
            });
        }
        let needed = ((order_limit + 1) * (order_limit + 1)) as usize;
        if directions.len() < needed {
            return Err(AmbiError::InvalidCapsuleArray {
                reason: format!(
                    "{} capsules < (N+1)^2 = {} for order limit {}",
                    directions.len(),
                    needed,
                    order_limit
                ),
            });
        }
        let sum: f64 = weights.iter().sum();
        let four_pi = 4.0 * std::f64::consts::PI;
        if ((sum - four_pi) / four_pi).abs() > WEIGHT_SUM_REL_TOL {
            return Err(AmbiError::InvalidCapsuleArray {
                reason: format!("weights sum to {sum}, expected 4pi"),
            });
        }
        let array = Self {
            directions,
            weights,
            order_limit,
        };
        let err = array.max_orthonormality_error();
        if err > QUADRATURE_TOL {
            return Err(AmbiError::InvalidCapsuleArray {
                reason: format!(
                    "quadrature invalid: max orthonormality error {err:.3e} > {QUADRATURE_TOL:.0e}"
                ),
            });
        }
        Ok(array)
    }

    /// Builtin equal-weight grid, exact for SH products up to `order_limit`.
    ///
    /// Colatitude rings sit at the equal-weight Chebyshev quadrature nodes
    /// in cos(colatitude) (2, 4, or 6 nodes: exact for polynomials of degree
    /// 3, 5, 7), each ring carries `2*order_limit + 2` equally spaced
    /// azimuths, and every capsule gets w_q = 4pi/Q. Equal-weight Chebyshev
    /// rules with more nodes do not exist, so order limits above 3 need a
    /// config-supplied layout.
    pub fn builtin_grid(order_limit: u32) -> Result<Self, AmbiError> {
        if order_limit > 3 {
            return Err(AmbiError::InvalidCapsuleArray {
                reason: format!("builtin grid supports order limits 0..=3, got {order_limit}"),
            });
        }
        // Nodes of the equal-weight rule: roots of the power-sum system
        // sum x_i^k = n/(k+1) for even k (odd moments vanish by symmetry).
        let nodes: Vec<f64> = match order_limit {
            0 => vec![0.5], // any ring integrates degree 0; keep one off-pole
            1 => {
                // 2 nodes +-a with a^2 = 1/3
                let a = (1.0f64 / 3.0).sqrt();
                vec![a]
            }
            2 => {
                // 4 nodes +-a, +-b; z = x^2 solves z^2 - (2/3) z + 1/45 = 0
                solve_even_moment_poly(&[1.0, -2.0 / 3.0, 1.0 / 45.0])
            }
            _ => {
                // 6 nodes; z^3 - z^2 + z/5 - 1/105 = 0
                solve_even_moment_poly(&[1.0, -1.0, 1.0 / 5.0, -1.0 / 105.0])
            }
        };
        let mut xs: Vec<f64> = Vec::new();
        for &a in &nodes {
            xs.push(a);
            if order_limit > 0 {
                xs.push(-a);
            }
        }
        let azimuths = (2 * order_limit + 2).max(1) as usize;
        let mut directions = Vec::with_capacity(xs.len() * azimuths);
        for &x in &xs {
            let colat = x.acos();
            for i in 0..azimuths {
                let az = std::f64::consts::TAU * i as f64 / azimuths as f64;
                directions.push(Direction::new(az, colat));
            }
        }
        let q = directions.len();
        let w = 4.0 * std::f64::consts::PI / q as f64;
        Self::new(directions, vec![w; q], order_limit)
    }

    /// Load from the structured text format described in `docs/config.md`:
    /// an `order_limit` and one `[[capsules]]` table per capsule with
    /// `azimuth_deg`, `colatitude_deg`, and `weight`.
    pub fn from_toml_str(text: &str) -> Result<Self, AmbiError> {
        #[derive(Deserialize)]
        struct CapsuleEntry {
            azimuth_deg: f64,
            colatitude_deg: f64,
            weight: f64,
        }
        #[derive(Deserialize)]
        struct CapsuleFile {
            order_limit: u32,
            capsules: Vec<CapsuleEntry>,
        }
        let parsed: CapsuleFile =
            toml::from_str(text).map_err(|e| AmbiError::LayoutConfig(e.to_string()))?;
        let directions = parsed
            .capsules
            .iter()
            .map(|c| Direction::new(c.azimuth_deg.to_radians(), c.colatitude_deg.to_radians()))
            .collect();
        let weights = parsed.capsules.iter().map(|c| c.weight).collect();
        Self::new(directions, weights, parsed.order_limit)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn order_limit(&self) -> u32 {
        self.order_limit
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Discrete weighted inner product of `Y_{n,m}` and `Y_{n2,m2}` over
    /// the layout. Equals the Kronecker delta when the quadrature is valid.
    pub fn sh_inner_product(&self, n: u32, m: i32, n2: u32, m2: i32) -> Result<f64, AmbiError> {
        let mut acc = 0.0;
        for (dir, w) in self.directions.iter().zip(&self.weights) {
            acc += w
                * sh_eval(n, m, dir.colatitude, dir.azimuth)?
                * sh_eval(n2, m2, dir.colatitude, dir.azimuth)?;
        }
        Ok(acc)
    }

    /// Max |inner product - delta| over all channel pairs up to the order
    /// limit.
    pub fn max_orthonormality_error(&self) -> f64 {
        let limit = self.order_limit;
        let mut worst: f64 = 0.0;
        for n in 0..=limit {
            for m in -(n as i32)..=n as i32 {
                for n2 in 0..=limit {
                    for m2 in -(n2 as i32)..=n2 as i32 {
                        let ip = self
                            .sh_inner_product(n, m, n2, m2)
                            .expect("degrees in range");
                        let same = acn_index(n, m).expect("in range")
                            == acn_index(n2, m2).expect("in range");
                        let delta = if same { 1.0 } else { 0.0 };
                        worst = worst.max((ip - delta).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Roots (in z = x^2) of a monic polynomial with all roots real in (0, 1),
/// by bisection on sign changes over a fine grid. Deterministic.
fn solve_even_moment_poly(coeffs: &[f64]) -> Vec<f64> {
    let eval = |z: f64| -> f64 {
        let mut v = 0.0;
        for &c in coeffs {
            v = v * z + c;
        }
        v
    };
    let mut roots = Vec::new();
    let steps = 4096;
    let mut prev_z = 0.0;
    let mut prev_v = eval(0.0);
    for i in 1..=steps {
        let z = i as f64 / steps as f64;
        let v = eval(z);
        if prev_v == 0.0 {
            roots.push(prev_z);
        } else if prev_v * v < 0.0 {
            let (mut lo, mut hi) = (prev_z, z);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if eval(lo) * eval(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_z = z;
        prev_v = v;
    }
    roots.iter().map(|z| z.sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_grid_order3_is_orthonormal() {
        let array = CapsuleArray::builtin_grid(3).unwrap();
        assert_eq!(array.len(), 48);
        assert!(array.len() >= 16);
        assert!(array.max_orthonormality_error() < 1e-12);
    }

    #[test]
    fn builtin_grids_all_order_limits() {
        for limit in 0..=3 {
            let array = CapsuleArray::builtin_grid(limit).unwrap();
            assert!(array.len() >= ((limit + 1) * (limit + 1)) as usize);
            assert!(
                array.max_orthonormality_error() < QUADRATURE_TOL,
                "order {limit}"
            );
        }
        assert!(CapsuleArray::builtin_grid(4).is_err());
    }

    #[test]
    fn cross_degree_inner_product_vanishes() {
        // Brute-force quadrature of Y_{1,1} against Y_{1,-1}.
        let array = CapsuleArray::builtin_grid(3).unwrap();
        let ip = array.sh_inner_product(1, 1, 1, -1).unwrap();
        assert!(ip.abs() < 1e-6, "got {ip}");
    }

    #[test]
    fn rejects_too_few_capsules() {
        let dirs: Vec<Direction> = (0..8)
            .map(|i| Direction::new(i as f64, 1.0 + 0.1 * i as f64))
            .collect();
        let w = 4.0 * std::f64::consts::PI / 8.0;
        let err = CapsuleArray::new(dirs, vec![w; 8], 3).unwrap_err();
        assert!(matches!(err, AmbiError::InvalidCapsuleArray { .. }));
    }

    #[test]
    fn rejects_bad_weight_sum() {
        let base = CapsuleArray::builtin_grid(1).unwrap();
        let dirs = base.directions().to_vec();
        let weights: Vec<f64> = base.weights().iter().map(|w| w * 1.01).collect();
        assert!(CapsuleArray::new(dirs, weights, 1).is_err());
    }

    #[test]
    fn rejects_quadrature_invalid_grid() {
        // Correct weight sum, but all capsules crowded in one hemisphere.
        let q = 20;
        let dirs: Vec<Direction> = (0..q)
            .map(|i| Direction::new(0.3 * i as f64, 0.4 + 0.05 * (i % 5) as f64))
            .collect();
        let w = 4.0 * std::f64::consts::PI / q as f64;
        let err = CapsuleArray::new(dirs, vec![w; q], 3).unwrap_err();
        assert!(matches!(err, AmbiError::InvalidCapsuleArray { .. }));
    }

    #[test]
    fn loads_from_toml() {
        let base = CapsuleArray::builtin_grid(1).unwrap();
        let mut text = String::from("order_limit = 1\n");
        for (d, w) in base.directions().iter().zip(base.weights()) {
            text.push_str(&format!(
                "[[capsules]]\nazimuth_deg = {:.17}\ncolatitude_deg = {:.17}\nweight = {:.17}\n",
                d.azimuth.to_degrees(),
                d.colatitude.to_degrees(),
                w
            ));
        }
        let loaded = CapsuleArray::from_toml_str(&text).unwrap();
        assert_eq!(loaded.len(), base.len());
        assert!(loaded.max_orthonormality_error() < 1e-6);
    }

    #[test]
    fn toml_parse_error_reported() {
        assert!(matches!(
            CapsuleArray::from_toml_str("not toml ["),
            Err(AmbiError::LayoutConfig(_))
        ));
    }
}
