//! Real spherical harmonics: associated Legendre functions, the ACN channel
//! index, and SH evaluation.
//!
//! Conventions (the de-facto Ambisonics exchange set):
//! - real-valued basis: `cos(|m| az)` for m > 0, `sin(|m| az)` for m < 0,
//!   with a sqrt(2) factor on the tangential (m != 0) terms,
//! - N3D normalization, so the basis is orthonormal over the sphere,
//! - ACN channel ordering, index `n^2 + n + m`,
//! - no Condon–Shortley phase in the Legendre functions.

use super::AmbiError;

/// Associated Legendre function `P_n^m(x)` without the Condon–Shortley
/// phase, by upward recurrence in `n` from the closed-form `P_m^m`.
///
/// The recurrence is stable for the low orders used here; unit tests pin it
/// against an independent polynomial-derivative oracle up to n = 8.
pub fn associated_legendre(n: u32, m: u32, x: f64) -> Result<f64, AmbiError> {
    if m > n {
        return Err(AmbiError::DegreeOutOfRange { n, m: m as i32 });
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(AmbiError::LegendreArgument { x });
    }

    // P_m^m(x) = (2m-1)!! (1-x^2)^{m/2}
    let mut pmm = 1.0;
    if m > 0 {
        let s = ((1.0 - x) * (1.0 + x)).sqrt();
        let mut fact = 1.0;
        for _ in 0..m {
            pmm *= fact * s;
            fact += 2.0;
        }
    }
    if n == m {
        return Ok(pmm);
    }

    // P_{m+1}^m(x) = x (2m+1) P_m^m(x)
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if n == m + 1 {
        return Ok(pm1);
    }

    // (k-m) P_k^m = x (2k-1) P_{k-1}^m - (k+m-1) P_{k-2}^m
    let mut p = 0.0;
    for k in m + 2..=n {
        p = (x * (2 * k - 1) as f64 * pm1 - (k + m - 1) as f64 * pmm) / (k - m) as f64;
        pmm = pm1;
        pm1 = p;
    }
    Ok(p)
}

/// Ambisonic Channel Number: `n^2 + n + m`, bijective onto `0..(N+1)^2`.
pub fn acn_index(n: u32, m: i32) -> Result<usize, AmbiError> {
    if m.unsigned_abs() > n {
        return Err(AmbiError::DegreeOutOfRange { n, m });
    }
    Ok(((n * n + n) as i64 + m as i64) as usize)
}

/// N3D normalization factor for order `n`, |degree| `ma`.
fn sh_norm(n: u32, ma: u32) -> f64 {
    // sqrt((2n+1)/(4pi) * (n-|m|)!/(n+|m|)!)
    let mut ratio = 1.0;
    for k in (n - ma + 1)..=(n + ma) {
        ratio *= k as f64;
    }
    ((2 * n + 1) as f64 / (4.0 * std::f64::consts::PI) / ratio).sqrt()
}

/// Real spherical harmonic `Y_{n,m}` at (colatitude, azimuth), N3D
/// normalized. Orthonormal under any quadrature-valid capsule layout.
pub fn sh_eval(n: u32, m: i32, colatitude: f64, azimuth: f64) -> Result<f64, AmbiError> {
    let ma = m.unsigned_abs();
    if ma > n {
        return Err(AmbiError::DegreeOutOfRange { n, m });
    }
    let leg = associated_legendre(n, ma, colatitude.cos())?;
    let trig = if m == 0 {
        1.0
    } else if m > 0 {
        std::f64::consts::SQRT_2 * (ma as f64 * azimuth).cos()
    } else {
        std::f64::consts::SQRT_2 * (ma as f64 * azimuth).sin()
    };
    Ok(sh_norm(n, ma) * leg * trig)
}

/// All `(order+1)^2` harmonics at one direction, in ACN order.
///
/// Equivalent to calling [`sh_eval`] per channel; kept as one pass so the
/// per-sample encoders share the trig and Legendre work.
pub fn sh_basis(order: u32, colatitude: f64, azimuth: f64) -> Vec<f64> {
    let channels = ((order + 1) * (order + 1)) as usize;
    let mut out = vec![0.0; channels];
    let x = colatitude.cos();
    let s = ((1.0 - x) * (1.0 + x)).sqrt();

    // cos/sin of m*azimuth for m = 0..=order
    let mut cos_m = vec![1.0; order as usize + 1];
    let mut sin_m = vec![0.0; order as usize + 1];
    for ma in 1..=order as usize {
        cos_m[ma] = (ma as f64 * azimuth).cos();
        sin_m[ma] = (ma as f64 * azimuth).sin();
    }

    // P_n^m for all n <= order via the same recurrences as
    // `associated_legendre`, sharing the diagonal.
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for ma in 0..=order {
        // column m = ma upward in n
        let mut prev2 = pmm; // P_ma^ma
        let mut prev1 = if ma < order {
            x * (2 * ma + 1) as f64 * pmm // P_{ma+1}^ma
        } else {
            0.0
        };
        for n in ma..=order {
            let p = if n == ma {
                prev2
            } else if n == ma + 1 {
                prev1
            } else {
                let p = (x * (2 * n - 1) as f64 * prev1 - (n + ma - 1) as f64 * prev2)
                    / (n - ma) as f64;
                prev2 = prev1;
                prev1 = p;
                p
            };
            let norm_leg = sh_norm(n, ma) * p;
            let base = (n * n + n) as usize;
            if ma == 0 {
                out[base] = norm_leg;
            } else {
                out[base + ma as usize] = std::f64::consts::SQRT_2 * cos_m[ma as usize] * norm_leg;
                out[base - ma as usize] = std::f64::consts::SQRT_2 * sin_m[ma as usize] * norm_leg;
            }
        }
        // advance the diagonal: P_{ma+1}^{ma+1} = (2 ma + 1) s P_ma^ma
        pmm *= fact * s;
        fact += 2.0;
    }
    out
}
