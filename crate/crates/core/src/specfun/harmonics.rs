//! Orthonormal complex spherical harmonics with the Condon–Shortley phase:
//! `Y_n^m = sqrt((2n+1)/(4π) (n-m)!/(n+m)!) P_n^m(cos θ) e^{imφ}`,
//! with `P_n^m` carrying the `(-1)^m` factor and `Y_n^{-m} = (-1)^m conj(Y_n^m)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::index::{flat_index, ModalIndexMap, OrderDegree};
use crate::error::{Error, Result};

/// Normalised associated Legendre values `Pbar_n^m(cos θ)` for `0 <= m <= n <= max_order`,
/// laid out as `n * (n + 1) / 2 + m`. Includes the `1/sqrt(4π)` and Condon–Shortley factors
/// so that `Y_n^m = Pbar_n^m e^{imφ}` for `m >= 0`.
fn normalised_legendre(max_order: usize, theta: f64) -> Vec<f64> {
    let (sin_t, cos_t) = theta.sin_cos();
    let tri = |n: usize, m: usize| n * (n + 1) / 2 + m;
    let mut p = vec![0.0; (max_order + 1) * (max_order + 2) / 2];
    p[0] = 0.5 / PI.sqrt();
    for m in 1..=max_order {
        let ratio = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        p[tri(m, m)] = -ratio * sin_t * p[tri(m - 1, m - 1)];
    }
    for m in 0..max_order {
        p[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * cos_t * p[tri(m, m)];
    }
    for m in 0..=max_order {
        for n in (m + 2)..=max_order {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            p[tri(n, m)] = a * (cos_t * p[tri(n - 1, m)] - b * p[tri(n - 2, m)]);
        }
    }
    p
}

/// All `Y_n^m(θ, φ)` for `n <= max_order`, in [`ModalIndexMap`] order.
///
/// `theta` is not range-checked here; crate-internal callers pass angles
/// derived from `acos`.
pub(crate) fn harmonics_unchecked(max_order: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let p = normalised_legendre(max_order, theta);
    let map = ModalIndexMap::new(max_order);
    let mut out = vec![Complex64::new(0.0, 0.0); map.len()];
    for n in 0..=max_order {
        for m in 0..=n {
            let value = Complex64::from_polar(p[n * (n + 1) / 2 + m], m as f64 * phi);
            out[flat_index(n, m as i32)] = value;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[flat_index(n, -(m as i32))] = value.conj() * sign;
            }
        }
    }
    out
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::ThetaOutOfRange(theta))
    }
}

/// `Y_n^m(θ, φ)` for a single index pair.
pub fn spherical_harmonic(nm: OrderDegree, theta: f64, phi: f64) -> Result<Complex64> {
    check_theta(theta)?;
    let all = harmonics_unchecked(nm.n() as usize, theta, phi);
    Ok(all[flat_index(nm.n() as usize, nm.m())])
}

/// Every `Y_n^m(θ, φ)` through `max_order`, flat-indexed.
pub fn spherical_harmonics(max_order: usize, theta: f64, phi: f64) -> Result<Vec<Complex64>> {
    check_theta(theta)?;
    Ok(harmonics_unchecked(max_order, theta, phi))
}
