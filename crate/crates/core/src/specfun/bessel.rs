//! Spherical Bessel and Hankel functions of real positive argument.
//!
//! `j_n` uses Miller's downward recurrence, which stays stable for `n > x`;
//! `y_n` uses upward recurrence, which is stable for all `n`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e200;

fn check_argument(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveArgument(x))
    }
}

/// `j_0 ..= j_max_order` at `x`.
pub fn spherical_bessel_j_array(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    let start = max_order + x.ceil() as usize + 20;

    let mut values = vec![0.0f64; start + 2];
    values[start] = 1e-300;
    for n in (1..=start).rev() {
        let next = (2 * n + 1) as f64 / x * values[n] - values[n + 1];
        values[n - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in values[n - 1..].iter_mut() {
                *v /= RESCALE_ABOVE;
            }
        }
    }

    // Normalise against whichever closed form is better conditioned at x.
    let (sin, cos) = x.sin_cos();
    let j0 = sin / x;
    let j1 = (sin / x - cos) / x;
    let scale = if j0.abs() >= j1.abs() {
        j0 / values[0]
    } else {
        j1 / values[1]
    };

    values.truncate(max_order + 1);
    for v in values.iter_mut() {
        *v *= scale;
    }
    Ok(values)
}

/// Spherical Bessel function of the first kind `j_n(x)`, `x > 0`.
pub fn spherical_bessel_j(n: usize, x: f64) -> Result<f64> {
    Ok(spherical_bessel_j_array(n, x)?[n])
}

/// `y_0 ..= y_max_order` at `x`.
pub fn spherical_bessel_y_array(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    let (sin, cos) = x.sin_cos();
    let mut values = Vec::with_capacity(max_order + 1);
    values.push(-cos / x);
    if max_order >= 1 {
        values.push(-cos / (x * x) - sin / x);
    }
    for n in 1..max_order {
        let next = (2 * n + 1) as f64 / x * values[n] - values[n - 1];
        values.push(next);
    }
    Ok(values)
}

/// `h_0 ..= h_max_order` of the first kind, `h_n = j_n + i y_n`.
pub fn spherical_hankel1_array(max_order: usize, x: f64) -> Result<Vec<Complex64>> {
    let j = spherical_bessel_j_array(max_order, x)?;
    let y = spherical_bessel_y_array(max_order, x)?;
    Ok(j.into_iter().zip(y).map(|(re, im)| Complex64::new(re, im)).collect())
}

pub fn spherical_hankel1(n: usize, x: f64) -> Result<Complex64> {
    Ok(spherical_hankel1_array(n, x)?[n])
}

/// Derivatives `dh_n/dx` for `n = 0..=max_order`.
///
/// Uses `h_n' = h_{n-1} - (n+1)/x h_n` and `h_0' = -h_1`. This is the
/// derivative with respect to the argument; a radial derivative needs the
/// extra factor `k` at the call site.
pub fn spherical_hankel1_deriv_array(max_order: usize, x: f64) -> Result<Vec<Complex64>> {
    let h = spherical_hankel1_array(max_order + 1, x)?;
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(-h[1]);
    for n in 1..=max_order {
        out.push(h[n - 1] - h[n] * ((n + 1) as f64 / x));
    }
    Ok(out)
}

pub fn spherical_hankel1_deriv(n: usize, x: f64) -> Result<Complex64> {
    Ok(spherical_hankel1_deriv_array(n, x)?[n])
}
