//! Gaunt coefficients
//! `G(n,m; ν,μ; q) = ∫ Y_n^m Y_ν^μ (Y_q^{m+μ})* dΩ`.
//!
//! Evaluated through Wigner 3j symbols computed with the Racah sum in exact
//! rational arithmetic; only the final square root is taken in floating point,
//! so there is no cancellation at high orders.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::index::OrderDegree;

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    (1..=n).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

/// Wigner 3j symbol for integer angular momenta.
pub fn wigner_3j(l1: u32, l2: u32, l3: u32, m1: i32, m2: i32, m3: i32) -> f64 {
    let (j1, j2, j3) = (l1 as i64, l2 as i64, l3 as i64);
    let (m1, m2, m3) = (m1 as i64, m2 as i64, m3 as i64);
    if m1 + m2 + m3 != 0 || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3 {
        return 0.0;
    }
    if j3 < (j1 - j2).abs() || j3 > j1 + j2 {
        return 0.0;
    }

    let t_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let t_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    if t_min > t_max {
        return 0.0;
    }

    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let denom = factorial(t)
            * factorial(j3 - j2 + t + m1)
            * factorial(j3 - j1 + t - m2)
            * factorial(j1 + j2 - j3 - t)
            * factorial(j1 - t - m1)
            * factorial(j2 - t + m2);
        let term = BigRational::new(BigInt::one(), denom);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }

    let numer = factorial(j1 + j2 - j3)
        * factorial(j1 - j2 + j3)
        * factorial(-j1 + j2 + j3)
        * factorial(j1 + m1)
        * factorial(j1 - m1)
        * factorial(j2 + m2)
        * factorial(j2 - m2)
        * factorial(j3 + m3)
        * factorial(j3 - m3);
    let prefactor = BigRational::new(numer, factorial(j1 + j2 + j3 + 1));

    let negative = sum.is_negative() ^ ((j1 - j2 - m3).rem_euclid(2) == 1);
    let squared = prefactor * &sum * &sum;
    let magnitude = squared.to_f64().unwrap_or(f64::NAN).sqrt();
    if negative {
        -magnitude
    } else {
        magnitude
    }
}

/// Gaunt coefficient `∫ Y_n^m Y_ν^μ (Y_q^{m+μ})* dΩ`.
///
/// Returns exactly zero whenever the selection rules fail: `n + ν + q` odd,
/// `q` outside `|n - ν| ..= n + ν`, or `|m + μ| > q`.
pub fn gaunt(nm1: OrderDegree, nm2: OrderDegree, q: u32) -> f64 {
    let (n, m, nu, mu) = (nm1.n(), nm1.m(), nm2.n(), nm2.m());
    let total_m = m + mu;
    if total_m.unsigned_abs() > q || (n + nu + q) % 2 == 1 || q < n.abs_diff(nu) || q > n + nu {
        return 0.0;
    }
    let scale = (((2 * n + 1) * (2 * nu + 1) * (2 * q + 1)) as f64 / (4.0 * PI)).sqrt();
    let parity = if total_m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    parity * scale * wigner_3j(n, nu, q, 0, 0, 0) * wigner_3j(n, nu, q, m, mu, -total_m)
}

type GauntKey = (u32, i32, u32, i32, u32);

fn cache() -> &'static RwLock<HashMap<GauntKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<GauntKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// [`gaunt`] behind a process-wide memo table.
///
/// Reads take a shared lock; a miss computes outside any lock and then
/// inserts only if no other thread got there first.
pub fn gaunt_cached(nm1: OrderDegree, nm2: OrderDegree, q: u32) -> f64 {
    let key = (nm1.n(), nm1.m(), nm2.n(), nm2.m(), q);
    if let Some(v) = cache().read().expect("gaunt cache poisoned").get(&key) {
        return *v;
    }
    let value = gaunt(nm1, nm2, q);
    *cache().write().expect("gaunt cache poisoned").entry(key).or_insert(value)
}
