//! Point-source transfer functions, exterior spherical-wavefunction
//! expansions, and the exterior-to-exterior translation operator.
//!
//! Time dependence is `e^{-iωt}` throughout, so `h_n` of the first kind is
//! outgoing and the free-field Green's function is `e^{ik|r-r_l|}/(4π|r-r_l|)`.

use std::f64::consts::PI;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::specfun::{
    flat_index, gaunt_cached, harmonics_unchecked, spherical_bessel_j_array, spherical_hankel1_array,
    ModalIndexMap, OrderDegree,
};

pub type Vec3 = Vector3<f64>;

/// Distances below this are treated as coincident points.
const COINCIDENT: f64 = 1e-12;

/// Propagation medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    c: f64,
    rho: f64,
}

impl Medium {
    /// `sound_speed` in m/s, `density` in kg/m³; both must be positive.
    pub fn new(sound_speed: f64, density: f64) -> Result<Self> {
        if !(sound_speed > 0.0 && sound_speed.is_finite()) {
            return Err(Error::InvalidParameter { name: "sound_speed", reason: format!("{sound_speed} is not positive") });
        }
        if !(density > 0.0 && density.is_finite()) {
            return Err(Error::InvalidParameter { name: "density", reason: format!("{density} is not positive") });
        }
        Ok(Self { c: sound_speed, rho: density })
    }

    pub fn sound_speed(&self) -> f64 {
        self.c
    }

    pub fn density(&self) -> f64 {
        self.rho
    }

    /// `k = 2πf / c`.
    pub fn wavenumber(&self, frequency_hz: f64) -> f64 {
        2.0 * PI * frequency_hz / self.c
    }
}

impl Default for Medium {
    fn default() -> Self {
        Self { c: 343.0, rho: 1.2 }
    }
}

/// Monopole secondary source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSource {
    pub position: Vec3,
}

impl PointSource {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { position: Vec3::new(x, y, z) }
    }
}

/// Complex driving signal per source, for one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingSignals(DVector<Complex64>);

impl DrivingSignals {
    pub fn new(values: DVector<Complex64>) -> Self {
        Self(values)
    }

    pub fn from_vec(values: Vec<Complex64>) -> Self {
        Self(DVector::from_vec(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(DVector::zeros(len))
    }

    pub fn into_inner(self) -> DVector<Complex64> {
        self.0
    }
}

impl Deref for DrivingSignals {
    type Target = DVector<Complex64>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

/// `(r, θ, φ)` of a Cartesian vector.
pub fn to_spherical(v: &Vec3) -> (f64, f64, f64) {
    let r = v.norm();
    if r == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let phi = v.y.atan2(v.x);
    (r, theta, phi)
}

fn check_wavenumber(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveArgument(k))
    }
}

/// Coefficients of an exterior expansion `Σ c_n^m h_n(k|r - o|) Y_n^m` about `origin`.
///
/// The expansion converges only farther than `validity_radius` from `origin`;
/// evaluation inside that ball is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSpectrum {
    origin: Vec3,
    max_order: usize,
    coeffs: Vec<Complex64>,
    validity_radius: f64,
}

impl SphericalSpectrum {
    pub fn new(origin: Vec3, max_order: usize, coeffs: Vec<Complex64>, validity_radius: f64) -> Result<Self> {
        let expected = ModalIndexMap::new(max_order).len();
        if coeffs.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: coeffs.len() });
        }
        Ok(Self { origin, max_order, coeffs, validity_radius })
    }

    pub fn zeros(origin: Vec3, max_order: usize) -> Self {
        let len = ModalIndexMap::new(max_order).len();
        Self { origin, max_order, coeffs: vec![Complex64::new(0.0, 0.0); len], validity_radius: 0.0 }
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    /// Coefficient for `nm`, zero beyond the truncation order.
    pub fn coefficient(&self, nm: OrderDegree) -> Complex64 {
        ModalIndexMap::new(self.max_order)
            .flat(nm)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }
}

/// Free-field Green's function `e^{ik d}/(4π d)` with `d = |r - r_l|`.
pub fn greens_function(src: &PointSource, r: &Vec3, k: f64) -> Result<Complex64> {
    let d = (r - src.position).norm();
    if d < COINCIDENT {
        return Err(Error::CoincidentPoints);
    }
    Ok(Complex64::from_polar(1.0 / (4.0 * PI * d), k * d))
}

/// Exterior expansion of a monopole about its own position: only
/// `c_0^0 = ik/sqrt(4π)` is non-zero, since `h_0(x) Y_0^0 = -i e^{ix}/(x sqrt(4π))`.
pub fn point_source_self_spectrum(src: &PointSource, k: f64) -> SphericalSpectrum {
    let coeff = Complex64::new(0.0, k / (4.0 * PI).sqrt());
    SphericalSpectrum { origin: src.position, max_order: 0, coeffs: vec![coeff], validity_radius: 0.0 }
}

/// `i^p` for integer `p`.
fn i_pow(p: i64) -> Complex64 {
    match p.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Sum over `q` of the translation coefficient, given precomputed `j_q(kr)` and
/// `Y_q(θ, φ)` tables that reach at least order `ν + n`.
fn translation_sum(nu: u32, mu: i32, n: u32, m: i32, bessel: &[f64], harmonics: &[Complex64]) -> Complex64 {
    let from = OrderDegree::new(nu, mu).expect("valid source index");
    let to_conj = OrderDegree::new(n, -m).expect("valid target index");
    let mu_sign = if mu.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mut sum = Complex64::new(0.0, 0.0);
    let q_min = nu.abs_diff(n).max((m - mu).unsigned_abs());
    for q in q_min..=(nu + n) {
        if (nu + n + q) % 2 == 1 {
            continue;
        }
        let g = gaunt_cached(from, to_conj, q);
        if g == 0.0 {
            continue;
        }
        let y = harmonics[flat_index(q as usize, m - mu)].conj();
        sum += i_pow(q as i64) * y * (mu_sign * bessel[q as usize] * g);
    }
    sum * i_pow(n as i64 - nu as i64) * (4.0 * PI)
}

/// Exterior-to-exterior translation coefficient `Ŝ_{ν,n}^{μ,m}(displacement)`:
///
/// `4π i^{n-ν} Σ_{q=|ν-n|}^{ν+n} i^q (-1)^μ j_q(kr) Y_q^{m-μ}(θ,φ)* G(ν,μ; n,-m; q)`
///
/// where `displacement = new_origin - old_origin`.
pub fn translation_operator(nu_mu: OrderDegree, nm: OrderDegree, displacement: &Vec3, k: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    let (r, theta, phi) = to_spherical(displacement);
    if r < COINCIDENT {
        return Err(Error::CoincidentPoints);
    }
    let top = (nu_mu.n() + nm.n()) as usize;
    let bessel = spherical_bessel_j_array(top, k * r)?;
    let harmonics = harmonics_unchecked(top, theta, phi);
    Ok(translation_sum(nu_mu.n(), nu_mu.m(), nm.n(), nm.m(), &bessel, &harmonics))
}

/// Re-expand `spec` about `new_origin`, truncated at `new_max_order`.
///
/// The result is valid farther than `spec.validity_radius + |new_origin - origin|`
/// from the new origin, which is recorded on the returned spectrum.
pub fn translate_spectrum(
    spec: &SphericalSpectrum,
    new_origin: &Vec3,
    new_max_order: usize,
    k: f64,
) -> Result<SphericalSpectrum> {
    check_wavenumber(k)?;
    let displacement = new_origin - spec.origin;
    let (r, theta, phi) = to_spherical(&displacement);
    if r < COINCIDENT {
        return Err(Error::CoincidentPoints);
    }
    let top = spec.max_order + new_max_order;
    let bessel = spherical_bessel_j_array(top, k * r)?;
    let harmonics = harmonics_unchecked(top, theta, phi);

    let sources: Vec<(OrderDegree, Complex64)> = ModalIndexMap::new(spec.max_order)
        .iter()
        .zip(spec.coeffs.iter().copied())
        .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
        .collect();

    let coeffs = ModalIndexMap::new(new_max_order)
        .iter()
        .map(|nm| {
            sources
                .iter()
                .map(|(src, c)| c * translation_sum(src.n(), src.m(), nm.n(), nm.m(), &bessel, &harmonics))
                .sum()
        })
        .collect();

    Ok(SphericalSpectrum {
        origin: *new_origin,
        max_order: new_max_order,
        coeffs,
        validity_radius: spec.validity_radius + r,
    })
}

/// Partial sum `Σ_{n<=N} c_n^m h_n(k|r-o|) Y_n^m(θ, φ)`.
pub fn evaluate_exterior(spec: &SphericalSpectrum, r: &Vec3, k: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    let (dist, theta, phi) = to_spherical(&(r - spec.origin));
    if dist <= spec.validity_radius || dist < COINCIDENT {
        return Err(Error::InsideValidityRadius { distance: dist, radius: spec.validity_radius });
    }
    let hankel = spherical_hankel1_array(spec.max_order, k * dist)?;
    let harmonics = harmonics_unchecked(spec.max_order, theta, phi);
    Ok(ModalIndexMap::new(spec.max_order)
        .iter()
        .enumerate()
        .map(|(i, nm)| spec.coeffs[i] * hankel[nm.n() as usize] * harmonics[i])
        .sum())
}

/// Matrix whose column `l` holds the coefficients of source `l`'s field
/// expanded about `center` through order `max_order`.
pub fn translated_source_matrix(
    sources: &[PointSource],
    center: &Vec3,
    max_order: usize,
    k: f64,
) -> Result<DMatrix<Complex64>> {
    check_wavenumber(k)?;
    let rows = ModalIndexMap::new(max_order).len();
    let mut out = DMatrix::zeros(rows, sources.len());
    for (l, src) in sources.iter().enumerate() {
        let own = point_source_self_spectrum(src, k);
        if (src.position - center).norm() < COINCIDENT {
            // translation by zero is the identity
            out[(0, l)] = own.coeffs[0];
            continue;
        }
        let spec = translate_spectrum(&own, center, max_order, k)?;
        out.column_mut(l).copy_from_slice(&spec.coeffs);
    }
    Ok(out)
}

/// Spectrum of `Σ_l d_l g_l` about `center`.
pub fn synthesized_spectrum(
    sources: &[PointSource],
    d: &DrivingSignals,
    center: &Vec3,
    max_order: usize,
    k: f64,
) -> Result<SphericalSpectrum> {
    if d.len() != sources.len() {
        return Err(Error::LengthMismatch { expected: sources.len(), actual: d.len() });
    }
    let c = translated_source_matrix(sources, center, max_order, k)?;
    let coeffs = (c * &d.0).iter().copied().collect();
    let validity_radius = sources.iter().map(|s| (s.position - center).norm()).fold(0.0, f64::max);
    Ok(SphericalSpectrum { origin: *center, max_order, coeffs, validity_radius })
}
