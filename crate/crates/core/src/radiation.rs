//! Directionally weighted exterior radiation power as a Hermitian quadratic
//! form `E(d) = d^H A d`, plus direct quadrature of the radiated power.
//!
//! With the synthesized field expanded about the sphere centre as
//! `u = Σ c_n^m h_n(kr) Y_n^m` and the weight as `w = Σ w̃_ν^μ Y_ν^μ`,
//! integrating the radial intensity times `w` over the sphere of radius `R`
//! collapses (via Gaunt coefficients) to `c^H K c`. Stacking the translated
//! source spectra as columns of `C` gives `A = C^H K C`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{sector_rule, sphere_rule, SphereNode};
use crate::specfun::{
    gaunt_cached, harmonics_unchecked, spherical_hankel1_array, spherical_hankel1_deriv_array, ModalIndexMap,
    OrderDegree,
};
use crate::wavefield::{
    to_spherical, translated_source_matrix, DrivingSignals, Medium, PointSource, SphericalSpectrum, Vec3,
};

/// Lowest weight value tolerated by the non-negativity check.
const WEIGHT_FLOOR: f64 = -1e-9;

/// Angular weighting `w(θ, φ) >= 0` of the exterior radiation.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionalWeight {
    /// `w ≡ 1`.
    Uniform,
    /// `w = 1 + axis · r̂`; `|axis| <= 1` keeps it non-negative.
    /// The axis `(1, 0, 0)` gives `1 + cos φ sin θ`.
    OnePlusCardioid { axis: [f64; 3] },
    /// Explicit expansion coefficients in [`ModalIndexMap`] order.
    Coefficients { max_order: usize, coeffs: Vec<Complex64> },
}

impl DirectionalWeight {
    pub fn one_plus_cardioid(axis: [f64; 3]) -> Result<Self> {
        let w = Self::OnePlusCardioid { axis };
        w.check_nonnegative()?;
        Ok(w)
    }

    pub fn from_coefficients(max_order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = ModalIndexMap::new(max_order).len();
        if coeffs.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: coeffs.len() });
        }
        let w = Self::Coefficients { max_order, coeffs };
        w.check_nonnegative()?;
        Ok(w)
    }

    /// Project a real angular function onto harmonics through `max_order`.
    ///
    /// Fails when the truncated expansion misses `f` by more than `1e-8`
    /// (relative to `max |f|`) on an independent check grid.
    pub fn project<F>(f: F, max_order: usize) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64,
    {
        let map = ModalIndexMap::new(max_order);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); map.len()];
        for node in sphere_rule(max_order + 24, 2 * max_order + 48) {
            let value = f(node.theta, node.phi) * node.weight;
            let y = harmonics_unchecked(max_order, node.theta, node.phi);
            for (c, yi) in coeffs.iter_mut().zip(&y) {
                *c += yi.conj() * value;
            }
        }
        let w = Self::Coefficients { max_order, coeffs };

        let mut residual = 0.0f64;
        let mut scale = 0.0f64;
        for node in sphere_rule(37, 73) {
            let exact = f(node.theta, node.phi);
            residual = residual.max((w.value(node.theta, node.phi) - exact).abs());
            scale = scale.max(exact.abs());
        }
        if residual > 1e-8 * scale.max(1.0) {
            return Err(Error::ProjectionResidual { order: max_order, residual });
        }
        w.check_nonnegative()?;
        Ok(w)
    }

    /// Highest harmonic order present in the expansion.
    pub fn max_order(&self) -> usize {
        match self {
            Self::Uniform => 0,
            Self::OnePlusCardioid { .. } => 1,
            Self::Coefficients { max_order, .. } => *max_order,
        }
    }

    pub fn value(&self, theta: f64, phi: f64) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::OnePlusCardioid { axis } => {
                let (st, ct) = theta.sin_cos();
                1.0 + axis[0] * st * phi.cos() + axis[1] * st * phi.sin() + axis[2] * ct
            }
            Self::Coefficients { max_order, coeffs } => harmonics_unchecked(*max_order, theta, phi)
                .iter()
                .zip(coeffs)
                .map(|(y, c)| (y * c).re)
                .sum(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Uniform => "uniform".to_string(),
            Self::OnePlusCardioid { axis } => format!("one_plus_cardioid axis=({}, {}, {})", axis[0], axis[1], axis[2]),
            Self::Coefficients { max_order, .. } => format!("coefficients order={max_order}"),
        }
    }

    /// Dense angular sampling; errors with the most negative sample below `-1e-9`.
    pub fn check_nonnegative(&self) -> Result<()> {
        let (n_theta, n_phi) = (91, 180);
        let mut min = f64::INFINITY;
        for i in 0..=n_theta {
            let theta = PI * i as f64 / n_theta as f64;
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64 - PI;
                min = min.min(self.value(theta, phi));
            }
        }
        if min < WEIGHT_FLOOR {
            return Err(Error::NegativeWeight(min));
        }
        Ok(())
    }
}

/// Expansion coefficients `w̃_n^m` of the weight.
///
/// Closed-form families are expanded analytically; the result is an angular
/// function, so its origin is the coordinate origin and its validity radius zero.
pub fn weight_spectrum(w: &DirectionalWeight) -> Result<SphericalSpectrum> {
    let origin = Vec3::zeros();
    let root_four_pi = (4.0 * PI).sqrt();
    match w {
        DirectionalWeight::Uniform => SphericalSpectrum::new(origin, 0, vec![Complex64::new(root_four_pi, 0.0)], 0.0),
        DirectionalWeight::OnePlusCardioid { axis } => {
            // x = sqrt(2π/3)(Y_1^{-1} - Y_1^1), y = i sqrt(2π/3)(Y_1^{-1} + Y_1^1), z = sqrt(4π/3) Y_1^0
            let s = (2.0 * PI / 3.0).sqrt();
            let coeffs = vec![
                Complex64::new(root_four_pi, 0.0),
                Complex64::new(s * axis[0], s * axis[1]),
                Complex64::new((4.0 * PI / 3.0).sqrt() * axis[2], 0.0),
                Complex64::new(-s * axis[0], s * axis[1]),
            ];
            SphericalSpectrum::new(origin, 1, coeffs, 0.0)
        }
        DirectionalWeight::Coefficients { max_order, coeffs } => {
            SphericalSpectrum::new(origin, *max_order, coeffs.clone(), 0.0)
        }
    }
}

/// Sphere `Ω_S` enclosing every secondary source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingSphere {
    pub center: Vec3,
    pub radius: f64,
}

impl BoundingSphere {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter { name: "radius", reason: format!("{radius} is not positive") });
        }
        Ok(Self { center, radius })
    }

    pub fn check_contains(&self, sources: &[PointSource]) -> Result<()> {
        for src in sources {
            let distance = (src.position - self.center).norm();
            if distance >= self.radius {
                return Err(Error::SourceOutsideSphere { distance, radius: self.radius });
            }
        }
        Ok(())
    }
}

/// Hermitian kernel `K` over modal indices with `E = c^H K c` for exterior
/// coefficients `c` about the sphere centre.
///
/// `T[(n',m'),(n,m)] = Σ_{ν,μ} w̃_ν^μ h_n(kR) (k h'_{n'}(kR))* G(n,m; ν,μ; n')`
/// with `m' = m + μ`, and `K = -(R²/2ρck) (T - T^H)/(2i)`, which equals
/// `-(R²/2ρck) Im[c^H T c]` as a form. The factor `k` on `h'` is the radial
/// chain rule and is applied here only.
pub fn assemble_kernel(
    weight: &SphericalSpectrum,
    sphere: &BoundingSphere,
    max_order: usize,
    k: f64,
    medium: &Medium,
) -> Result<DMatrix<Complex64>> {
    let x = k * sphere.radius;
    let hankel = spherical_hankel1_array(max_order, x)?;
    let deriv = spherical_hankel1_deriv_array(max_order, x)?;
    let map = ModalIndexMap::new(max_order);
    let size = map.len();

    let weights: Vec<(OrderDegree, Complex64)> = ModalIndexMap::new(weight.max_order())
        .iter()
        .zip(weight.coeffs().iter().copied())
        .filter(|(_, c)| c.norm() != 0.0)
        .collect();

    let mut t = DMatrix::<Complex64>::zeros(size, size);
    for (col, nm) in map.iter().enumerate() {
        let n = nm.n();
        for (nu_mu, w) in &weights {
            let m_out = nm.m() + nu_mu.m();
            let lo = n.abs_diff(nu_mu.n()).max(m_out.unsigned_abs());
            let hi = (n + nu_mu.n()).min(max_order as u32);
            for n_out in lo..=hi {
                let g = gaunt_cached(nm, *nu_mu, n_out);
                if g == 0.0 {
                    continue;
                }
                let row = map.flat(OrderDegree::new(n_out, m_out)?).expect("row within truncation");
                t[(row, col)] += w * hankel[n as usize] * (deriv[n_out as usize] * k).conj() * g;
            }
        }
    }

    let scale = -sphere.radius * sphere.radius / (2.0 * medium.density() * medium.sound_speed() * k);
    let two_i = Complex64::new(0.0, 2.0);
    Ok(DMatrix::from_fn(size, size, |i, j| (t[(i, j)] - t[(j, i)].conj()) / two_i * scale))
}

/// `A` with `d^H A d` the weighted exterior radiation power, plus what it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationMatrix {
    matrix: DMatrix<Complex64>,
    wavenumber: f64,
    radius: f64,
    order: usize,
    weight: String,
}

impl RadiationMatrix {
    /// `C^H K C`, made exactly Hermitian.
    pub fn from_parts(
        source_matrix: &DMatrix<Complex64>,
        kernel: &DMatrix<Complex64>,
        wavenumber: f64,
        radius: f64,
        order: usize,
        weight: String,
    ) -> Self {
        let raw = source_matrix.adjoint() * kernel * source_matrix;
        let n = raw.nrows();
        let matrix = DMatrix::from_fn(n, n, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
        Self { matrix, wavenumber, radius, order, weight }
    }

    /// No penalty: the `L × L` zero matrix.
    pub fn zeros(sources: usize) -> Self {
        Self { matrix: DMatrix::zeros(sources, sources), wavenumber: 0.0, radius: 0.0, order: 0, weight: "none".into() }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weight(&self) -> &str {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Re(d^H A d)`; the imaginary part vanishes up to rounding.
    pub fn quadratic_form(&self, d: &DrivingSignals) -> f64 {
        d.dotc(&(&self.matrix * &**d)).re
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn is_hermitian(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.matrix[(i, j)] == self.matrix[(j, i)].conj()))
    }
}

/// Assemble `A` for `sources` through truncation order `max_order`.
pub fn radiation_matrix(
    sources: &[PointSource],
    weight: &DirectionalWeight,
    sphere: &BoundingSphere,
    k: f64,
    medium: &Medium,
    max_order: usize,
) -> Result<RadiationMatrix> {
    sphere.check_contains(sources)?;
    let c = translated_source_matrix(sources, &sphere.center, max_order, k)?;
    let kernel = assemble_kernel(&weight_spectrum(weight)?, sphere, max_order, k, medium)?;
    Ok(RadiationMatrix::from_parts(&c, &kernel, k, sphere.radius, max_order, weight.describe()))
}

fn source_extent(sources: &[PointSource], center: &Vec3) -> f64 {
    sources.iter().map(|s| (s.position - center).norm()).fold(0.0, f64::max)
}

/// Time-averaged radial intensity `½ Re[u (i/ρck) ∂_r u*]` at `r`, radial
/// with respect to `center`, from the point-source field and its analytic
/// radial derivative.
pub fn intensity_radial(
    sources: &[PointSource],
    d: &DrivingSignals,
    center: &Vec3,
    r: &Vec3,
    k: f64,
    medium: &Medium,
) -> Result<f64> {
    if d.len() != sources.len() {
        return Err(Error::LengthMismatch { expected: sources.len(), actual: d.len() });
    }
    let rel = r - center;
    let dist = rel.norm();
    let extent = source_extent(sources, center);
    if dist <= extent {
        return Err(Error::InsideValidityRadius { distance: dist, radius: extent });
    }
    let radial = rel / dist;
    let (u, du) = field_and_radial_derivative(sources, d, r, &radial, k);
    Ok(intensity(u, du, k, medium))
}

fn field_and_radial_derivative(
    sources: &[PointSource],
    d: &DrivingSignals,
    r: &Vec3,
    radial: &Vec3,
    k: f64,
) -> (Complex64, Complex64) {
    let mut u = Complex64::new(0.0, 0.0);
    let mut du = Complex64::new(0.0, 0.0);
    for (src, dl) in sources.iter().zip(d.iter()) {
        let diff = r - src.position;
        let rho = diff.norm();
        let g = Complex64::from_polar(1.0 / (4.0 * PI * rho), k * rho);
        let dg = g * Complex64::new(-1.0 / rho, k) * (diff.dot(radial) / rho);
        u += dl * g;
        du += dl * dg;
    }
    (u, du)
}

#[inline]
fn intensity(u: Complex64, du: Complex64, k: f64, medium: &Medium) -> f64 {
    let factor = Complex64::new(0.0, 1.0 / (medium.density() * medium.sound_speed() * k));
    0.5 * (u * factor * du.conj()).re
}

/// Radial intensity from an exterior spectrum, differentiating `h_n(kr)` analytically.
pub fn intensity_radial_from_spectrum(spec: &SphericalSpectrum, r: &Vec3, k: f64, medium: &Medium) -> Result<f64> {
    let (dist, theta, phi) = to_spherical(&(r - spec.origin()));
    if dist <= spec.validity_radius() || dist == 0.0 {
        return Err(Error::InsideValidityRadius { distance: dist, radius: spec.validity_radius() });
    }
    let order = spec.max_order();
    let h = spherical_hankel1_array(order, k * dist)?;
    let dh = spherical_hankel1_deriv_array(order, k * dist)?;
    let y = harmonics_unchecked(order, theta, phi);
    let mut u = Complex64::new(0.0, 0.0);
    let mut du = Complex64::new(0.0, 0.0);
    for (i, nm) in ModalIndexMap::new(order).iter().enumerate() {
        let n = nm.n() as usize;
        u += spec.coeffs()[i] * h[n] * y[i];
        du += spec.coeffs()[i] * dh[n] * k * y[i];
    }
    Ok(intensity(u, du, k, medium))
}

/// Zenith/azimuth box `[θ1, θ2] × [φ1, φ2]`, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSector {
    pub theta: (f64, f64),
    pub phi: (f64, f64),
}

impl AngularSector {
    pub fn new(theta: (f64, f64), phi: (f64, f64)) -> Result<Self> {
        let ok_theta = 0.0 <= theta.0 && theta.0 < theta.1 && theta.1 <= PI;
        let ok_phi = phi.0 < phi.1 && phi.1 - phi.0 <= 2.0 * PI && phi.0.is_finite() && phi.1.is_finite();
        if !ok_theta || !ok_phi {
            return Err(Error::InvalidParameter {
                name: "sector",
                reason: format!("theta {theta:?} / phi {phi:?} is not a valid angular box"),
            });
        }
        Ok(Self { theta, phi })
    }

    /// The half-space `x > 0`: `θ ∈ [0, π]`, `φ ∈ [-π/2, π/2]`.
    pub fn positive_x() -> Self {
        Self { theta: (0.0, PI), phi: (-PI / 2.0, PI / 2.0) }
    }

    pub fn full() -> Self {
        Self { theta: (0.0, PI), phi: (-PI, PI) }
    }
}

/// What the radiated-power quadrature integrates over.
#[derive(Debug, Clone, Copy)]
pub enum PowerWeighting<'a> {
    /// Whole sphere with intensity multiplied by `w(θ, φ)`.
    Weighted(&'a DirectionalWeight),
    /// Unweighted intensity over an angular sector.
    Sector(AngularSector),
}

/// Node counts for the angular quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl QuadratureSpec {
    /// `2(N + 10)` zenith by `4(N + 10)` azimuth nodes.
    pub fn for_order(order: usize) -> Self {
        Self { n_theta: 2 * (order + 10), n_phi: 4 * (order + 10) }
    }

    /// [`Self::for_order`], raised to resolve sources close to the sphere.
    ///
    /// The field of a source at distance `extent` seen on radius `radius`
    /// carries angular content decaying like `(extent / radius)^n`; the rule
    /// keeps at least the `n` where that falls to `1e-8` (`2n` in azimuth).
    pub fn for_geometry(order: usize, extent: f64, radius: f64) -> Self {
        let base = Self::for_order(order);
        let ratio = extent / radius;
        let reach = if ratio > 0.0 && ratio < 1.0 { (1e-8f64.ln() / ratio.ln()).ceil() as usize } else { 0 };
        Self { n_theta: base.n_theta.max(reach), n_phi: base.n_phi.max(2 * reach) }
    }

    pub fn doubled(self) -> Self {
        Self { n_theta: 2 * self.n_theta, n_phi: 2 * self.n_phi }
    }
}

/// Radiated power through the sphere of radius `radius` about `center`:
/// `∫ I_r w R² dΩ` or the unweighted sector integral.
#[allow(clippy::too_many_arguments)]
pub fn radiated_power_quadrature(
    sources: &[PointSource],
    d: &DrivingSignals,
    weighting: PowerWeighting<'_>,
    center: &Vec3,
    radius: f64,
    k: f64,
    medium: &Medium,
    quad: QuadratureSpec,
) -> Result<f64> {
    if quad.n_theta == 0 || quad.n_phi == 0 {
        return Err(Error::InvalidParameter { name: "quadrature", reason: "node counts must be positive".into() });
    }
    if d.len() != sources.len() {
        return Err(Error::LengthMismatch { expected: sources.len(), actual: d.len() });
    }
    let extent = source_extent(sources, center);
    if radius <= extent {
        return Err(Error::InsideValidityRadius { distance: radius, radius: extent });
    }
    let (nodes, weight): (Vec<SphereNode>, Option<&DirectionalWeight>) = match weighting {
        PowerWeighting::Weighted(w) => (sphere_rule(quad.n_theta, quad.n_phi), Some(w)),
        PowerWeighting::Sector(s) => (sector_rule(quad.n_theta, quad.n_phi, s.theta, s.phi), None),
    };
    let mut total = 0.0;
    for node in nodes {
        let (st, ct) = node.theta.sin_cos();
        let radial = Vec3::new(st * node.phi.cos(), st * node.phi.sin(), ct);
        let r = center + radial * radius;
        let (u, du) = field_and_radial_derivative(sources, d, &r, &radial, k);
        let w = weight.map_or(1.0, |w| w.value(node.theta, node.phi));
        total += intensity(u, du, k, medium) * w * node.weight;
    }
    Ok(total * radius * radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_weight() -> DirectionalWeight {
        DirectionalWeight::one_plus_cardioid([1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn uniform_weight_spectrum() {
        let s = weight_spectrum(&DirectionalWeight::Uniform).unwrap();
        assert_eq!(s.max_order(), 0);
        assert!((s.coeffs()[0].re - (4.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cardioid_coefficients() {
        let s = weight_spectrum(&desk_weight()).unwrap();
        let c = s.coeffs();
        let root = (2.0 * PI / 3.0).sqrt();
        assert!((c[0].re - (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((c[1] - Complex64::new(root, 0.0)).norm() < 1e-15); // m = -1
        assert_eq!(c[2], Complex64::new(0.0, 0.0));
        assert!((c[3] - Complex64::new(-root, 0.0)).norm() < 1e-15); // m = +1
    }

    #[test]
    fn cardioid_projection_agrees_with_closed_form() {
        let projected = DirectionalWeight::project(|t, p| 1.0 + p.cos() * t.sin(), 1).unwrap();
        let closed = weight_spectrum(&desk_weight()).unwrap();
        if let DirectionalWeight::Coefficients { coeffs, .. } = projected {
            for (a, b) in coeffs.iter().zip(closed.coeffs()) {
                assert!((a - b).norm() < 1e-13);
            }
        } else {
            unreachable!();
        }
    }

    #[test]
    fn projection_residual_is_reported() {
        let err = DirectionalWeight::project(|t, _| (3.0 * t).cos().abs() + 1.0, 2).unwrap_err();
        assert!(matches!(err, Error::ProjectionResidual { order: 2, .. }));
    }

    #[test]
    fn negative_weights_are_rejected() {
        assert!(matches!(DirectionalWeight::one_plus_cardioid([1.5, 0.0, 0.0]), Err(Error::NegativeWeight(_))));
        let s = (2.0 * PI / 3.0).sqrt();
        let coeffs = vec![Complex64::new(0.0, 0.0), Complex64::new(s, 0.0), Complex64::new(0.0, 0.0), Complex64::new(-s, 0.0)];
        assert!(DirectionalWeight::from_coefficients(1, coeffs).is_err());
    }

    #[test]
    fn uniform_kernel_is_wronskian_diagonal() {
        let medium = Medium::default();
        let sphere = BoundingSphere::new(Vec3::zeros(), 0.8).unwrap();
        let k = 5.0;
        let kernel = assemble_kernel(&weight_spectrum(&DirectionalWeight::Uniform).unwrap(), &sphere, 8, k, &medium).unwrap();
        let want = 1.0 / (2.0 * medium.density() * medium.sound_speed() * k * k);
        for i in 0..kernel.nrows() {
            for j in 0..kernel.ncols() {
                if i == j {
                    assert!((kernel[(i, i)].re - want).abs() / want < 1e-10);
                    assert!(kernel[(i, i)].im.abs() < 1e-12 * want);
                } else {
                    assert_eq!(kernel[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn zero_weight_gives_zero_kernel() {
        let zero = SphericalSpectrum::zeros(Vec3::zeros(), 1);
        let sphere = BoundingSphere::new(Vec3::zeros(), 0.8).unwrap();
        let kernel = assemble_kernel(&zero, &sphere, 5, 3.0, &Medium::default()).unwrap();
        assert!(kernel.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn order_one_weight_couples_neighbours_only() {
        let sphere = BoundingSphere::new(Vec3::zeros(), 0.8).unwrap();
        let kernel = assemble_kernel(&weight_spectrum(&desk_weight()).unwrap(), &sphere, 6, 4.0, &Medium::default()).unwrap();
        let map = ModalIndexMap::new(6);
        for (i, a) in map.iter().enumerate() {
            for (j, b) in map.iter().enumerate() {
                if a.n().abs_diff(b.n()) > 1 || (a.m() - b.m()).abs() > 1 {
                    assert_eq!(kernel[(i, j)], Complex64::new(0.0, 0.0), "{a:?} {b:?}");
                }
            }
        }
    }

    #[test]
    fn centred_monopole_power() {
        // Unit monopole radiates 1/(8πρc) in total.
        let medium = Medium::default();
        let sphere = BoundingSphere::new(Vec3::zeros(), 0.8).unwrap();
        let sources = [PointSource::new(0.0, 0.0, 0.0)];
        let k = 3.0;
        let a = radiation_matrix(&sources, &DirectionalWeight::Uniform, &sphere, k, &medium, 4).unwrap();
        let want = 1.0 / (8.0 * PI * medium.density() * medium.sound_speed());
        assert!((a.matrix()[(0, 0)].re - want).abs() / want < 1e-12);
        let quad = radiated_power_quadrature(
            &sources,
            &DrivingSignals::from_vec(vec![Complex64::new(1.0, 0.0)]),
            PowerWeighting::Weighted(&DirectionalWeight::Uniform),
            &sphere.center,
            sphere.radius,
            k,
            &medium,
            QuadratureSpec::for_order(4),
        )
        .unwrap();
        assert!((quad - want).abs() / want < 1e-12);
    }

    #[test]
    fn monopole_intensity_closed_form() {
        // I_r = |g|^2 / (2ρc) for a monopole observed radially.
        let medium = Medium::default();
        let sources = [PointSource::new(0.0, 0.0, 0.0)];
        let d = DrivingSignals::from_vec(vec![Complex64::new(0.7, -0.2)]);
        let r = Vec3::new(0.3, -0.5, 0.6);
        let k = 4.4;
        let got = intensity_radial(&sources, &d, &Vec3::zeros(), &r, k, &medium).unwrap();
        let g = d[0].norm() / (4.0 * PI * r.norm());
        let want = g * g / (2.0 * medium.density() * medium.sound_speed());
        assert!((got - want).abs() / want < 1e-13);
    }

    #[test]
    fn zero_drive_radiates_nothing() {
        let medium = Medium::default();
        let sources = [PointSource::new(0.1, 0.0, 0.0), PointSource::new(0.0, 0.2, 0.0)];
        let d = DrivingSignals::zeros(2);
        assert_eq!(intensity_radial(&sources, &d, &Vec3::zeros(), &Vec3::new(0.8, 0.0, 0.0), 2.0, &medium).unwrap(), 0.0);
        let p = radiated_power_quadrature(
            &sources,
            &d,
            PowerWeighting::Sector(AngularSector::positive_x()),
            &Vec3::zeros(),
            0.8,
            2.0,
            &medium,
            QuadratureSpec::for_order(3),
        )
        .unwrap();
        assert_eq!(p, 0.0);
        let a = radiation_matrix(&sources, &desk_weight(), &BoundingSphere::new(Vec3::zeros(), 0.8).unwrap(), 2.0, &medium, 6).unwrap();
        assert_eq!(a.quadratic_form(&d), 0.0);
    }

    #[test]
    fn source_outside_sphere_is_rejected() {
        let sphere = BoundingSphere::new(Vec3::zeros(), 0.8).unwrap();
        let sources = [PointSource::new(0.9, 0.0, 0.0)];
        let err = radiation_matrix(&sources, &DirectionalWeight::Uniform, &sphere, 2.0, &Medium::default(), 4);
        assert!(matches!(err, Err(Error::SourceOutsideSphere { .. })));
    }

    #[test]
    fn intensity_inside_source_region_is_rejected() {
        let sources = [PointSource::new(0.5, 0.0, 0.0)];
        let d = DrivingSignals::from_vec(vec![Complex64::new(1.0, 0.0)]);
        let err = intensity_radial(&sources, &d, &Vec3::zeros(), &Vec3::new(0.0, 0.3, 0.0), 1.0, &Medium::default());
        assert!(matches!(err, Err(Error::InsideValidityRadius { .. })));
    }

    #[test]
    fn sector_validation() {
        assert!(AngularSector::new((0.0, PI), (-PI / 2.0, PI / 2.0)).is_ok());
        assert!(AngularSector::new((1.0, 0.5), (0.0, 1.0)).is_err());
        assert!(AngularSector::new((0.0, 4.0), (0.0, 1.0)).is_err());
        assert!(AngularSector::new((0.0, 1.0), (0.0, 7.0)).is_err());
    }
}
