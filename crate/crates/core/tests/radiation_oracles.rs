mod common;

use std::f64::consts::PI;

use extrad::radiation::{
    assemble_kernel, intensity_radial, intensity_radial_from_spectrum, radiated_power_quadrature, radiation_matrix,
    weight_spectrum, AngularSector, BoundingSphere, DirectionalWeight, PowerWeighting, QuadratureSpec, RadiationMatrix,
};
use extrad::scenario::build_desk_scenario;
use extrad::wavefield::{synthesized_spectrum, translated_source_matrix, DrivingSignals, Medium, Vec3};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_signals, random_unit, rel};

fn cardioid() -> DirectionalWeight {
    DirectionalWeight::one_plus_cardioid([1.0, 0.0, 0.0]).unwrap()
}

#[test]
fn cardioid_reconstruction_at_random_directions() {
    let w = cardioid();
    let spec = weight_spectrum(&w).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let theta = rng.gen_range(0.0..PI);
        let phi = rng.gen_range(-PI..PI);
        let y = extrad::specfun::spherical_harmonics(1, theta, phi).unwrap();
        let series: Complex64 = y.iter().zip(spec.coeffs()).map(|(a, b)| a * b).sum();
        let exact = 1.0 + phi.cos() * theta.sin();
        assert!((series.re - exact).abs() < 1e-10 && series.im.abs() < 1e-10);
    }
}

#[test]
fn desk_geometry_quadratic_form_matches_quadrature_at_500_hz() {
    let s = build_desk_scenario();
    let k = s.medium.wavenumber(500.0);
    let order = (k * s.bounding.radius).ceil() as usize + 10;
    let a = radiation_matrix(&s.sources, &cardioid(), &s.bounding, k, &s.medium, order).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..5 {
        let d = random_signals(&mut rng, s.sources.len());
        let quad = radiated_power_quadrature(
            &s.sources,
            &d,
            PowerWeighting::Weighted(&cardioid()),
            &s.bounding.center,
            s.bounding.radius,
            k,
            &s.medium,
            QuadratureSpec::for_order(order),
        )
        .unwrap();
        assert!(rel(a.quadratic_form(&d), quad) < 2e-3);
    }
}

#[test]
fn uniform_through_directional_path_is_scaled_gram_matrix() {
    let s = build_desk_scenario();
    for f in [200.0, 700.0] {
        let k = s.medium.wavenumber(f);
        let order = (k * s.bounding.radius).ceil() as usize + 10;
        let a = radiation_matrix(&s.sources, &DirectionalWeight::Uniform, &s.bounding, k, &s.medium, order).unwrap();
        let c = translated_source_matrix(&s.sources, &s.bounding.center, order, k).unwrap();
        let scale = 1.0 / (2.0 * s.medium.density() * s.medium.sound_speed() * k * k);
        let want = c.adjoint() * &c * Complex64::new(scale, 0.0);
        assert!((a.matrix() - &want).norm() <= 1e-10 * want.norm());
    }
}

#[test]
fn radiation_matrix_is_bitwise_hermitian_and_linear_in_weight() {
    let s = build_desk_scenario();
    let k = s.medium.wavenumber(400.0);
    let order = (k * s.bounding.radius).ceil() as usize;
    let a = radiation_matrix(&s.sources, &cardioid(), &s.bounding, k, &s.medium, order).unwrap();
    assert!(a.is_hermitian());
    for i in 0..a.dim() {
        assert_eq!(a.matrix()[(i, i)].im, 0.0);
    }

    let coeffs = weight_spectrum(&cardioid()).unwrap().coeffs().iter().map(|c| c * 2.0).collect();
    let doubled = DirectionalWeight::Coefficients { max_order: 1, coeffs };
    let a2 = radiation_matrix(&s.sources, &doubled, &s.bounding, k, &s.medium, order).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let d = random_signals(&mut rng, s.sources.len());
        assert!(rel(a2.quadratic_form(&d), 2.0 * a.quadratic_form(&d)) < 1e-12);
    }
}

#[test]
fn total_power_is_radius_independent() {
    let s = build_desk_scenario();
    let k = s.medium.wavenumber(300.0);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let d = random_signals(&mut rng, s.sources.len());
    let power = |radius: f64| {
        radiated_power_quadrature(
            &s.sources,
            &d,
            PowerWeighting::Weighted(&DirectionalWeight::Uniform),
            &Vec3::zeros(),
            radius,
            k,
            &s.medium,
            QuadratureSpec::for_order(30),
        )
        .unwrap()
    };
    assert!(rel(power(1.6), power(0.8)) < 1e-6);
}

#[test]
fn doubling_quadrature_changes_power_negligibly_at_1_khz() {
    let s = build_desk_scenario();
    let k = s.medium.wavenumber(1000.0);
    let order = (k * s.bounding.radius).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let d = random_signals(&mut rng, s.sources.len());
    let spec = QuadratureSpec::for_geometry(order, 0.653f64.hypot(0.2), 0.8);
    for weighting in [PowerWeighting::Weighted(&cardioid()), PowerWeighting::Sector(AngularSector::positive_x())] {
        let p = |q| radiated_power_quadrature(&s.sources, &d, weighting, &Vec3::zeros(), 0.8, k, &s.medium, q).unwrap();
        assert!(rel(p(spec.doubled()), p(spec)) < 1e-6);
    }
}

#[test]
fn sector_halves_add_to_full_sphere() {
    let s = build_desk_scenario();
    let k = s.medium.wavenumber(600.0);
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let d = random_signals(&mut rng, s.sources.len());
    let q = QuadratureSpec::for_geometry(20, 0.653f64.hypot(0.2), 0.8);
    let p = |sector| {
        radiated_power_quadrature(&s.sources, &d, PowerWeighting::Sector(sector), &Vec3::zeros(), 0.8, k, &s.medium, q).unwrap()
    };
    let front = p(AngularSector::positive_x());
    let back = p(AngularSector::new((0.0, PI), (PI / 2.0, 3.0 * PI / 2.0)).unwrap());
    let full = p(AngularSector::full());
    assert!(rel(front + back, full) < 1e-10);

    let order = (k * 0.8).ceil() as usize + 10;
    let a = radiation_matrix(&s.sources, &DirectionalWeight::Uniform, &s.bounding, k, &s.medium, order).unwrap();
    assert!(rel(full, a.quadratic_form(&d)) < 1e-3);
}

#[test]
fn spectrum_intensity_matches_point_source_intensity() {
    let s = build_desk_scenario();
    let k = s.medium.wavenumber(450.0);
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let d = random_signals(&mut rng, s.sources.len());
    let spec = synthesized_spectrum(&s.sources, &d, &Vec3::zeros(), 60, k).unwrap();
    for _ in 0..10 {
        let r = random_unit(&mut rng) * rng.gen_range(0.9..1.5);
        let direct = intensity_radial(&s.sources, &d, &Vec3::zeros(), &r, k, &s.medium).unwrap();
        let series = intensity_radial_from_spectrum(&spec, &r, k, &s.medium).unwrap();
        assert!((direct - series).abs() <= 1e-6 * direct.abs().max(1e-12), "{direct} vs {series}");
    }
}

#[test]
fn kernel_is_exactly_hermitian() {
    let medium = Medium::default();
    let sphere = BoundingSphere::new(Vec3::zeros(), 0.8).unwrap();
    let kernel = assemble_kernel(&weight_spectrum(&cardioid()).unwrap(), &sphere, 5, 3.0, &medium).unwrap();
    let herm = &kernel - kernel.adjoint();
    assert_eq!(herm, DMatrix::zeros(kernel.nrows(), kernel.ncols()));
    let zero = RadiationMatrix::zeros(3);
    assert_eq!(zero.quadratic_form(&DrivingSignals::from_vec(vec![Complex64::new(1.0, 2.0); 3])), 0.0);
}
