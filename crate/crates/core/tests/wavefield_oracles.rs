mod common;

use extrad::specfun::ModalIndexMap;
use extrad::wavefield::{
    evaluate_exterior, greens_function, point_source_self_spectrum, synthesized_spectrum, translate_spectrum,
    translated_source_matrix, translation_operator, DrivingSignals, PointSource, SphericalSpectrum, Vec3,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_signals, random_unit};

fn random_spectrum(rng: &mut ChaCha8Rng, origin: Vec3, order: usize) -> SphericalSpectrum {
    let len = ModalIndexMap::new(order).len();
    let coeffs = (0..len).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    SphericalSpectrum::new(origin, order, coeffs, 0.0).unwrap()
}

#[test]
fn translation_then_evaluation_equals_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let k: f64 = rng.gen_range(0.5..6.0);
        let origin = random_unit(&mut rng) * rng.gen_range(0.0..0.2);
        let spec = random_spectrum(&mut rng, origin, 3);
        let new_origin = origin + random_unit(&mut rng) * rng.gen_range(0.05..0.4);
        let order = (k * 0.4).ceil() as usize + 30;
        let moved = translate_spectrum(&spec, &new_origin, order, k).unwrap();
        let r = new_origin + random_unit(&mut rng) * rng.gen_range(1.5..3.0);
        let direct = evaluate_exterior(&spec, &r, k).unwrap();
        let series = evaluate_exterior(&moved, &r, k).unwrap();
        assert!((direct - series).norm() <= 1e-8 * direct.norm(), "{direct} vs {series}");
    }
}

#[test]
fn translation_round_trip_recovers_low_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let k = rng.gen_range(1.0..4.0);
        let spec = random_spectrum(&mut rng, Vec3::zeros(), 2);
        let shift = random_unit(&mut rng) * 0.2;
        let there = translate_spectrum(&spec, &shift, 30, k).unwrap();
        let back = translate_spectrum(&there, &Vec3::zeros(), 2, k).unwrap();
        for (a, b) in spec.coeffs().iter().zip(back.coeffs()) {
            assert!((a - b).norm() < 1e-6, "{a} vs {b}");
        }
    }
}

#[test]
fn operator_agrees_with_spectrum_translation() {
    let k = 3.0;
    let shift = Vec3::new(0.1, -0.2, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spec = random_spectrum(&mut rng, Vec3::zeros(), 2);
    let moved = translate_spectrum(&spec, &shift, 4, k).unwrap();
    let source_map = ModalIndexMap::new(2);
    for (i, nm) in ModalIndexMap::new(4).iter().enumerate() {
        let want: Complex64 = source_map
            .iter()
            .zip(spec.coeffs())
            .map(|(nu_mu, c)| c * translation_operator(nu_mu, nm, &shift, k).unwrap())
            .sum();
        assert!((moved.coeffs()[i] - want).norm() < 1e-13);
    }
}

#[test]
fn synthesized_spectrum_is_linear_in_signals() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let sources: Vec<PointSource> = (0..4).map(|_| PointSource { position: random_unit(&mut rng) * 0.4 }).collect();
    let k = 2.5;
    let d1 = random_signals(&mut rng, 4);
    let d2 = random_signals(&mut rng, 4);
    let sum = DrivingSignals::new(&*d1 + &*d2);
    let s1 = synthesized_spectrum(&sources, &d1, &Vec3::zeros(), 8, k).unwrap();
    let s2 = synthesized_spectrum(&sources, &d2, &Vec3::zeros(), 8, k).unwrap();
    let s = synthesized_spectrum(&sources, &sum, &Vec3::zeros(), 8, k).unwrap();
    for i in 0..s.coeffs().len() {
        assert!((s.coeffs()[i] - s1.coeffs()[i] - s2.coeffs()[i]).norm() < 1e-14);
    }
    let one = synthesized_spectrum(&sources[..1], &DrivingSignals::from_vec(vec![Complex64::new(1.0, 0.0)]), &Vec3::zeros(), 8, k).unwrap();
    let own = translate_spectrum(&point_source_self_spectrum(&sources[0], k), &Vec3::zeros(), 8, k).unwrap();
    assert_eq!(one.coeffs(), own.coeffs());
}

#[test]
fn synthesized_field_matches_sum_of_greens_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let sources: Vec<PointSource> = (0..6).map(|_| PointSource { position: random_unit(&mut rng) * rng.gen_range(0.1..0.5) }).collect();
    let k = 4.0;
    let d = random_signals(&mut rng, 6);
    let spec = synthesized_spectrum(&sources, &d, &Vec3::zeros(), 40, k).unwrap();
    let c = translated_source_matrix(&sources, &Vec3::zeros(), 40, k).unwrap();
    assert_eq!(c.ncols(), 6);
    for _ in 0..20 {
        let r = random_unit(&mut rng) * rng.gen_range(0.8..2.0);
        let direct: Complex64 = sources.iter().zip(d.iter()).map(|(s, dl)| dl * greens_function(s, &r, k).unwrap()).sum();
        let series = evaluate_exterior(&spec, &r, k).unwrap();
        assert!((direct - series).norm() <= 1e-8 * direct.norm());
    }
}
