use extrad::quadrature::sphere_rule;
use extrad::specfun::{
    gaunt, spherical_bessel_j_array, spherical_bessel_y_array, spherical_hankel1_array, spherical_hankel1_deriv_array,
    spherical_harmonics, ModalIndexMap, OrderDegree,
};
use num_complex::Complex64;

#[test]
fn harmonics_are_orthonormal_through_order_eight() {
    let map = ModalIndexMap::new(8);
    let mut gram = vec![Complex64::new(0.0, 0.0); map.len() * map.len()];
    for node in sphere_rule(20, 40) {
        let y = spherical_harmonics(8, node.theta, node.phi).unwrap();
        for i in 0..map.len() {
            for j in 0..map.len() {
                gram[i * map.len() + j] += y[i] * y[j].conj() * node.weight;
            }
        }
    }
    for i in 0..map.len() {
        for j in 0..map.len() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((gram[i * map.len() + j] - want).norm() < 1e-12, "({i}, {j})");
        }
    }
}

#[test]
fn negative_degree_symmetry() {
    for &(theta, phi) in &[(0.4, 1.0), (2.2, -2.5)] {
        let y = spherical_harmonics(6, theta, phi).unwrap();
        let map = ModalIndexMap::new(6);
        for nm in map.iter() {
            let mirror = OrderDegree::new(nm.n(), -nm.m()).unwrap();
            let sign = if nm.m().rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let a = y[map.flat(mirror).unwrap()];
            let b = y[map.flat(nm).unwrap()].conj() * sign;
            assert!((a - b).norm() < 1e-15);
        }
    }
}

#[test]
fn gaunt_matches_quadrature_sample() {
    let nodes = sphere_rule(12, 24);
    let tables: Vec<Vec<Complex64>> = nodes.iter().map(|n| spherical_harmonics(6, n.theta, n.phi).unwrap()).collect();
    let map = ModalIndexMap::new(6);
    let cases = [((2, 1), (3, -2), 3), ((1, 1), (1, 1), 2), ((3, 0), (3, 0), 6), ((2, -2), (2, 2), 2), ((1, -1), (2, 1), 1)];
    for ((n, m), (nu, mu), q) in cases {
        let a = OrderDegree::new(n, m).unwrap();
        let b = OrderDegree::new(nu, mu).unwrap();
        let c = OrderDegree::new(q, m + mu).unwrap();
        let quad: Complex64 = nodes
            .iter()
            .zip(&tables)
            .map(|(node, y)| y[map.flat(a).unwrap()] * y[map.flat(b).unwrap()] * y[map.flat(c).unwrap()].conj() * node.weight)
            .sum();
        assert!((quad.re - gaunt(a, b, q)).abs() < 1e-13 && quad.im.abs() < 1e-13, "{a:?} {b:?} {q}");
    }
}

#[test]
fn gaunt_exchange_symmetry() {
    for n in 0..5u32 {
        for nu in 0..5u32 {
            for m in -(n as i32)..=n as i32 {
                for mu in -(nu as i32)..=nu as i32 {
                    for q in 0..=(n + nu) {
                        let a = OrderDegree::new(n, m).unwrap();
                        let b = OrderDegree::new(nu, mu).unwrap();
                        assert_eq!(gaunt(a, b, q), gaunt(b, a, q));
                    }
                }
            }
        }
    }
}

#[test]
fn wronskian_over_a_range_of_arguments() {
    for &x in &[0.05, 0.3, 1.0, 4.0, 15.0, 40.0] {
        let j = spherical_bessel_j_array(30, x).unwrap();
        let y = spherical_bessel_y_array(30, x).unwrap();
        for n in 1..30 {
            if y[n].abs() > 1e250 {
                break;
            }
            let w = j[n] * y[n - 1] - j[n - 1] * y[n];
            assert!((w * x * x - 1.0).abs() < 1e-9, "x={x} n={n}");
        }
    }
}

#[test]
fn hankel_derivative_matches_central_difference() {
    let step = 1e-5;
    for &x in &[0.7, 3.3, 12.0] {
        let d = spherical_hankel1_deriv_array(12, x).unwrap();
        let up = spherical_hankel1_array(12, x + step).unwrap();
        let down = spherical_hankel1_array(12, x - step).unwrap();
        for n in 0..=12 {
            let fd = (up[n] - down[n]) / (2.0 * step);
            assert!((fd - d[n]).norm() <= 1e-7 * d[n].norm().max(1.0), "x={x} n={n}");
        }
    }
}

#[test]
fn large_order_bessel_stays_finite_and_small() {
    let j = spherical_bessel_j_array(60, 2.0).unwrap();
    assert!(j.iter().all(|v| v.is_finite()));
    assert!(j[60].abs() < 1e-60);
    assert!((j[0] - 2.0f64.sin() / 2.0).abs() < 1e-15);
}
