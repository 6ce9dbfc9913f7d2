//! Gauss–Legendre rules and tensor-product rules on the sphere.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=count {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            deriv = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / deriv;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(count: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(count);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| v * half).collect())
}

/// A quadrature node on the unit sphere; `weight` already includes `sin θ dθ dφ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

/// Full-sphere rule: Gauss–Legendre in `cos θ` times the periodic trapezoid in `φ`.
///
/// Exact for spherical polynomials of degree `< min(2 * n_theta, n_phi)`.
pub fn sphere_rule(n_theta: usize, n_phi: usize) -> Vec<SphereNode> {
    let (x, w) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = xi.clamp(-1.0, 1.0).acos();
        for j in 0..n_phi {
            nodes.push(SphereNode { theta, phi: j as f64 * dphi, weight: wi * dphi });
        }
    }
    nodes
}

/// Rule over the angular sector `θ ∈ [θ1, θ2]`, `φ ∈ [φ1, φ2]`, Gauss–Legendre in `θ` and `φ`.
pub fn sector_rule(n_theta: usize, n_phi: usize, theta: (f64, f64), phi: (f64, f64)) -> Vec<SphereNode> {
    let (t, wt) = gauss_legendre_interval(n_theta, theta.0, theta.1);
    let (p, wp) = gauss_legendre_interval(n_phi, phi.0, phi.1);
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    for (ti, wti) in t.iter().zip(&wt) {
        let jac = ti.sin();
        for (pj, wpj) in p.iter().zip(&wp) {
            nodes.push(SphereNode { theta: *ti, phi: *pj, weight: wti * wpj * jac });
        }
    }
    nodes
}
