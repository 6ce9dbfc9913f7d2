//! Driving-signal solvers: ADMM amplitude matching with a radiation penalty,
//! and closed-form regularized pressure matching.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::radiation::RadiationMatrix;
use crate::wavefield::{greens_function, DrivingSignals, PointSource, Vec3};

/// Relative residual allowed for every linear solve.
const SOLVE_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Radiation penalty weight `γ >= 0`.
    pub gamma: f64,
    /// Tikhonov weight `α > 0`.
    pub alpha: f64,
    /// ADMM penalty parameter `ξ > 0`.
    pub xi: f64,
    pub max_iters: usize,
    /// Relative threshold on the primal residual and the change in `d`.
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { gamma: 2e4, alpha: 1e-3, xi: 1.0, max_iters: 500, tolerance: 1e-6 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: &str| Err(Error::InvalidParameter { name, reason: reason.to_string() });
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad("gamma", "must be finite and >= 0");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be finite and > 0");
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return bad("xi", "must be finite and > 0");
        }
        if self.max_iters == 0 {
            return bad("max_iters", "must be at least 1");
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad("tolerance", "must be finite and > 0");
        }
        Ok(())
    }
}

/// `G` with `G[(i, l)] = g_l(r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix(DMatrix<Complex64>);

impl TransferMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if let Some(v) = matrix.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("transfer matrix entry {v}")));
        }
        Ok(Self(matrix))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn points(&self) -> usize {
        self.0.nrows()
    }

    pub fn sources(&self) -> usize {
        self.0.ncols()
    }

    /// `G d`.
    pub fn apply(&self, d: &DrivingSignals) -> DVector<Complex64> {
        &self.0 * &**d
    }
}

pub fn transfer_matrix(sources: &[PointSource], points: &[Vec3], k: f64) -> Result<TransferMatrix> {
    let mut g = DMatrix::zeros(points.len(), sources.len());
    for (l, src) in sources.iter().enumerate() {
        for (i, r) in points.iter().enumerate() {
            g[(i, l)] = greens_function(src, r, k)?;
        }
    }
    TransferMatrix::new(g)
}

/// Iterate of Algorithm-1 style ADMM.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub d: DrivingSignals,
    pub lambda: DVector<Complex64>,
    /// Iterations performed.
    pub iteration: usize,
    /// Objective at `d⁰` followed by one entry per iteration.
    pub cost_trace: Vec<f64>,
    pub converged: bool,
}

/// Factorization of a Hermitian system matrix, Cholesky first, LU if that fails.
enum Factor {
    Cholesky(Cholesky<Complex64, Dyn>),
    Lu(LU<Complex64, Dyn, Dyn>),
}

struct Solver {
    matrix: DMatrix<Complex64>,
    factor: Factor,
}

impl Solver {
    fn new(matrix: DMatrix<Complex64>) -> Self {
        // complex square roots never fail, so an indefinite matrix can still
        // "factor"; accept only real positive pivots
        let factor = match Cholesky::new(matrix.clone()) {
            Some(c) if c.l_dirty().diagonal().iter().all(|v| v.im == 0.0 && v.re > 0.0) => Factor::Cholesky(c),
            _ => Factor::Lu(matrix.clone().lu()),
        };
        Self { matrix, factor }
    }

    fn solve(&self, rhs: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let x = match &self.factor {
            Factor::Cholesky(c) => c.solve(rhs),
            Factor::Lu(lu) => lu.solve(rhs).ok_or(Error::LinearSolve(f64::INFINITY))?,
        };
        let scale = rhs.norm();
        let residual = (&self.matrix * &x - rhs).norm();
        if !x.iter().all(|v| v.is_finite()) || residual > SOLVE_RESIDUAL * scale {
            return Err(Error::LinearSolve(if scale > 0.0 { residual / scale } else { residual }));
        }
        Ok(x)
    }
}

fn check_dims(g: &TransferMatrix, points: usize, a: &RadiationMatrix) -> Result<()> {
    if points != g.points() {
        return Err(Error::LengthMismatch { expected: g.points(), actual: points });
    }
    if a.dim() != g.sources() {
        return Err(Error::LengthMismatch { expected: g.sources(), actual: a.dim() });
    }
    Ok(())
}

/// `G^H G + s_a A + s_i I`.
fn normal_matrix(g: &TransferMatrix, a: &RadiationMatrix, s_a: f64, s_i: f64) -> DMatrix<Complex64> {
    let mut m = g.matrix().adjoint() * g.matrix();
    if s_a != 0.0 {
        m += a.matrix() * Complex64::new(s_a, 0.0);
    }
    for i in 0..m.nrows() {
        m[(i, i)] += s_i;
    }
    m
}

/// `‖|Gd| − a_des‖² + γ d^H A d + α‖d‖²`.
pub fn cost_amplitude(
    g: &TransferMatrix,
    a_des: &DVector<f64>,
    a: &RadiationMatrix,
    gamma: f64,
    alpha: f64,
    d: &DrivingSignals,
) -> f64 {
    let gd = g.apply(d);
    let fit: f64 = gd.iter().zip(a_des.iter()).map(|(u, t)| (u.norm() - t).powi(2)).sum();
    let penalty = if gamma == 0.0 { 0.0 } else { gamma * a.quadratic_form(d) };
    fit + penalty + alpha * d.norm_squared()
}

/// Minimizer of `‖Gd − u_des‖² + γ d^H A d + α‖d‖²`: `(G^H G + γA + αI)⁻¹ G^H u_des`.
pub fn pressure_matching(
    g: &TransferMatrix,
    u_des: &DVector<Complex64>,
    a: &RadiationMatrix,
    gamma: f64,
    alpha: f64,
) -> Result<DrivingSignals> {
    check_dims(g, u_des.len(), a)?;
    let solver = Solver::new(normal_matrix(g, a, gamma, alpha));
    Ok(DrivingSignals::new(solver.solve(&(g.matrix().adjoint() * u_des))?))
}

fn check_amplitudes(a_des: &DVector<f64>) -> Result<()> {
    match a_des.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        Some(v) => Err(Error::InvalidParameter { name: "a_des", reason: format!("amplitude {v} is not a finite nonnegative value") }),
        None => Ok(()),
    }
}

/// ADMM for `minimize ‖|Gd| − a_des‖² + γ d^H A d + α‖d‖²`.
///
/// Without `init`, starts from [`pressure_matching`] with `u_des = a_des`
/// (the same `γ`, `A`, `α`) and `λ⁰ = 0`; a supplied state is used as the
/// warm start and its trace restarts. Stops after `max_iters` or once
/// `‖Gd − z‖ <= tol ‖a_des‖` and `‖d⁺ − d‖ <= tol ‖d⁺‖` hold together.
///
/// The problem is nonconvex and the iteration not monotone, so the returned
/// signals are the lowest-cost iterate seen (never worse than `d⁰`); the
/// returned state holds the last iterate.
pub fn amplitude_matching_admm(
    g: &TransferMatrix,
    a_des: &DVector<f64>,
    a: &RadiationMatrix,
    cfg: &SolverConfig,
    init: Option<AdmmState>,
) -> Result<(DrivingSignals, AdmmState)> {
    cfg.validate()?;
    check_amplitudes(a_des)?;
    check_dims(g, a_des.len(), a)?;
    let cost = |d: &DrivingSignals| cost_amplitude(g, a_des, a, cfg.gamma, cfg.alpha, d);

    let (mut d, mut lambda) = match init {
        Some(state) => {
            if state.d.len() != g.sources() {
                return Err(Error::LengthMismatch { expected: g.sources(), actual: state.d.len() });
            }
            if state.lambda.len() != g.points() {
                return Err(Error::LengthMismatch { expected: g.points(), actual: state.lambda.len() });
            }
            (state.d, state.lambda)
        }
        None => {
            let u_des = a_des.map(|v| Complex64::new(v, 0.0));
            (pressure_matching(g, &u_des, a, cfg.gamma, cfg.alpha)?, DVector::zeros(g.points()))
        }
    };

    let xi = cfg.xi;
    let solver = Solver::new(normal_matrix(g, a, 2.0 * cfg.gamma / xi, 2.0 * cfg.alpha / xi));
    let gh = g.matrix().adjoint();
    let xi_c = Complex64::new(xi, 0.0);
    let target_norm = a_des.norm();

    let mut trace = vec![cost(&d)];
    let mut best = (trace[0], d.clone());
    let mut converged = false;
    let mut iteration = 0;
    while iteration < cfg.max_iters {
        let h = g.apply(&d) + &lambda / xi_c;
        let z = DVector::from_iterator(
            h.len(),
            h.iter().zip(a_des.iter()).map(|(hi, ai)| {
                let theta = if *hi == Complex64::new(0.0, 0.0) { 0.0 } else { hi.arg() };
                Complex64::from_polar((xi * hi.norm() + 2.0 * ai) / (xi + 2.0), theta)
            }),
        );
        let next = DrivingSignals::new(solver.solve(&(&gh * (&z - &lambda / xi_c)))?);
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!("driving signals at iteration {}", iteration + 1)));
        }
        let primal = g.apply(&next) - &z;
        lambda += &primal * xi_c;
        let change = (&*next - &*d).norm();
        d = next;
        iteration += 1;

        let c = cost(&d);
        if !c.is_finite() {
            return Err(Error::NonFinite(format!("cost at iteration {iteration}")));
        }
        trace.push(c);
        if c < best.0 {
            best = (c, d.clone());
        }
        if primal.norm() <= cfg.tolerance * target_norm && change <= cfg.tolerance * d.norm() {
            converged = true;
            break;
        }
    }

    let state = AdmmState { d, lambda, iteration, cost_trace: trace, converged };
    Ok((best.1, state))
}
