//! Per-frequency metrics and band-power field maps.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::radiation::{radiated_power_quadrature, AngularSector, PowerWeighting, QuadratureSpec};
use crate::solvers::TransferMatrix;
use crate::wavefield::{DrivingSignals, Medium, PointSource, Vec3};

/// Lowest level written to field maps, dB.
pub const DB_FLOOR: f64 = -80.0;
/// Largest field grid accepted by [`FieldPlane::check`].
pub const MAX_GRID_POINTS: usize = 4_000_000;
/// Grid points closer than this to a source are masked.
pub const MASK_RADIUS: f64 = 0.01;

/// The compared driving-signal methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Amplitude matching, no radiation penalty.
    Am,
    /// Amplitude matching with uniformly weighted radiation suppression.
    AmRad,
    /// Amplitude matching with directionally weighted radiation suppression.
    AmRadDir,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Am, Method::AmRad, Method::AmRadDir];

    /// Command-line and file-name key.
    pub fn key(self) -> &'static str {
        match self {
            Method::Am => "am",
            Method::AmRad => "am-rad",
            Method::AmRadDir => "am-rad-dir",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Am => "AM",
            Method::AmRad => "AM-Rad",
            Method::AmRadDir => "AM-Rad-Dir",
        }
    }

    /// Parse a comma-separated list such as `am,am-rad-dir`.
    ///
    /// Keys are case-sensitive, surrounding whitespace is ignored, and empty
    /// items or repeats are errors.
    pub fn parse_list(text: &str) -> std::result::Result<Vec<Method>, String> {
        let mut out = Vec::new();
        for item in text.split(',') {
            let item = item.trim();
            if item.is_empty() {
                return Err(format!("empty method name in list {text:?}"));
            }
            let method: Method = item.parse()?;
            if out.contains(&method) {
                return Err(format!("method {item:?} listed twice"));
            }
            out.push(method);
        }
        Ok(out)
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| format!("unknown method {s:?} (expected am, am-rad or am-rad-dir)"))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// One row of a metrics table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub method: Method,
    pub frequency_hz: f64,
    pub mse: f64,
    /// Radiated power into the suppression sector, W.
    pub p_rad: f64,
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub converged: bool,
}

/// `(1/I) ‖|Gd| − a_des‖²`.
pub fn mse(g: &TransferMatrix, d: &DrivingSignals, a_des: &DVector<f64>) -> Result<f64> {
    if a_des.len() != g.points() {
        return Err(Error::LengthMismatch { expected: g.points(), actual: a_des.len() });
    }
    if d.len() != g.sources() {
        return Err(Error::LengthMismatch { expected: g.sources(), actual: d.len() });
    }
    let gd = g.apply(d);
    let total: f64 = gd.iter().zip(a_des.iter()).map(|(u, a)| (u.norm() - a).powi(2)).sum();
    Ok(total / a_des.len() as f64)
}

/// Radiated power through the part of the sphere of radius `radius` about
/// `center` inside `sector`.
#[allow(clippy::too_many_arguments)]
pub fn p_rad_sector(
    sources: &[PointSource],
    d: &DrivingSignals,
    k: f64,
    medium: &Medium,
    center: &Vec3,
    radius: f64,
    sector: AngularSector,
    quad: QuadratureSpec,
) -> Result<f64> {
    radiated_power_quadrature(sources, d, PowerWeighting::Sector(sector), center, radius, k, medium, quad)
}

/// Horizontal sampling plane `z = const` over `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPlane {
    pub z: f64,
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub step: f64,
}

impl FieldPlane {
    pub fn new(z: f64, x: (f64, f64), y: (f64, f64), step: f64) -> Result<Self> {
        let plane = Self { z, x, y, step };
        plane.check()?;
        Ok(plane)
    }

    pub fn check(&self) -> Result<()> {
        let finite = [self.z, self.x.0, self.x.1, self.y.0, self.y.1, self.step].iter().all(|v| v.is_finite());
        if !finite || !(self.step > 0.0) || self.x.0 > self.x.1 || self.y.0 > self.y.1 {
            return Err(Error::InvalidParameter { name: "field plane", reason: format!("{self:?} is not a valid grid") });
        }
        let points = ((self.x.1 - self.x.0) / self.step + 1.0) * ((self.y.1 - self.y.0) / self.step + 1.0);
        if points > MAX_GRID_POINTS as f64 {
            return Err(Error::InvalidParameter {
                name: "field plane",
                reason: format!("{points:.0} grid points exceeds the limit of {MAX_GRID_POINTS}"),
            });
        }
        Ok(())
    }

    fn axis(range: (f64, f64), step: f64) -> Vec<f64> {
        let count = ((range.1 - range.0) / step + 1e-9).floor() as usize;
        (0..=count).map(|i| range.0 + i as f64 * step).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x, self.step)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.y, self.step)
    }
}

/// Band-summed power `Σ_f |u_f|²` over a plane; rows run over `y`, columns over `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub plane: FieldPlane,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `NaN` where masked.
    pub power: Vec<f64>,
}

impl FieldGrid {
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.power[iy * self.xs.len() + ix]
    }

    /// `(x, y, power)` in row-major order.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.ys.iter().enumerate().flat_map(move |(iy, y)| {
            self.xs.iter().enumerate().map(move |(ix, x)| (*x, *y, self.get(ix, iy)))
        })
    }

    /// Levels in dB relative to `reference`, floored at [`DB_FLOOR`].
    pub fn db(&self, reference: f64) -> Vec<f64> {
        self.power.iter().map(|p| to_db(*p, reference)).collect()
    }
}

/// `10 log10(power / reference)`, floored at [`DB_FLOOR`]; masked samples stay `NaN`.
pub fn to_db(power: f64, reference: f64) -> f64 {
    if power.is_nan() {
        return f64::NAN;
    }
    if power > 0.0 && reference > 0.0 {
        (10.0 * (power / reference).log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

fn check_band(sources: &[PointSource], wavenumbers: &[f64], signals: &[DrivingSignals]) -> Result<()> {
    if wavenumbers.len() != signals.len() {
        return Err(Error::LengthMismatch { expected: wavenumbers.len(), actual: signals.len() });
    }
    if let Some(d) = signals.iter().find(|d| d.len() != sources.len()) {
        return Err(Error::LengthMismatch { expected: sources.len(), actual: d.len() });
    }
    Ok(())
}

fn band_power(sources: &[PointSource], wavenumbers: &[f64], signals: &[DrivingSignals], r: &Vec3) -> f64 {
    let mut total = 0.0;
    for (k, d) in wavenumbers.iter().zip(signals) {
        let mut u = Complex64::new(0.0, 0.0);
        for (src, dl) in sources.iter().zip(d.iter()) {
            let rho = (r - src.position).norm();
            u += dl * Complex64::from_polar(1.0 / (4.0 * PI * rho), k * rho);
        }
        total += u.norm_sqr();
    }
    total
}

/// `Σ_f |u_f(r)|²` at each point, frequencies summed in the given order.
pub fn band_power_at(
    sources: &[PointSource],
    wavenumbers: &[f64],
    signals: &[DrivingSignals],
    points: &[Vec3],
) -> Result<Vec<f64>> {
    check_band(sources, wavenumbers, signals)?;
    for r in points {
        if sources.iter().any(|s| (r - s.position).norm() < MASK_RADIUS) {
            return Err(Error::CoincidentPoints);
        }
    }
    Ok(points.par_iter().map(|r| band_power(sources, wavenumbers, signals, r)).collect())
}

/// Band power over `plane`; samples within [`MASK_RADIUS`] of a source are `NaN`.
pub fn field_grid(
    sources: &[PointSource],
    wavenumbers: &[f64],
    signals: &[DrivingSignals],
    plane: &FieldPlane,
) -> Result<FieldGrid> {
    plane.check()?;
    check_band(sources, wavenumbers, signals)?;
    let xs = plane.xs();
    let ys = plane.ys();
    let power = ys
        .par_iter()
        .flat_map_iter(|y| {
            xs.iter().map(move |x| {
                let r = Vec3::new(*x, *y, plane.z);
                if sources.iter().any(|s| (r - s.position).norm() < MASK_RADIUS) {
                    f64::NAN
                } else {
                    band_power(sources, wavenumbers, signals, &r)
                }
            })
        })
        .collect();
    Ok(FieldGrid { plane: *plane, xs, ys, power })
}
