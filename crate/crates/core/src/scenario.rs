//! Experiment geometry, frequency grid and solver settings, and their TOML form.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::evaluation::FieldPlane;
use crate::radiation::{AngularSector, BoundingSphere, DirectionalWeight, QuadratureSpec};
use crate::solvers::SolverConfig;
use crate::wavefield::{Medium, PointSource, Vec3};

/// Upper bound on sources, control points or frequencies a generator may produce.
pub const MAX_GENERATED: usize = 1_000_000;

/// Slack on region membership tests, metres.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Upright cylinder centred on `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderRegion {
    pub center: Vec3,
    pub radius: f64,
    pub height: f64,
}

impl CylinderRegion {
    pub fn contains(&self, p: &Vec3, tolerance: f64) -> bool {
        let rel = p - self.center;
        rel.x.hypot(rel.y) <= self.radius + tolerance && rel.z.abs() <= 0.5 * self.height + tolerance
    }

    /// Points of the lattice `center + pitch · Z³` inside the cylinder
    /// (boundary included within `tolerance`), ordered by z, then y, then x.
    pub fn lattice(&self, pitch: f64, tolerance: f64) -> Vec<Vec3> {
        let reach = |extent: f64| ((extent + tolerance) / pitch).floor() as i64;
        let (nr, nz) = (reach(self.radius), reach(0.5 * self.height));
        let mut points = Vec::new();
        for iz in -nz..=nz {
            for iy in -nr..=nr {
                for ix in -nr..=nr {
                    let p = self.center + Vec3::new(ix as f64 * pitch, iy as f64 * pitch, iz as f64 * pitch);
                    if self.contains(&p, tolerance) {
                        points.push(p);
                    }
                }
            }
        }
        points
    }
}

/// Truncation order as a function of wavenumber: `N = ⌈k R⌉ + extra`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TruncationRule {
    pub extra: usize,
}

impl TruncationRule {
    pub fn order(&self, k: f64, radius: f64) -> usize {
        (k * radius).ceil() as usize + self.extra
    }
}

/// Where and how results are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationSettings {
    /// Radius of the sphere on which the sector power is integrated.
    pub p_rad_radius: f64,
    pub sector: AngularSector,
    /// `None` picks [`QuadratureSpec::for_geometry`] per frequency.
    pub quadrature: Option<QuadratureSpec>,
    pub plane: FieldPlane,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub medium: Medium,
    pub sources: Vec<PointSource>,
    pub target: CylinderRegion,
    pub control_points: Vec<Vec3>,
    pub a_des: DVector<f64>,
    pub bounding: BoundingSphere,
    pub weight: DirectionalWeight,
    pub frequencies: Vec<f64>,
    pub solver: SolverConfig,
    pub truncation: TruncationRule,
    pub evaluation: EvaluationSettings,
}

/// `count` sources equally spaced on a horizontal circle, the first at `offset` radians.
pub fn source_circle(radius: f64, z: f64, count: usize, offset: f64) -> Vec<PointSource> {
    (0..count)
        .map(|j| {
            let phi = offset + 2.0 * PI * j as f64 / count as f64;
            PointSource::new(radius * phi.cos(), radius * phi.sin(), z)
        })
        .collect()
}

/// `start, start + step, ...` up to `stop` inclusive.
pub fn frequency_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

/// The 24-loudspeaker, 147-control-point setup with the `1 + cos φ sin θ` weight.
pub fn build_desk_scenario() -> Scenario {
    ScenarioConfig::desk().build().expect("desk configuration is valid")
}

/// A single validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Configuration line, when known.
    pub line: Option<usize>,
    /// Dotted configuration path such as `solver.alpha`.
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { line: None, field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

fn positive(value: f64) -> bool {
    value > 0.0 && value.is_finite()
}

/// Geometric and parameter violations; empty means valid.
pub fn validate(s: &Scenario) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |field: String, message: String| out.push(Diagnostic::new(field, message));

    if !positive(s.bounding.radius) {
        push("bounding_sphere.radius".into(), "must be positive".into());
    }
    if !positive(s.target.radius) || !positive(s.target.height) {
        push("target".into(), "radius and height must be positive".into());
    }
    if s.sources.is_empty() {
        push("source".into(), "no sources".into());
    }
    for (l, src) in s.sources.iter().enumerate() {
        let distance = (src.position - s.bounding.center).norm();
        if !(distance < s.bounding.radius) {
            push(
                format!("source[{l}]"),
                format!("outside bounding sphere (distance {distance} m, radius {} m)", s.bounding.radius),
            );
        }
        if s.target.contains(&src.position, BOUNDARY_TOLERANCE) {
            push(format!("source[{l}]"), "inside target region".into());
        }
    }
    if s.control_points.is_empty() {
        push("control".into(), "no control points".into());
    }
    for (i, p) in s.control_points.iter().enumerate() {
        if !s.target.contains(p, BOUNDARY_TOLERANCE) {
            push(format!("control.points[{i}]"), "outside target region".into());
        }
    }
    if s.a_des.len() != s.control_points.len() {
        push(
            "control.amplitude".into(),
            format!("{} amplitudes for {} control points", s.a_des.len(), s.control_points.len()),
        );
    }
    if s.a_des.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        push("control.amplitude".into(), "desired amplitudes must be finite and nonnegative".into());
    }
    if let Err(e) = s.weight.check_nonnegative() {
        push("weight".into(), e.to_string());
    }
    if s.frequencies.is_empty() {
        push("frequencies".into(), "empty frequency grid".into());
    }
    if s.frequencies.iter().any(|f| !positive(*f)) {
        push("frequencies".into(), "frequencies must be positive".into());
    }
    if !(s.solver.gamma >= 0.0 && s.solver.gamma.is_finite()) {
        push("solver.gamma".into(), "negative radiation penalty".into());
    }
    if !positive(s.solver.alpha) {
        push("solver.alpha".into(), "nonpositive regularization".into());
    }
    if !positive(s.solver.xi) {
        push("solver.xi".into(), "nonpositive ADMM penalty".into());
    }
    if s.solver.max_iters == 0 {
        push("solver.max_iters".into(), "must be at least 1".into());
    }
    if !positive(s.solver.tolerance) {
        push("solver.tolerance".into(), "must be positive".into());
    }
    // sources outside the bounding sphere are already reported above
    let extent = s
        .sources
        .iter()
        .map(|p| (p.position - s.bounding.center).norm())
        .filter(|r| *r < s.bounding.radius)
        .fold(0.0, f64::max);
    if !(s.evaluation.p_rad_radius > extent) {
        push(
            "evaluation.p_rad_radius".into(),
            format!("{} m does not enclose every source (farthest at {extent} m)", s.evaluation.p_rad_radius),
        );
    }
    if let Err(e) = AngularSector::new(s.evaluation.sector.theta, s.evaluation.sector.phi) {
        push("evaluation.sector_theta_deg".into(), e.to_string());
    }
    if let Some(q) = s.evaluation.quadrature {
        if q.n_theta == 0 || q.n_phi == 0 {
            push("evaluation.quadrature_theta".into(), "node counts must be positive".into());
        }
    }
    if let Err(e) = s.evaluation.plane.check() {
        push("evaluation.field".into(), e.to_string());
    }
    out
}

// ---------------------------------------------------------------------------
// Configuration file

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub sound_speed: f64,
    pub density: f64,
}

impl Default for MediumConfig {
    fn default() -> Self {
        let m = Medium::default();
        Self { sound_speed: m.sound_speed(), density: m.density() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceCircleConfig {
    pub radius: f64,
    pub z: f64,
    pub count: usize,
    #[serde(default)]
    pub offset_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default)]
    pub center: [f64; 3],
    pub radius: f64,
    pub height: f64,
}

fn default_tolerance() -> f64 {
    BOUNDARY_TOLERANCE
}

fn default_amplitude() -> f64 {
    1.0
}

/// Either a lattice pitch or explicit points; `amplitude` is the desired
/// amplitude at every control point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 3]>>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    #[serde(default)]
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    Uniform,
    OnePlusCardioid { axis: [f64; 3] },
    Coefficients { max_order: usize, re: Vec<f64>, im: Vec<f64> },
}

/// A `start`/`stop`/`step` range or an explicit `list`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub gamma: f64,
    pub alpha: f64,
    pub xi: f64,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self { gamma: s.gamma, alpha: s.alpha, xi: s.xi, max_iters: s.max_iters, tolerance: s.tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    /// Only `"ceil_kr"` is defined.
    pub rule: String,
    #[serde(default)]
    pub extra: usize,
}

impl Default for TruncationConfig {
    fn default() -> Self {
        Self { rule: "ceil_kr".into(), extra: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub z: f64,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub step: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { z: 0.0, x: [-1.0, 1.0], y: [-1.0, 1.0], step: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluationConfig {
    /// Defaults to the bounding-sphere radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_rad_radius: Option<f64>,
    pub sector_theta_deg: [f64; 2],
    pub sector_phi_deg: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_theta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_phi: Option<usize>,
    pub field: FieldConfig,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            p_rad_radius: None,
            sector_theta_deg: [0.0, 180.0],
            sector_phi_deg: [-90.0, 90.0],
            quadrature_theta: None,
            quadrature_phi: None,
            field: FieldConfig::default(),
        }
    }
}

/// The on-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub medium: MediumConfig,
    #[serde(default, rename = "source_circle", skip_serializing_if = "Vec::is_empty")]
    pub source_circles: Vec<SourceCircleConfig>,
    #[serde(default, rename = "source", skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceConfig>,
    pub target: TargetConfig,
    pub control: ControlConfig,
    pub bounding_sphere: SphereConfig,
    pub weight: WeightConfig,
    pub frequencies: FrequencyConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
}

/// Failure to turn configuration text into a valid [`Scenario`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn to_vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

fn from_vec3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn radians(deg: f64) -> f64 {
    // exact at the common endpoints so range checks against π hold
    match deg {
        d if d == 180.0 => PI,
        d if d == -180.0 => -PI,
        d if d == 90.0 => PI / 2.0,
        d if d == -90.0 => -PI / 2.0,
        d => d.to_radians(),
    }
}

impl ScenarioConfig {
    /// Configuration of [`build_desk_scenario`].
    pub fn desk() -> Self {
        let circle = |radius: f64, z: f64| SourceCircleConfig { radius, z, count: 6, offset_deg: 0.0 };
        Self {
            medium: MediumConfig::default(),
            source_circles: vec![circle(0.453, 0.2), circle(0.653, 0.2), circle(0.453, -0.2), circle(0.653, -0.2)],
            sources: Vec::new(),
            target: TargetConfig { center: [0.0; 3], radius: 0.2, height: 0.1 },
            control: ControlConfig { pitch: Some(0.05), tolerance: BOUNDARY_TOLERANCE, points: None, amplitude: 1.0 },
            bounding_sphere: SphereConfig { center: [0.0; 3], radius: 0.8 },
            weight: WeightConfig::OnePlusCardioid { axis: [1.0, 0.0, 0.0] },
            frequencies: FrequencyConfig { start: Some(100.0), stop: Some(1000.0), step: Some(20.0), list: None },
            solver: SolverSection { xi: 10.0, ..SolverSection::default() },
            truncation: TruncationConfig::default(),
            evaluation: EvaluationConfig::default(),
        }
    }

    /// Parse TOML text; diagnostics carry line numbers where available.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start));
            ConfigError { diagnostics: vec![Diagnostic { line, field: "config".into(), message: e.message().trim().to_string() }] }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configuration serializes")
    }

    /// Explicit-list configuration of an existing scenario.
    pub fn from_scenario(s: &Scenario) -> Self {
        let amplitude = s.a_des.iter().copied().next().unwrap_or(1.0);
        let weight = match &s.weight {
            DirectionalWeight::Uniform => WeightConfig::Uniform,
            DirectionalWeight::OnePlusCardioid { axis } => WeightConfig::OnePlusCardioid { axis: *axis },
            DirectionalWeight::Coefficients { max_order, coeffs } => WeightConfig::Coefficients {
                max_order: *max_order,
                re: coeffs.iter().map(|c| c.re).collect(),
                im: coeffs.iter().map(|c| c.im).collect(),
            },
        };
        let e = &s.evaluation;
        Self {
            medium: MediumConfig { sound_speed: s.medium.sound_speed(), density: s.medium.density() },
            source_circles: Vec::new(),
            sources: s.sources.iter().map(|p| SourceConfig { position: from_vec3(&p.position) }).collect(),
            target: TargetConfig { center: from_vec3(&s.target.center), radius: s.target.radius, height: s.target.height },
            control: ControlConfig {
                pitch: None,
                tolerance: BOUNDARY_TOLERANCE,
                points: Some(s.control_points.iter().map(from_vec3).collect()),
                amplitude,
            },
            bounding_sphere: SphereConfig { center: from_vec3(&s.bounding.center), radius: s.bounding.radius },
            weight,
            frequencies: FrequencyConfig { start: None, stop: None, step: None, list: Some(s.frequencies.clone()) },
            solver: SolverSection {
                gamma: s.solver.gamma,
                alpha: s.solver.alpha,
                xi: s.solver.xi,
                max_iters: s.solver.max_iters,
                tolerance: s.solver.tolerance,
            },
            truncation: TruncationConfig { rule: "ceil_kr".into(), extra: s.truncation.extra },
            evaluation: EvaluationConfig {
                p_rad_radius: Some(e.p_rad_radius),
                sector_theta_deg: [e.sector.theta.0.to_degrees(), e.sector.theta.1.to_degrees()],
                sector_phi_deg: [e.sector.phi.0.to_degrees(), e.sector.phi.1.to_degrees()],
                quadrature_theta: e.quadrature.map(|q| q.n_theta),
                quadrature_phi: e.quadrature.map(|q| q.n_phi),
                field: FieldConfig { z: e.plane.z, x: [e.plane.x.0, e.plane.x.1], y: [e.plane.y.0, e.plane.y.1], step: e.plane.step },
            },
        }
    }

    /// Replace the frequency step of a range grid.
    pub fn override_frequency_step(&mut self, step: f64) -> Result<(), ConfigError> {
        if self.frequencies.list.is_some() {
            return Err(ConfigError {
                diagnostics: vec![Diagnostic::new("frequencies.step", "a frequency step override needs a start/stop range, not a list")],
            });
        }
        self.frequencies.step = Some(step);
        Ok(())
    }

    /// Assemble and validate the scenario.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        let mut diags = Vec::new();

        let medium = Medium::new(self.medium.sound_speed, self.medium.density).unwrap_or_else(|e| {
            diags.push(Diagnostic::new("medium", e.to_string()));
            Medium::default()
        });

        let mut sources = Vec::new();
        for (i, c) in self.source_circles.iter().enumerate() {
            if c.count == 0 || c.count > MAX_GENERATED {
                diags.push(Diagnostic::new(format!("source_circle[{i}].count"), format!("must be between 1 and {MAX_GENERATED}")));
                continue;
            }
            sources.extend(source_circle(c.radius, c.z, c.count, radians(c.offset_deg)));
        }
        sources.extend(self.sources.iter().map(|s| PointSource { position: to_vec3(s.position) }));

        let target = CylinderRegion { center: to_vec3(self.target.center), radius: self.target.radius, height: self.target.height };

        let control_points = match (&self.control.pitch, &self.control.points) {
            (Some(pitch), None) => {
                let valid = positive(*pitch) && positive(target.radius) && positive(target.height) && self.control.tolerance >= 0.0;
                let span = |extent: f64| 2.0 * ((extent + self.control.tolerance) / pitch).floor() + 1.0;
                if valid && span(target.radius).powi(2) * span(0.5 * target.height) > MAX_GENERATED as f64 {
                    diags.push(Diagnostic::new("control.pitch", format!("lattice would exceed {MAX_GENERATED} points")));
                    Vec::new()
                } else if valid {
                    target.lattice(*pitch, self.control.tolerance)
                } else {
                    diags.push(Diagnostic::new("control.pitch", "lattice pitch and target size must be positive"));
                    Vec::new()
                }
            }
            (None, Some(points)) => points.iter().copied().map(to_vec3).collect(),
            _ => {
                diags.push(Diagnostic::new("control", "give exactly one of `pitch` or `points`"));
                Vec::new()
            }
        };
        let a_des = DVector::from_element(control_points.len(), self.control.amplitude);

        let bounding = BoundingSphere { center: to_vec3(self.bounding_sphere.center), radius: self.bounding_sphere.radius };

        let weight = match &self.weight {
            WeightConfig::Uniform => DirectionalWeight::Uniform,
            WeightConfig::OnePlusCardioid { axis } => DirectionalWeight::OnePlusCardioid { axis: *axis },
            WeightConfig::Coefficients { max_order, re, im } => {
                let expected = max_order.checked_add(1).and_then(|n| n.checked_mul(n));
                if expected.is_none_or(|e| re.len() != e || im.len() != e) {
                    let expected = expected.map_or_else(|| "too many".to_string(), |e| e.to_string());
                    diags.push(Diagnostic::new(
                        "weight",
                        format!("order {max_order} needs {expected} coefficients, got {} real / {} imaginary", re.len(), im.len()),
                    ));
                    DirectionalWeight::Uniform
                } else {
                    let coeffs = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
                    DirectionalWeight::Coefficients { max_order: *max_order, coeffs }
                }
            }
        };

        let f = &self.frequencies;
        let frequencies = match (f.start, f.stop, f.step, &f.list) {
            (Some(start), Some(stop), Some(step), None) => {
                if positive(step) && start.is_finite() && stop.is_finite() && start <= stop {
                    if (stop - start) / step >= MAX_GENERATED as f64 {
                        diags.push(Diagnostic::new("frequencies", format!("grid would exceed {MAX_GENERATED} frequencies")));
                        Vec::new()
                    } else {
                        frequency_range(start, stop, step)
                    }
                } else {
                    diags.push(Diagnostic::new("frequencies", "need start <= stop and a positive step"));
                    Vec::new()
                }
            }
            (None, None, None, Some(list)) => list.clone(),
            _ => {
                diags.push(Diagnostic::new("frequencies", "give either start, stop and step, or a list"));
                Vec::new()
            }
        };

        let s = &self.solver;
        let solver = SolverConfig { gamma: s.gamma, alpha: s.alpha, xi: s.xi, max_iters: s.max_iters, tolerance: s.tolerance };

        if self.truncation.rule != "ceil_kr" {
            diags.push(Diagnostic::new("truncation.rule", format!("unknown rule {:?} (expected \"ceil_kr\")", self.truncation.rule)));
        }
        let truncation = TruncationRule { extra: self.truncation.extra };

        let e = &self.evaluation;
        let quadrature = match (e.quadrature_theta, e.quadrature_phi) {
            (Some(n_theta), Some(n_phi)) => Some(QuadratureSpec { n_theta, n_phi }),
            (None, None) => None,
            _ => {
                diags.push(Diagnostic::new("evaluation.quadrature_theta", "give both quadrature_theta and quadrature_phi or neither"));
                None
            }
        };
        let evaluation = EvaluationSettings {
            p_rad_radius: e.p_rad_radius.unwrap_or(bounding.radius),
            sector: AngularSector {
                theta: (radians(e.sector_theta_deg[0]), radians(e.sector_theta_deg[1])),
                phi: (radians(e.sector_phi_deg[0]), radians(e.sector_phi_deg[1])),
            },
            quadrature,
            plane: FieldPlane { z: e.field.z, x: (e.field.x[0], e.field.x[1]), y: (e.field.y[0], e.field.y[1]), step: e.field.step },
        };

        let scenario = Scenario {
            medium,
            sources,
            target,
            control_points,
            a_des,
            bounding,
            weight,
            frequencies,
            solver,
            truncation,
            evaluation,
        };
        diags.extend(validate(&scenario));
        if diags.is_empty() {
            Ok(scenario)
        } else {
            Err(ConfigError { diagnostics: diags })
        }
    }
}

impl Scenario {
    /// Parse, build and validate; diagnostics are annotated with line numbers.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        ScenarioConfig::from_toml_str(text)?.build().map_err(|e| annotate(text, e))
    }
}

/// Attach line numbers to diagnostics whose field path names a key in `text`.
pub fn annotate(text: &str, mut err: ConfigError) -> ConfigError {
    for d in &mut err.diagnostics {
        if d.line.is_none() {
            d.line = locate(text, &d.field);
        }
    }
    err
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

/// Line of `path` (`table.key`, `table[i].key`, `table` or `table[i]`) in a TOML document.
fn locate(text: &str, path: &str) -> Option<usize> {
    let (table_part, key) = match path.rsplit_once('.') {
        Some((t, k)) => (t, Some(k)),
        None => (path, None),
    };
    let (table, index) = match table_part.split_once('[') {
        Some((t, rest)) => (t, rest.trim_end_matches(']').parse::<usize>().ok()),
        None => (table_part, None),
    };
    let mut current = String::new();
    let mut occurrence: Option<usize> = None;
    let mut header_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            let name = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if name == table {
                occurrence = Some(occurrence.map_or(0, |o| o + 1));
            }
            current = name;
            if current == table && index.is_none_or(|want| occurrence == Some(want)) {
                header_line.get_or_insert(i + 1);
            }
            continue;
        }
        let in_table = current == table && index.is_none_or(|want| occurrence == Some(want));
        if let (true, Some(key)) = (in_table, key) {
            if let Some((lhs, _)) = line.split_once('=') {
                if lhs.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header_line
}
