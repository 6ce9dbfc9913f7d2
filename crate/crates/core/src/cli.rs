//! Batch runner behind the `extrad` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::evaluation::{band_power_at, field_grid, mse, p_rad_sector, FieldGrid, Method, MetricsRecord};
use crate::radiation::{assemble_kernel, weight_spectrum, DirectionalWeight, QuadratureSpec, RadiationMatrix};
use crate::scenario::{annotate, Scenario, ScenarioConfig};
use crate::solvers::{amplitude_matching_admm, transfer_matrix, SolverConfig};
use crate::wavefield::{translated_source_matrix, DrivingSignals};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "extrad", version, about = "Amplitude matching with directionally weighted exterior radiation suppression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve every method over the frequency grid and write CSV tables.
    Run {
        config: PathBuf,
        /// Comma-separated subset of am, am-rad, am-rad-dir.
        #[arg(long, default_value = "am,am-rad,am-rad-dir")]
        methods: String,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Replace the configured frequency step, Hz.
        #[arg(long)]
        freq_step: Option<f64>,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Validate a configuration without solving.
    Check { config: PathBuf },
}

/// A solve that failed at a specific frequency and method.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericalFailure {
    pub frequency_hz: f64,
    pub method: Option<Method>,
    pub error: Error,
}

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.method {
            Some(m) => write!(f, "numerical failure at {} Hz ({}): {}", self.frequency_hz, m.label(), self.error),
            None => write!(f, "numerical failure at {} Hz: {}", self.frequency_hz, self.error),
        }
    }
}

/// Everything computed at one frequency.
#[derive(Debug, Clone)]
pub struct FrequencySolution {
    pub frequency_hz: f64,
    pub wavenumber: f64,
    pub order: usize,
    pub records: Vec<MetricsRecord>,
    pub signals: Vec<DrivingSignals>,
}

/// Solve `methods` at one frequency; records and signals follow `methods` order.
pub fn solve_frequency(scenario: &Scenario, frequency_hz: f64, methods: &[Method]) -> Result<FrequencySolution, NumericalFailure> {
    let fail = |method: Option<Method>| move |error: Error| NumericalFailure { frequency_hz, method, error };
    let k = scenario.medium.wavenumber(frequency_hz);
    let order = scenario.truncation.order(k, scenario.bounding.radius);
    let g = transfer_matrix(&scenario.sources, &scenario.control_points, k).map_err(fail(None))?;

    let needs_penalty = methods.iter().any(|m| *m != Method::Am);
    let c = if needs_penalty {
        scenario.bounding.check_contains(&scenario.sources).map_err(fail(None))?;
        translated_source_matrix(&scenario.sources, &scenario.bounding.center, order, k).map_err(fail(None))?
    } else {
        DMatrix::<Complex64>::zeros(0, 0)
    };
    let penalty = |weight: &DirectionalWeight| -> crate::Result<RadiationMatrix> {
        let kernel = assemble_kernel(&weight_spectrum(weight)?, &scenario.bounding, order, k, &scenario.medium)?;
        Ok(RadiationMatrix::from_parts(&c, &kernel, k, scenario.bounding.radius, order, weight.describe()))
    };

    let extent = scenario.sources.iter().map(|s| (s.position - scenario.bounding.center).norm()).fold(0.0, f64::max);
    let quad = scenario
        .evaluation
        .quadrature
        .unwrap_or_else(|| QuadratureSpec::for_geometry(order, extent, scenario.evaluation.p_rad_radius));
    let mut records = Vec::with_capacity(methods.len());
    let mut signals = Vec::with_capacity(methods.len());
    for &method in methods {
        let (a, gamma) = match method {
            Method::Am => (RadiationMatrix::zeros(scenario.sources.len()), 0.0),
            Method::AmRad => (penalty(&DirectionalWeight::Uniform).map_err(fail(Some(method)))?, scenario.solver.gamma),
            Method::AmRadDir => (penalty(&scenario.weight).map_err(fail(Some(method)))?, scenario.solver.gamma),
        };
        let cfg = SolverConfig { gamma, ..scenario.solver };
        let (d, state) = amplitude_matching_admm(&g, &scenario.a_des, &a, &cfg, None).map_err(fail(Some(method)))?;
        let p_rad = p_rad_sector(
            &scenario.sources,
            &d,
            k,
            &scenario.medium,
            &scenario.bounding.center,
            scenario.evaluation.p_rad_radius,
            scenario.evaluation.sector,
            quad,
        )
        .map_err(fail(Some(method)))?;
        let final_cost = state.cost_trace.iter().copied().fold(f64::INFINITY, f64::min);
        records.push(MetricsRecord {
            method,
            frequency_hz,
            mse: mse(&g, &d, &scenario.a_des).map_err(fail(Some(method)))?,
            p_rad,
            iterations: state.iteration,
            initial_cost: state.cost_trace[0],
            final_cost,
            converged: state.converged,
        });
        signals.push(d);
    }
    Ok(FrequencySolution { frequency_hz, wavenumber: k, order, records, signals })
}

/// Results of a whole run, keyed by method.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub metrics: BTreeMap<Method, Vec<MetricsRecord>>,
    pub fields: BTreeMap<Method, FieldGrid>,
    /// Mean band power of AM over the control points; the 0 dB level of the field maps.
    pub db_reference: f64,
    pub warnings: Vec<String>,
}

/// Solve every frequency (in parallel on the current rayon pool) and build
/// the field maps. AM is always solved because it sets the dB reference.
pub fn run_experiment(scenario: &Scenario, methods: &[Method]) -> Result<Experiment, NumericalFailure> {
    let mut solved: Vec<Method> = vec![Method::Am];
    solved.extend(methods.iter().copied().filter(|m| *m != Method::Am));

    let per_frequency: Vec<FrequencySolution> = scenario
        .frequencies
        .par_iter()
        .map(|f| solve_frequency(scenario, *f, &solved))
        .collect::<Result<_, _>>()?;

    let wavenumbers: Vec<f64> = per_frequency.iter().map(|s| s.wavenumber).collect();
    let band_failure = |error: Error| NumericalFailure { frequency_hz: f64::NAN, method: None, error };
    let am_signals: Vec<DrivingSignals> = per_frequency.iter().map(|s| s.signals[0].clone()).collect();
    let interior = band_power_at(&scenario.sources, &wavenumbers, &am_signals, &scenario.control_points).map_err(band_failure)?;
    let db_reference = interior.iter().sum::<f64>() / interior.len() as f64;

    let mut metrics = BTreeMap::new();
    let mut fields = BTreeMap::new();
    let mut warnings = Vec::new();
    for (slot, method) in solved.iter().enumerate() {
        if !methods.contains(method) {
            continue;
        }
        let records: Vec<MetricsRecord> = per_frequency.iter().map(|s| s.records[slot].clone()).collect();
        for r in &records {
            if r.p_rad < 0.0 {
                warnings.push(format!("{} Hz ({}): negative sector power {:e} W", r.frequency_hz, method.label(), r.p_rad));
            }
        }
        let capped = records.iter().filter(|r| !r.converged).count();
        if capped > 0 {
            warnings.push(format!("{}: {capped} of {} frequencies stopped at the iteration limit", method.label(), records.len()));
        }
        let ds: Vec<DrivingSignals> = per_frequency.iter().map(|s| s.signals[slot].clone()).collect();
        let grid = field_grid(&scenario.sources, &wavenumbers, &ds, &scenario.evaluation.plane).map_err(|error| NumericalFailure {
            frequency_hz: f64::NAN,
            method: Some(*method),
            error,
        })?;
        metrics.insert(*method, records);
        fields.insert(*method, grid);
    }
    Ok(Experiment { metrics, fields, db_reference, warnings })
}

fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.12e}")
    }
}

/// `frequency_hz,mse,p_rad_watt,iterations,final_cost` with LF line endings.
pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from("frequency_hz,mse,p_rad_watt,iterations,final_cost\n");
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_float(r.frequency_hz),
            format_float(r.mse),
            format_float(r.p_rad),
            r.iterations,
            format_float(r.final_cost)
        )
        .unwrap();
    }
    out
}

/// `x,y,power_db`; masked samples are `NaN`.
pub fn field_csv(grid: &FieldGrid, reference: f64) -> String {
    let mut out = String::from("x,y,power_db\n");
    for (x, y, p) in grid.samples() {
        let db = crate::evaluation::to_db(p, reference);
        writeln!(out, "{},{},{}", format_float(x), format_float(y), format_float(db)).unwrap();
    }
    out
}

/// What a run was given, recorded next to its outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_path: String,
    pub scenario_sha256: String,
    pub methods: Vec<Method>,
    pub output_dir: String,
    pub seed: u64,
    pub threads: usize,
    pub freq_step_override: Option<f64>,
}

impl RunManifest {
    pub fn render(&self, scenario: &Scenario, db_reference: f64) -> String {
        let methods: Vec<&str> = self.methods.iter().map(|m| m.key()).collect();
        let e = &scenario.evaluation;
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        line("tool", format!("extrad {}", self.tool_version));
        line("scenario", self.scenario_path.clone());
        line("scenario_sha256", self.scenario_sha256.clone());
        line("scenario_copy", "scenario.toml".into());
        line("methods", methods.join(","));
        line("output_dir", self.output_dir.clone());
        line("seed", format!("{} (no random state is used)", self.seed));
        line("threads", self.threads.to_string());
        line("freq_step_override_hz", self.freq_step_override.map_or("none".into(), |s| s.to_string()));
        line(
            "frequencies",
            format!(
                "{} points, {} Hz to {} Hz",
                scenario.frequencies.len(),
                scenario.frequencies.first().copied().unwrap_or(f64::NAN),
                scenario.frequencies.last().copied().unwrap_or(f64::NAN)
            ),
        );
        line("truncation", format!("ceil(k * {}) + {}", scenario.bounding.radius, scenario.truncation.extra));
        line("weight", scenario.weight.describe());
        line(
            "p_rad",
            format!(
                "sector theta [{}, {}] rad, phi [{}, {}] rad, radius {} m",
                e.sector.theta.0, e.sector.theta.1, e.sector.phi.0, e.sector.phi.1, e.p_rad_radius
            ),
        );
        line("field_band", "unweighted sum of |u|^2 over the frequency grid".into());
        line("field_db_reference", format!("{} (mean AM band power over the control points)", format_float(db_reference)));
        line("field_db_floor", crate::evaluation::DB_FLOOR.to_string());
        out
    }
}

fn load(path: &Path, freq_step: Option<f64>) -> Result<(String, Scenario), i32> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_CONFIG
    })?;
    let report = |err: crate::scenario::ConfigError| {
        for d in &err.diagnostics {
            eprintln!("{}: {d}", path.display());
        }
        EXIT_CONFIG
    };
    let mut cfg = ScenarioConfig::from_toml_str(&text).map_err(report)?;
    if let Some(step) = freq_step {
        cfg.override_frequency_step(step).map_err(report)?;
    }
    let scenario = cfg.build().map_err(|e| report(annotate(&text, e)))?;
    Ok((text, scenario))
}

fn write_outputs(dir: &Path, text: &str, scenario: &Scenario, exp: &Experiment, manifest: &RunManifest) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    for (method, records) in &exp.metrics {
        fs::write(dir.join(format!("metrics_{}.csv", method.key())), metrics_csv(records))?;
    }
    for (method, grid) in &exp.fields {
        fs::write(dir.join(format!("field_{}.csv", method.key())), field_csv(grid, exp.db_reference))?;
    }
    fs::write(dir.join("scenario.toml"), text)?;
    fs::write(dir.join("manifest.txt"), manifest.render(scenario, exp.db_reference))?;
    Ok(())
}

fn run(config: &Path, methods: Vec<Method>, out: &Path, freq_step: Option<f64>, threads: Option<usize>) -> i32 {
    if threads == Some(0) {
        eprintln!("--threads must be at least 1");
        return EXIT_CONFIG;
    }
    if freq_step.is_some_and(|s| !(s > 0.0 && s.is_finite())) {
        eprintln!("--freq-step must be a positive number of hertz");
        return EXIT_CONFIG;
    }
    let (text, scenario) = match load(config, freq_step) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return EXIT_IO;
        }
    };
    let exp = match pool.install(|| run_experiment(&scenario, &methods)) {
        Ok(exp) => exp,
        Err(failure) => {
            eprintln!("{failure}");
            return EXIT_NUMERICAL;
        }
    };
    for w in &exp.warnings {
        eprintln!("warning: {w}");
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_path: config.display().to_string(),
        scenario_sha256: hex::encode(Sha256::digest(text.as_bytes())),
        methods,
        output_dir: out.display().to_string(),
        seed: 0,
        threads: pool.current_num_threads(),
        freq_step_override: freq_step,
    };
    if let Err(e) = write_outputs(out, &text, &scenario, &exp, &manifest) {
        eprintln!("{}: {e}", out.display());
        return EXIT_IO;
    }
    EXIT_OK
}

fn check(config: &Path) -> i32 {
    match load(config, None) {
        Ok((_, s)) => {
            println!(
                "{}: ok ({} sources, {} control points, {} frequencies)",
                config.display(),
                s.sources.len(),
                s.control_points.len(),
                s.frequencies.len()
            );
            EXIT_OK
        }
        Err(code) => code,
    }
}

/// Parse `args` (program name first) and execute; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { config, methods, out, freq_step, threads } => {
            match Method::parse_list(&methods) {
                Ok(methods) => run(&config, methods, &out, freq_step, threads),
                Err(e) => {
                    eprintln!("--methods: {e}");
                    EXIT_CONFIG
                }
            }
        }
        Command::Check { config } => check(&config),
    }
}
