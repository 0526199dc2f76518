//! Experiment configuration: one JSON document per run.
//!
//! ```json
//! { "kind": "classical-scan", "parameters": { "grid_side": 64 }, "seed": 7, "output_dir": "out" }
//! ```
//!
//! Every parameter is checked against the preconditions of the module that
//! will consume it while the config is parsed, so a config that loads is a
//! config that can run.

use std::fs;
use std::path::{Path, PathBuf};

use ehlab_core::classical::{MapParams, MIN_GRID_SIDE, MIN_LYAPUNOV_STEPS};
use ehlab_core::io::read_region_estimates;
use ehlab_core::quantum::MIN_VOLUME_STATES;
use ehlab_core::quantum::QuantumParams;
use ehlab_core::transition::{FitSample, MAX_EPSILON_FRACTION, MIN_FIT_SAMPLES};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// Kick strengths of the default classical sweep.
pub const DEFAULT_LAMBDAS: [f64; 7] = [0.0, 0.2, 0.5, 0.9716, 2.0, 5.0, 10.0];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Absolute, or relative to the directory the config was loaded from.
    pub output_dir: PathBuf,
    /// The document as given, echoed into the manifest.
    pub raw: Value,
}

#[derive(Debug, Clone)]
pub enum Experiment {
    ClassicalScan(ClassicalScan),
    TransitionFit(TransitionFit),
    QuantumEvolve(QuantumEvolve),
    CorrelationSeries(CorrelationSeries),
    VolumeFraction(VolumeFraction),
    GeometryCheck(GeometryCheck),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::ClassicalScan(_) => "classical-scan",
            Experiment::TransitionFit(_) => "transition-fit",
            Experiment::QuantumEvolve(_) => "quantum-evolve",
            Experiment::CorrelationSeries(_) => "correlation-series",
            Experiment::VolumeFraction(_) => "volume-fraction",
            Experiment::GeometryCheck(_) => "geometry-check",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: String,
    #[serde(default)]
    parameters: Value,
    seed: u64,
    output_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalScan {
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_grid_side")]
    pub grid_side: usize,
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "one")]
    pub tau: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionFit {
    /// Sweep CSV written by `classical-scan`.
    pub input_csv: PathBuf,
    #[serde(default = "default_epsilon")]
    pub epsilon_fraction: f64,
    /// Parsed during validation.
    #[serde(skip)]
    pub samples: Vec<FitSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialState {
    /// `|k⟩⟨k|` for one momentum eigenstate.
    Momentum { k: i64 },
    /// Haar-random pure state drawn from the run seed.
    Haar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// Projector on `k_lo ≤ k ≤ k_hi`; defaults to `±N/8`.
    Window { k_lo: Option<i64>, k_hi: Option<i64> },
    CosTheta,
    LSquared,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumEvolve {
    pub dim: usize,
    pub lambda: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub tau: f64,
    pub kicks: u64,
    #[serde(default = "momentum_zero")]
    pub initial: InitialState,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSeries {
    pub dim: usize,
    pub lambda: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub tau: f64,
    pub horizon: u64,
    #[serde(default = "haar")]
    pub initial: InitialState,
    #[serde(default = "default_window")]
    pub observable: ObservableSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeFraction {
    pub dim: usize,
    pub lambda: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default = "default_volume_states")]
    pub n_states: usize,
    pub horizon: u64,
    pub tol: f64,
    #[serde(default = "default_tail_fraction")]
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryCheck {
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_ranks")]
    pub ranks_per_dim: usize,
    #[serde(default = "default_residual_tol")]
    pub tol: f64,
}

fn default_lambdas() -> Vec<f64> {
    DEFAULT_LAMBDAS.to_vec()
}
fn default_grid_side() -> usize {
    64
}
fn default_n_steps() -> usize {
    2000
}
fn default_threshold() -> f64 {
    ehlab_core::classical::DEFAULT_THRESHOLD
}
fn one() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    ehlab_core::transition::DEFAULT_EPSILON_FRACTION
}
fn momentum_zero() -> InitialState {
    InitialState::Momentum { k: 0 }
}
fn haar() -> InitialState {
    InitialState::Haar
}
fn default_window() -> ObservableSpec {
    ObservableSpec::Window { k_lo: None, k_hi: None }
}
fn default_volume_states() -> usize {
    MIN_VOLUME_STATES
}
fn default_tail_fraction() -> f64 {
    0.1
}
fn default_dims() -> Vec<usize> {
    vec![4, 65, 257, 1024]
}
fn default_ranks() -> usize {
    20
}
fn default_residual_tol() -> f64 {
    1e-12
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("parameters.{field}: {reason}"))
}

/// Core precondition failures become field-level config errors.
fn core_check<T>(r: ehlab_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("parameters: {e}")))
}

fn parse_parameters<T: DeserializeOwned>(value: Value) -> Result<T, CliError> {
    let value = if value.is_null() { Value::Object(Default::default()) } else { value };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(format!("parameters: {}", e.inner()))
        } else {
            CliError::Config(format!("parameters.{path}: {}", e.inner()))
        }
    })
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file. Relative paths inside it are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
        let cfg: RawConfig = serde_path_to_error::deserialize(raw.clone())
            .map_err(|e| CliError::Config(format!("{}: {}", e.path(), e.inner())))?;
        let experiment = match cfg.kind.as_str() {
            "classical-scan" => Experiment::ClassicalScan(parse_parameters(cfg.parameters)?),
            "transition-fit" => Experiment::TransitionFit(parse_parameters(cfg.parameters)?),
            "quantum-evolve" => Experiment::QuantumEvolve(parse_parameters(cfg.parameters)?),
            "correlation-series" => Experiment::CorrelationSeries(parse_parameters(cfg.parameters)?),
            "volume-fraction" => Experiment::VolumeFraction(parse_parameters(cfg.parameters)?),
            "geometry-check" => Experiment::GeometryCheck(parse_parameters(cfg.parameters)?),
            other => {
                return Err(CliError::Config(format!(
                    "kind: unknown experiment `{other}`, expected one of classical-scan, transition-fit, \
                     quantum-evolve, correlation-series, volume-fraction, geometry-check"
                )))
            }
        };
        let mut config = ExperimentConfig {
            experiment,
            seed: cfg.seed,
            output_dir: resolve(base, &cfg.output_dir),
            raw,
        };
        config.validate(base)?;
        Ok(config)
    }

    fn validate(&mut self, base: &Path) -> Result<(), CliError> {
        if self.output_dir.exists() && !self.output_dir.is_dir() {
            return Err(CliError::Config(format!(
                "output_dir: {} exists and is not a directory",
                self.output_dir.display()
            )));
        }
        match &mut self.experiment {
            Experiment::ClassicalScan(p) => p.validate(),
            Experiment::TransitionFit(p) => p.validate(base),
            Experiment::QuantumEvolve(p) => p.validate(),
            Experiment::CorrelationSeries(p) => p.validate(),
            Experiment::VolumeFraction(p) => p.validate(),
            Experiment::GeometryCheck(p) => p.validate(),
        }
    }
}

impl ClassicalScan {
    fn validate(&self) -> Result<(), CliError> {
        if self.lambdas.is_empty() {
            return Err(invalid("lambdas", "must not be empty"));
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            MapParams::new(l, self.tau).map_err(|e| invalid(&format!("lambdas[{i}]"), e))?;
        }
        if self.grid_side < MIN_GRID_SIDE {
            return Err(invalid("grid_side", format!("must be >= {MIN_GRID_SIDE}, got {}", self.grid_side)));
        }
        if self.n_steps < MIN_LYAPUNOV_STEPS {
            return Err(invalid("n_steps", format!("must be >= {MIN_LYAPUNOV_STEPS}, got {}", self.n_steps)));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(invalid("threshold", format!("must be finite and >= 0, got {}", self.threshold)));
        }
        Ok(())
    }
}

impl TransitionFit {
    fn validate(&mut self, base: &Path) -> Result<(), CliError> {
        if !(self.epsilon_fraction > 0.0 && self.epsilon_fraction <= MAX_EPSILON_FRACTION) {
            return Err(invalid(
                "epsilon_fraction",
                format!("must lie in (0, {MAX_EPSILON_FRACTION}], got {}", self.epsilon_fraction),
            ));
        }
        self.input_csv = resolve(base, &self.input_csv);
        let file = fs::File::open(&self.input_csv)
            .map_err(|e| invalid("input_csv", format!("cannot open {}: {e}", self.input_csv.display())))?;
        let estimates = read_region_estimates(file).map_err(|e| invalid("input_csv", e))?;
        if estimates.len() < MIN_FIT_SAMPLES {
            return Err(invalid(
                "input_csv",
                format!("need at least {MIN_FIT_SAMPLES} rows, got {}", estimates.len()),
            ));
        }
        let mut samples: Vec<FitSample> = estimates.iter().map(FitSample::from).collect();
        samples.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        let (lo, hi) = (samples[0].lambda, samples[samples.len() - 1].lambda);
        if lo > 0.0 || hi < 2.0 {
            return Err(invalid("input_csv", format!("λ must span [0, 2], got [{lo}, {hi}]")));
        }
        self.samples = samples;
        Ok(())
    }
}

fn quantum_params(dim: usize, lambda: f64, hbar: f64, tau: f64) -> Result<QuantumParams, CliError> {
    core_check(QuantumParams::new(dim, lambda, hbar, tau))
}

fn check_initial(initial: InitialState, params: &QuantumParams) -> Result<(), CliError> {
    if let InitialState::Momentum { k } = initial {
        if params.index_of(k).is_none() {
            return Err(invalid(
                "initial.k",
                format!("momentum {k} outside the ladder ±{}", params.k_max()),
            ));
        }
    }
    Ok(())
}

impl QuantumEvolve {
    pub fn params(&self) -> Result<QuantumParams, CliError> {
        quantum_params(self.dim, self.lambda, self.hbar, self.tau)
    }

    fn validate(&self) -> Result<(), CliError> {
        let params = self.params()?;
        // The localization fit needs two distinct |k| in the bulk window.
        if self.dim < 5 {
            return Err(invalid("dim", format!("must be >= 5, got {}", self.dim)));
        }
        check_initial(self.initial, &params)
    }
}

impl CorrelationSeries {
    pub fn params(&self) -> Result<QuantumParams, CliError> {
        quantum_params(self.dim, self.lambda, self.hbar, self.tau)
    }

    /// Window bounds with defaults filled in.
    pub fn window(&self) -> Option<(i64, i64)> {
        match self.observable {
            ObservableSpec::Window { k_lo, k_hi } => {
                let w = ehlab_core::quantum::observables::default_window_halfwidth(self.dim);
                Some((k_lo.unwrap_or(-w), k_hi.unwrap_or(w)))
            }
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let params = self.params()?;
        if self.horizon < 2 {
            return Err(invalid("horizon", format!("must be >= 2, got {}", self.horizon)));
        }
        if let Some((lo, hi)) = self.window() {
            if lo > hi || params.index_of(lo).is_none() || params.index_of(hi).is_none() {
                return Err(invalid(
                    "observable",
                    format!("window [{lo}, {hi}] must be ordered and inside ±{}", params.k_max()),
                ));
            }
        }
        check_initial(self.initial, &params)
    }
}

impl VolumeFraction {
    pub fn params(&self) -> Result<QuantumParams, CliError> {
        quantum_params(self.dim, self.lambda, self.hbar, self.tau)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        if self.n_states < MIN_VOLUME_STATES {
            return Err(invalid("n_states", format!("must be >= {MIN_VOLUME_STATES}, got {}", self.n_states)));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be >= 1"));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(invalid("tol", format!("must be finite and >= 0, got {}", self.tol)));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(invalid("tail_fraction", format!("must lie in (0, 1], got {}", self.tail_fraction)));
        }
        Ok(())
    }
}

impl GeometryCheck {
    fn validate(&self) -> Result<(), CliError> {
        if self.dims.is_empty() {
            return Err(invalid("dims", "must not be empty"));
        }
        if let Some(i) = self.dims.iter().position(|&d| d == 0) {
            return Err(invalid(&format!("dims[{i}]"), "must be >= 1"));
        }
        if self.ranks_per_dim == 0 {
            return Err(invalid("ranks_per_dim", "must be >= 1"));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(invalid("tol", format!("must be finite and >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}
