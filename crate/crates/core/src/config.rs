//! Experiment configuration.
//!
//! Configs are TOML documents: interval parameters are two-element arrays
//! `[lo, hi]`, jump atoms an array of `{ weight, c1, c2, c3 }` tables. A
//! minimal config only needs the `[model]` section; everything else has
//! defaults (`p = 0.5`, the engine's default grid and seeding, initial state
//! `(0.5, 0.5, 0.5)`).
//!
//! ```toml
//! p = 0.5
//!
//! [model]
//! r1 = [0.3, 0.4]
//! # ... r2, r3, a11..a33, sigma1..sigma3
//!
//! [[model.jumps]]
//! weight = 0.5
//! c1 = 0.1
//! c2 = -0.3
//! c3 = -0.2
//!
//! [sim]
//! horizon = 1000.0
//! dt = 0.001
//! seed = 42
//! paths = 200
//! record_stride = 100
//!
//! [init]
//! x1 = 0.5
//! x2 = 0.5
//! y = 0.5
//!
//! [output]
//! dir = "out"
//! write_paths = false
//!
//! # instead of `p`: sweep the precision level
//! # [sweep]
//! # start = 0.0
//! # stop = 1.0
//! # count = 11
//! # verify = "endpoints"   # "none" | "endpoints" | "all"
//! ```

use crate::engine::SimulationConfig;
use crate::interval::Interval;
use crate::model::{ImpreciseModel, JumpAtom, JumpMeasure, StateVector};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config error at `{field}`: {reason}")]
    Validation { field: String, reason: String },
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn invalid(field: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

/// Which verification check families are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckFilter {
    pub terminal: bool,
    pub slope: bool,
    pub time_average: bool,
    pub moment: bool,
}

impl Default for CheckFilter {
    fn default() -> Self {
        Self {
            terminal: true,
            slope: true,
            time_average: true,
            moment: true,
        }
    }
}

impl CheckFilter {
    pub fn from_names(names: &[String]) -> Result<Self, ConfigError> {
        let mut filter = Self {
            terminal: false,
            slope: false,
            time_average: false,
            moment: false,
        };
        for name in names {
            match name.as_str() {
                "all" => filter = Self::default(),
                "terminal" => filter.terminal = true,
                "slope" => filter.slope = true,
                "time_average" => filter.time_average = true,
                "moment" => filter.moment = true,
                other => {
                    return Err(invalid(
                        "checks",
                        format!(
                            "unknown check `{other}` (expected all, terminal, slope, \
                             time_average, moment)"
                        ),
                    ))
                }
            }
        }
        Ok(filter)
    }

    /// Whether a report record with this name is enabled.
    pub fn allows(&self, check_name: &str) -> bool {
        if check_name.starts_with("terminal_extinction") {
            self.terminal
        } else if check_name.starts_with("log_slope") {
            self.slope
        } else if check_name.starts_with("time_average") {
            self.time_average
        } else if check_name.starts_with("moment") {
            self.moment
        } else {
            true
        }
    }
}

/// Verification policy for sweep grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVerify {
    None,
    Endpoints,
    All,
}

/// Sweep of the precision level over `count` evenly spaced points of
/// `[start, stop]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub verify: SweepVerify,
}

impl SweepPlan {
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + i as f64 * step).collect()
    }
}

/// Either a single precision level or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum PrecisionMode {
    Single(f64),
    Sweep(SweepPlan),
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ImpreciseModel,
    pub mode: PrecisionMode,
    pub sim: SimulationConfig,
    pub init: StateVector,
    /// Output directory; `None` defers to the `HOLLING_OUT` environment
    /// variable and then `./out`.
    pub output_dir: Option<PathBuf>,
    pub write_paths: bool,
    pub checks: CheckFilter,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    p: Option<f64>,
    model: RawModel,
    #[serde(default)]
    sim: SimulationConfig,
    init: Option<RawInit>,
    output: Option<RawOutput>,
    sweep: Option<RawSweep>,
    checks: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    r1: Interval,
    r2: Interval,
    r3: Interval,
    a11: Interval,
    a12: Interval,
    a13: Interval,
    a21: Interval,
    a22: Interval,
    a23: Interval,
    a31: Interval,
    a32: Interval,
    a33: Interval,
    sigma1: Interval,
    sigma2: Interval,
    sigma3: Interval,
    #[serde(default)]
    jumps: Vec<JumpAtom>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInit {
    x1: f64,
    x2: f64,
    y: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    #[serde(default)]
    write_paths: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start: f64,
    stop: f64,
    count: usize,
    verify: Option<SweepVerify>,
}

impl ExperimentConfig {
    /// Parse and validate a TOML config document.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let m = &raw.model;
        let jumps = JumpMeasure::new(m.jumps.clone())
            .map_err(|e| invalid("model.jumps", e))?;
        let model = ImpreciseModel::new(
            [m.r1, m.r2, m.r3],
            [
                [m.a11, m.a12, m.a13],
                [m.a21, m.a22, m.a23],
                [m.a31, m.a32, m.a33],
            ],
            [m.sigma1, m.sigma2, m.sigma3],
            jumps,
        )
        .map_err(|e| invalid("model", e))?;

        let mode = match (raw.p, raw.sweep) {
            (Some(_), Some(_)) => {
                return Err(invalid("p", "exactly one of `p` and `[sweep]` may be given"))
            }
            (Some(p), None) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
                }
                PrecisionMode::Single(p)
            }
            (None, Some(sweep)) => {
                if sweep.count < 2 {
                    return Err(invalid("sweep.count", "must be >= 2"));
                }
                for (name, v) in [("sweep.start", sweep.start), ("sweep.stop", sweep.stop)] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
                    }
                }
                if sweep.start >= sweep.stop {
                    return Err(invalid("sweep.start", "must be < sweep.stop"));
                }
                PrecisionMode::Sweep(SweepPlan {
                    start: sweep.start,
                    stop: sweep.stop,
                    count: sweep.count,
                    verify: sweep.verify.unwrap_or(SweepVerify::None),
                })
            }
            (None, None) => PrecisionMode::Single(0.5),
        };

        raw.sim
            .validate()
            .map_err(|e| invalid("sim", e))?;

        let init = match raw.init {
            Some(i) => {
                StateVector::new(i.x1, i.x2, i.y).map_err(|e| invalid("init", e))?
            }
            None => StateVector::new(0.5, 0.5, 0.5).expect("default init is positive"),
        };

        let (output_dir, write_paths) = match raw.output {
            Some(o) => (o.dir, o.write_paths),
            None => (None, false),
        };

        let checks = match raw.checks {
            Some(names) => CheckFilter::from_names(&names)?,
            None => CheckFilter::default(),
        };

        Ok(Self {
            model,
            mode,
            sim: raw.sim,
            init,
            output_dir,
            write_paths,
            checks,
        })
    }

    /// Precision level of a single-run config.
    pub fn single_p(&self) -> Option<f64> {
        match self.mode {
            PrecisionMode::Single(p) => Some(p),
            PrecisionMode::Sweep(_) => None,
        }
    }
}

/// Render a model back into the `[model]` section of the config schema;
/// parsing the result reproduces the model exactly.
pub fn model_to_toml(model: &ImpreciseModel) -> String {
    use crate::model::Species::{Predator, Prey1, Prey2};
    let mut out = String::from("[model]\n");
    let iv = |i: &Interval| format!("[{}, {}]", i.lo(), i.hi());
    for (name, sp) in [("r1", Prey1), ("r2", Prey2), ("r3", Predator)] {
        out.push_str(&format!("{name} = {}\n", iv(model.r_hat(sp).interval())));
    }
    for (i, si) in [("1", Prey1), ("2", Prey2), ("3", Predator)] {
        for (j, sj) in [("1", Prey1), ("2", Prey2), ("3", Predator)] {
            out.push_str(&format!(
                "a{i}{j} = {}\n",
                iv(model.a_hat(si, sj).interval())
            ));
        }
    }
    for (name, sp) in [("sigma1", Prey1), ("sigma2", Prey2), ("sigma3", Predator)] {
        out.push_str(&format!("{name} = {}\n", iv(model.sigma_hat(sp))));
    }
    for atom in model.jumps().atoms() {
        out.push_str(&format!(
            "\n[[model.jumps]]\nweight = {}\nc1 = {}\nc2 = {}\nc3 = {}\n",
            atom.weight, atom.c1, atom.c2, atom.c3
        ));
    }
    out
}

/// CLI-style overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub p: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn apply_overrides(&mut self, overrides: &Overrides) -> Result<(), ConfigError> {
        if let Some(seed) = overrides.seed {
            self.sim.seed = seed;
        }
        if let Some(paths) = overrides.paths {
            self.sim.n_paths = paths;
        }
        if let Some(horizon) = overrides.horizon {
            self.sim.horizon = horizon;
        }
        if let Some(dt) = overrides.dt {
            self.sim.dt = dt;
        }
        if let Some(p) = overrides.p {
            if matches!(self.mode, PrecisionMode::Sweep(_)) {
                return Err(invalid("p", "--p conflicts with a [sweep] config"));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid("p", format!("must lie in [0, 1], got {p}")));
            }
            self.mode = PrecisionMode::Single(p);
        }
        if let Some(out) = &overrides.out {
            self.output_dir = Some(out.clone());
        }
        self.sim.validate().map_err(|e| invalid("sim", e))
    }
}
