//! Simulation and analysis toolkit for a stochastic Holling II one-predator
//! two-prey system with jumps and imprecise (interval-valued) parameters.
//!
//! The pieces, bottom up:
//!
//! * [`interval`]: interval-number arithmetic and the realization function
//!   `f(p) = lo^(1-p) * hi^p` that turns an imprecise coefficient into a
//!   crisp one at precision level `p`.
//! * [`model`]: the imprecise model, its crisp realization, the finite
//!   atomic jump measure, and the threshold coefficients `b1`, `b2`, `b3`.
//! * [`engine`]: positivity-preserving log-space Euler paths with exact
//!   compound-Poisson jumps, deterministically seeded per path, plus the
//!   four one-dimensional comparison processes.
//! * [`asymptotics`]: regime classification from the signs of the `b_i`,
//!   closed-form long-run predictions, ensemble estimators, and the
//!   verification of theory against simulation.
//! * [`config`] / [`experiment`] / [`output`]: TOML experiment configs,
//!   orchestration (single run or precision sweep) and CSV/report artifacts.

pub mod asymptotics;
pub mod config;
pub mod engine;
pub mod experiment;
pub mod interval;
pub mod model;
pub mod output;
pub mod report;
mod rng;
pub mod stats;

pub use asymptotics::{
    check_moment_bound, classify_regime, estimate_log_slope, estimate_time_average,
    logistic_time_average, verify_regime, AnalysisError, Regime, RegimeVerdict, VerifyOptions,
};
pub use config::{ConfigError, ExperimentConfig, Overrides, PrecisionMode};
pub use engine::{
    run_comparison_ensemble, run_ensemble, simulate_comparison, simulate_path, ComparisonKind,
    ComparisonSpec, EngineError, SampledPath, ScalarTrajectory, SimulationConfig, Trajectory,
};
pub use experiment::{
    run, run_experiment, sweep_p, ExperimentError, ExperimentOutcome, RunSummary,
};
pub use interval::{Interval, IntervalError, PositiveInterval};
pub use model::{
    BCoefficients, CrispModel, ImpreciseModel, JumpAtom, JumpMeasure, ModelError, Species,
    StateVector,
};
pub use report::{CheckRecord, VerificationReport};
