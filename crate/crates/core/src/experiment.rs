//! Experiment orchestration: realize the model, simulate the ensemble,
//! classify and verify the regime, and emit artifacts.
//!
//! This layer composes the other modules; every number it writes is computed
//! by them. Orchestration itself is single-threaded, parallelism lives in
//! the ensemble engine.

use crate::asymptotics::{
    check_moment_bound, classify_regime, verify_regime, AnalysisError, Regime, RegimeVerdict,
    VerifyOptions,
};
use crate::config::{ConfigError, ExperimentConfig, PrecisionMode, SweepPlan, SweepVerify};
use crate::engine::{run_ensemble, EngineError, Trajectory};
use crate::model::{BCoefficients, CrispModel, ModelError};
use crate::output::{self, ReproStamp};
use crate::report::{CheckRecord, VerificationReport};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HOLLING_OUT";

/// Fault-injection hook: when set to a float, every predicted rate and bound
/// is shifted by that amount before verification. Exists so the
/// verification-failure exit path can be exercised end to end; never set it
/// for real runs.
pub const SHIFT_PREDICTED_ENV: &str = "HOLLING_SHIFT_PREDICTED";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Exit-code taxonomy: 2 config/environment, 3 simulation/analysis.
    /// (0 is success, 4 is reserved for verification failure, which is an
    /// outcome rather than an error.)
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Io(_) => 2,
            ExperimentError::Engine(_)
            | ExperimentError::Model(_)
            | ExperimentError::Analysis(_) => 3,
        }
    }
}

/// Result of a single-`p` experiment run.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub p: f64,
    pub b: BCoefficients,
    pub verdict: RegimeVerdict,
    pub report: Option<VerificationReport>,
    pub out_dir: PathBuf,
}

impl ExperimentOutcome {
    pub fn all_checks_passed(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.all_pass())
    }
}

/// Resolve the output directory: config value, then `HOLLING_OUT`, then
/// `./out`.
pub fn resolve_out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out"))
    })
}

fn prediction_shift() -> Option<f64> {
    std::env::var(SHIFT_PREDICTED_ENV).ok()?.parse().ok()
}

fn apply_prediction_shift(verdict: &mut RegimeVerdict) {
    if let Some(shift) = prediction_shift() {
        log::warn!("{SHIFT_PREDICTED_ENV}={shift} set: predictions are deliberately wrong");
        for rate in verdict.predicted_rates.iter_mut().flatten() {
            *rate += shift;
        }
        for bounds in verdict.predicted_bounds.iter_mut().flatten() {
            bounds.0 += shift;
            bounds.1 += shift;
        }
    }
}

fn simulate_and_verify(
    cfg: &ExperimentConfig,
    crisp: &CrispModel,
    out_dir: &Path,
    verify: bool,
) -> Result<(RegimeVerdict, Option<VerificationReport>), ExperimentError> {
    let mut verdict = classify_regime(crisp.b(), crisp);
    let ensemble: Vec<Trajectory> = run_ensemble(crisp, &cfg.init, &cfg.sim)?;
    let stamp = ReproStamp {
        seed: cfg.sim.seed,
        dt: cfg.sim.dt,
        p: crisp.p(),
    };

    fs::create_dir_all(out_dir)?;
    output::write_summary_csv(&out_dir.join("summary.csv"), &stamp, &ensemble)?;

    let b = crisp.b();
    fs::write(
        out_dir.join("verdict.txt"),
        format!(
            "{}\np = {}\nb1 = {}\nb2 = {}\nb3 = {}\nregime = {}\n",
            stamp.comment_line(),
            crisp.p(),
            b.b1,
            b.b2,
            b.b3,
            verdict.regime
        ),
    )?;

    if cfg.write_paths {
        let paths_dir = out_dir.join("paths");
        fs::create_dir_all(&paths_dir)?;
        let mark_sizes: Vec<[f64; 3]> = crisp.jumps().atoms().iter().map(|a| a.sizes()).collect();
        for (i, traj) in ensemble.iter().enumerate() {
            output::write_trajectory_csv(
                &paths_dir.join(format!("path_{i:05}.csv")),
                &stamp,
                traj,
            )?;
            output::write_jump_events_csv(
                &paths_dir.join(format!("jumps_{i:05}.csv")),
                &stamp,
                traj.jump_events(),
                &mark_sizes,
            )?;
        }
    }

    let report = if verify {
        apply_prediction_shift(&mut verdict);
        let opts = VerifyOptions::default();
        let mut report = verify_regime(crisp, &verdict, &ensemble, &opts)?;
        if verdict.regime == Regime::AllPersistent {
            for k in [1.0, 2.0] {
                let moment = check_moment_bound(&ensemble, k)?;
                report.checks.push(CheckRecord::upper(
                    format!("moment_bound_k{k}"),
                    2.0 * moment.window_median,
                    moment.window_max,
                    0.0,
                ));
            }
        }
        report.checks.retain(|c| cfg.checks.allows(&c.name));
        output::write_report(out_dir, &stamp, &report)?;
        Some(report)
    } else {
        None
    };

    Ok((verdict, report))
}

/// Run a single-`p` experiment: simulate, write `summary.csv` (plus per-path
/// CSVs when configured), and, when `verify` is set, check the regime
/// predictions and write `report.txt`/`report.csv`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    verify: bool,
) -> Result<ExperimentOutcome, ExperimentError> {
    let p = cfg.single_p().ok_or_else(|| ConfigError::Validation {
        field: "p".to_string(),
        reason: "run_experiment requires a single p; use sweep_p for sweep configs".to_string(),
    })?;
    let crisp = cfg.model.realize(p)?;
    let out_dir = resolve_out_dir(cfg);
    let (verdict, report) = simulate_and_verify(cfg, &crisp, &out_dir, verify)?;
    Ok(ExperimentOutcome {
        p,
        b: *crisp.b(),
        verdict,
        report,
        out_dir,
    })
}

/// One classification row of a precision sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub p: f64,
    pub b: BCoefficients,
    pub verdict: RegimeVerdict,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub reports: Vec<(f64, VerificationReport)>,
    pub out_dir: PathBuf,
}

impl SweepOutcome {
    pub fn all_checks_passed(&self) -> bool {
        self.reports.iter().all(|(_, r)| r.all_pass())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_sweep_csv(path: &Path, seed: u64, dt: f64, rows: &[SweepRow]) -> std::io::Result<()> {
    let mut body = String::new();
    let _ = writeln!(body, "# holling {} seed={} dt={} sweep", output::VERSION, seed, dt);
    let _ = writeln!(
        body,
        "p,b1,b2,b3,regime,rate_x1,rate_x2,rate_y,avg_lo_x1,avg_hi_x1,avg_lo_x2,avg_hi_x2,avg_lo_y,avg_hi_y"
    );
    for row in rows {
        let bounds = row.verdict.predicted_bounds;
        let rates = row.verdict.predicted_rates;
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.p,
            row.b.b1,
            row.b.b2,
            row.b.b3,
            row.verdict.regime,
            opt(rates[0]),
            opt(rates[1]),
            opt(rates[2]),
            opt(bounds[0].map(|b| b.0)),
            opt(bounds[0].map(|b| b.1)),
            opt(bounds[1].map(|b| b.0)),
            opt(bounds[1].map(|b| b.1)),
            opt(bounds[2].map(|b| b.0)),
            opt(bounds[2].map(|b| b.1)),
        );
    }
    fs::write(path, body)
}

/// Sweep the precision level: classify at every grid point and emit
/// `sweep.csv`; simulate-and-verify at the points selected by the plan's
/// `verify` policy, each into its own `p_*` subdirectory.
pub fn sweep_p(cfg: &ExperimentConfig, plan: &SweepPlan) -> Result<SweepOutcome, ExperimentError> {
    let grid = plan.grid();
    let mut rows = Vec::with_capacity(grid.len());
    for &p in &grid {
        let crisp = cfg.model.realize(p)?;
        let verdict = classify_regime(crisp.b(), &crisp);
        rows.push(SweepRow {
            p,
            b: *crisp.b(),
            verdict,
        });
    }

    let out_dir = resolve_out_dir(cfg);
    fs::create_dir_all(&out_dir)?;
    write_sweep_csv(&out_dir.join("sweep.csv"), cfg.sim.seed, cfg.sim.dt, &rows)?;

    let verify_points: Vec<f64> = match plan.verify {
        SweepVerify::None => Vec::new(),
        SweepVerify::Endpoints => vec![grid[0], *grid.last().unwrap()],
        SweepVerify::All => grid.clone(),
    };
    let mut reports = Vec::new();
    for &p in &verify_points {
        let crisp = cfg.model.realize(p)?;
        let sub = out_dir.join(format!("p_{p:.4}"));
        let (_, report) = simulate_and_verify(cfg, &crisp, &sub, true)?;
        reports.push((p, report.expect("verification was requested")));
    }

    Ok(SweepOutcome {
        rows,
        reports,
        out_dir,
    })
}

/// Convenience entry point used by the CLI: dispatch on the config's mode.
pub fn run(cfg: &ExperimentConfig, verify: bool) -> Result<RunSummary, ExperimentError> {
    match &cfg.mode {
        PrecisionMode::Single(_) => run_experiment(cfg, verify).map(RunSummary::Single),
        PrecisionMode::Sweep(plan) => sweep_p(cfg, plan).map(RunSummary::Sweep),
    }
}

#[derive(Debug)]
pub enum RunSummary {
    Single(ExperimentOutcome),
    Sweep(SweepOutcome),
}

impl RunSummary {
    pub fn all_checks_passed(&self) -> bool {
        match self {
            RunSummary::Single(o) => o.all_checks_passed(),
            RunSummary::Sweep(o) => o.all_checks_passed(),
        }
    }
}
