//! `holling`: run simulation experiments for the imprecise stochastic
//! Holling II one-predator two-prey system with jumps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 simulation/analysis
//! error, 4 verification failure (some enabled check did not pass).

use clap::Parser;
use holling_core::config::{ExperimentConfig, Overrides, PrecisionMode};
use holling_core::experiment::{run, ExperimentError, RunSummary};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "holling", version, about = "Imprecise stochastic Holling II one-predator two-prey simulator with jumps", disable_help_subcommand = true)]
struct Args {
    /// Experiment config file (TOML)
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Override the master seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Override the number of ensemble paths
    #[arg(long, value_name = "N")]
    paths: Option<usize>,

    /// Override the time horizon T
    #[arg(long, value_name = "T")]
    horizon: Option<f64>,

    /// Override the diffusion step
    #[arg(long, value_name = "H")]
    dt: Option<f64>,

    /// Override the precision level p (conflicts with sweep configs)
    #[arg(long, value_name = "X")]
    p: Option<f64>,

    /// Output directory (default: config, then $HOLLING_OUT, then ./out)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Run verification checks after simulating (default)
    #[arg(long, overrides_with = "no_verify")]
    verify: bool,

    /// Skip verification checks
    #[arg(long)]
    no_verify: bool,

    /// Run the precision sweep (requires a [sweep] section in the config)
    #[arg(long)]
    sweep: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<ExitCode, ExperimentError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.apply_overrides(&Overrides {
        seed: args.seed,
        paths: args.paths,
        horizon: args.horizon,
        dt: args.dt,
        p: args.p,
        out: args.out.clone(),
    })?;

    if args.sweep && !matches!(cfg.mode, PrecisionMode::Sweep(_)) {
        eprintln!("error: --sweep requires a [sweep] section in the config");
        return Ok(ExitCode::from(2));
    }

    let verify = !args.no_verify;
    let summary = run(&cfg, verify)?;
    let ok = summary.all_checks_passed();
    match &summary {
        RunSummary::Single(outcome) => {
            println!("p = {}", outcome.p);
            println!("b1 = {}", outcome.b.b1);
            println!("b2 = {}", outcome.b.b2);
            println!("b3 = {}", outcome.b.b3);
            println!("regime = {}", outcome.verdict.regime);
            if let Some(report) = &outcome.report {
                for check in &report.checks {
                    println!(
                        "check {}: {} (predicted {}, observed {}, tolerance {})",
                        check.name,
                        if check.pass { "pass" } else { "FAIL" },
                        check.predicted,
                        check.observed,
                        check.tolerance
                    );
                }
            }
            println!("artifacts: {}", outcome.out_dir.display());
        }
        RunSummary::Sweep(outcome) => {
            println!("sweep: {} grid points", outcome.rows.len());
            for row in &outcome.rows {
                println!(
                    "p = {:.4}: b = ({}, {}, {}), regime = {}",
                    row.p, row.b.b1, row.b.b2, row.b.b3, row.verdict.regime
                );
            }
            for (p, report) in &outcome.reports {
                println!(
                    "verified p = {:.4}: {}",
                    p,
                    if report.all_pass() { "pass" } else { "FAIL" }
                );
            }
            println!("artifacts: {}", outcome.out_dir.display());
        }
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    })
}
