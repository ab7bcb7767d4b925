//! Long-run theory and its verification against simulated ensembles.
//!
//! The signs of the threshold coefficients classify the asymptotic regime:
//!
//! * `b1, b2, b3 < 0`: every population goes extinct, with log-slope of
//!   species `i` bounded above by `b_i` (for the predator, once the prey are
//!   gone, by `b3`).
//! * `b1 > 0`, `b2 < 0`, `b3 + a31 < 0`: prey 2 and the predator go extinct
//!   (the predator's slope bound is `b3 + a31` because prey 1 survives and
//!   its functional response saturates at one), while the time average of
//!   prey 1 converges to `b1 / a11`.
//! * `b3 > 0` together with both max-threshold conditions on `b1` and `b2`:
//!   all populations are strongly persistent in the mean, with closed-form
//!   interval bounds on each long-run time average.
//!
//! Anything else is reported as `Indeterminate` rather than guessed.
//!
//! Note on the first case: the source theorem's statement carries `b1 > 0,
//! b2 > 0` but its own proof derives extinction from `b1 < 0` and `b2 < 0`;
//! the proof's signs are the consistent ones and are what this module
//! implements.
//!
//! Asymptotic quantities (`limsup`/`liminf` time averages, log-slopes) are
//! estimated on a trailing window, by default the second half of the
//! horizon; pass/fail tolerances are three Monte Carlo standard errors plus
//! an absolute floor of `1e-3`.

use crate::engine::SampledPath;
use crate::model::{BCoefficients, CrispModel, Species};
use crate::report::{CheckRecord, VerificationReport};
use crate::stats;
use serde::Serialize;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("lemma hypothesis violated: b = {b} < 0 (the process is subcritical; expect extinction)")]
    HypothesisViolated { b: f64 },
    #[error("self-interaction coefficient must be positive, got {0}")]
    NonPositiveSelfInteraction(f64),
    #[error("window [{start}, {end}) selects no recorded samples")]
    EmptyWindow { start: f64, end: f64 },
    #[error("invalid window: start {start} must be < end {end}")]
    InvalidWindow { start: f64, end: f64 },
    #[error("tail fraction must lie in (0, 1], got {0}")]
    InvalidTailFraction(f64),
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("moment order k must be positive, got {0}")]
    InvalidMomentOrder(f64),
}

/// Qualitative long-run outcome. See the module docs for the conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    AllExtinct,
    PreyOnePersists,
    AllPersistent,
    Indeterminate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Regime::AllExtinct => "AllExtinct",
            Regime::PreyOnePersists => "PreyOnePersists",
            Regime::AllPersistent => "AllPersistent",
            Regime::Indeterminate => "Indeterminate",
        };
        f.write_str(name)
    }
}

/// Regime classification plus the per-species predictions it licenses:
/// upper bounds on tail log-slopes and/or closed-form intervals for the
/// long-run time averages (a point prediction is a degenerate interval).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    pub predicted_rates: [Option<f64>; 3],
    pub predicted_bounds: [Option<(f64, f64)>; 3],
}

impl RegimeVerdict {
    fn indeterminate() -> Self {
        Self {
            regime: Regime::Indeterminate,
            predicted_rates: [None; 3],
            predicted_bounds: [None; 3],
        }
    }
}

/// Classify the regime from the threshold coefficients and the realized
/// interaction matrix.
pub fn classify_regime(b: &BCoefficients, model: &CrispModel) -> RegimeVerdict {
    use Species::{Predator, Prey1, Prey2};
    let a11 = model.a(Prey1, Prey1);
    let a12 = model.a(Prey1, Prey2);
    let a13 = model.a(Prey1, Predator);
    let a21 = model.a(Prey2, Prey1);
    let a22 = model.a(Prey2, Prey2);
    let a23 = model.a(Prey2, Predator);
    let a31 = model.a(Predator, Prey1);
    let a32 = model.a(Predator, Prey2);
    let a33 = model.a(Predator, Predator);

    if b.b1 < 0.0 && b.b2 < 0.0 && b.b3 < 0.0 {
        return RegimeVerdict {
            regime: Regime::AllExtinct,
            predicted_rates: [Some(b.b1), Some(b.b2), Some(b.b3)],
            predicted_bounds: [None; 3],
        };
    }

    if b.b1 > 0.0 && b.b2 < 0.0 && b.b3 + a31 < 0.0 && a11 > 0.0 {
        let average = b.b1 / a11;
        return RegimeVerdict {
            regime: Regime::PreyOnePersists,
            predicted_rates: [Some(0.0), Some(b.b2), Some(b.b3 + a31)],
            predicted_bounds: [Some((average, average)), None, None],
        };
    }

    if b.b3 > 0.0 && a11 > 0.0 && a22 > 0.0 && a33 > 0.0 {
        let y_hi = (b.b3 + a31 + a32) / a33;
        let threshold_1 = (a12 * b.b2 / a22 + a13 * y_hi).max(0.0);
        let threshold_2 = (a21 * b.b1 / a11 + a23 * y_hi).max(0.0);
        if b.b1 > threshold_1 && b.b2 > threshold_2 {
            let x1 = ((b.b1 - a12 * b.b2 / a22 - a13 * y_hi) / a11, b.b1 / a11);
            let x2 = ((b.b2 - a21 * b.b1 / a11 - a23 * y_hi) / a22, b.b2 / a22);
            let y = (b.b3 / a33, y_hi);
            return RegimeVerdict {
                regime: Regime::AllPersistent,
                predicted_rates: [Some(0.0); 3],
                predicted_bounds: [Some(x1), Some(x2), Some(y)],
            };
        }
    }

    RegimeVerdict::indeterminate()
}

/// Closed-form long-run time average `b / a` of the one-dimensional logistic
/// jump-diffusion with per-capita rate `rate`, self-interaction
/// `self_interaction`, noise `sigma` and jump atoms `(weight, size)`;
/// requires the threshold coefficient `b >= 0`.
pub fn logistic_time_average(
    rate: f64,
    self_interaction: f64,
    sigma: f64,
    jumps: &[(f64, f64)],
) -> Result<f64, AnalysisError> {
    if !(self_interaction > 0.0) {
        return Err(AnalysisError::NonPositiveSelfInteraction(self_interaction));
    }
    let jump_integral: f64 = jumps.iter().map(|&(w, c)| w * c.ln_1p()).sum();
    let b = rate - sigma * sigma / 2.0 + jump_integral;
    if b < 0.0 {
        return Err(AnalysisError::HypothesisViolated { b });
    }
    Ok(b / self_interaction)
}

/// Left-endpoint Riemann average of `exp(log_values)` over `[start, end)` on
/// the recorded grid, weighted by the (possibly nonuniform) sample spacing.
pub fn time_average(
    times: &[f64],
    log_values: &[f64],
    window: (f64, f64),
) -> Result<f64, AnalysisError> {
    let (start, end) = window;
    if !(start < end) {
        return Err(AnalysisError::InvalidWindow { start, end });
    }
    let mut weighted = Vec::new();
    let mut weights = Vec::new();
    for (i, (&t, &u)) in times.iter().zip(log_values).enumerate() {
        if t < start || t >= end {
            continue;
        }
        let t_next = if i + 1 < times.len() {
            times[i + 1].min(end)
        } else {
            end
        };
        let w = t_next - t;
        if w > 0.0 {
            weighted.push(u.exp() * w);
            weights.push(w);
        }
    }
    if weights.is_empty() {
        return Err(AnalysisError::EmptyWindow { start, end });
    }
    Ok(stats::pairwise_sum(&weighted) / stats::pairwise_sum(&weights))
}

/// Least-squares slope of a recorded log series over the trailing
/// `tail_fraction` of the horizon.
pub fn log_slope(
    times: &[f64],
    log_values: &[f64],
    tail_fraction: f64,
) -> Result<f64, AnalysisError> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(AnalysisError::InvalidTailFraction(tail_fraction));
    }
    let t_end = *times.last().ok_or(AnalysisError::EmptyEnsemble)?;
    let start = t_end * (1.0 - tail_fraction);
    let from = times.partition_point(|&t| t < start);
    if times.len() - from < 2 {
        return Err(AnalysisError::EmptyWindow { start, end: t_end });
    }
    Ok(stats::least_squares_slope(&times[from..], &log_values[from..]))
}

/// Cross-path time-average estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeAverageEstimate {
    pub species: Species,
    pub window: (f64, f64),
    pub value: f64,
    pub std_error: f64,
}

/// Cross-path tail log-slope estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogSlopeEstimate {
    pub species: Species,
    pub tail_fraction: f64,
    pub value: f64,
    pub std_error: f64,
}

/// Ensemble version of [`time_average`]: cross-path mean and standard error
/// of the per-path window averages. Pass a single-element slice for one path.
pub fn estimate_time_average<P: SampledPath>(
    paths: &[P],
    species: Species,
    window: (f64, f64),
) -> Result<TimeAverageEstimate, AnalysisError> {
    if paths.is_empty() {
        return Err(AnalysisError::EmptyEnsemble);
    }
    let per_path: Result<Vec<f64>, _> = paths
        .iter()
        .map(|p| time_average(p.times(), p.log_series(species), window))
        .collect();
    let (value, std_error) = stats::mean_and_std_error(&per_path?);
    Ok(TimeAverageEstimate {
        species,
        window,
        value,
        std_error,
    })
}

/// Ensemble version of [`log_slope`].
pub fn estimate_log_slope<P: SampledPath>(
    paths: &[P],
    species: Species,
    tail_fraction: f64,
) -> Result<LogSlopeEstimate, AnalysisError> {
    if paths.is_empty() {
        return Err(AnalysisError::EmptyEnsemble);
    }
    let per_path: Result<Vec<f64>, _> = paths
        .iter()
        .map(|p| log_slope(p.times(), p.log_series(species), tail_fraction))
        .collect();
    let (value, std_error) = stats::mean_and_std_error(&per_path?);
    Ok(LogSlopeEstimate {
        species,
        tail_fraction,
        value,
        std_error,
    })
}

/// Fraction of paths whose terminal value of `species` is below `threshold`.
pub fn terminal_extinction_fraction<P: SampledPath>(
    paths: &[P],
    species: Species,
    threshold: f64,
) -> f64 {
    if paths.is_empty() {
        return f64::NAN;
    }
    let hits = paths
        .iter()
        .filter(|p| p.terminal(species) < threshold)
        .count();
    hits as f64 / paths.len() as f64
}

fn joint_extinction_fraction<P: SampledPath>(
    paths: &[P],
    species: &[Species],
    threshold: f64,
) -> f64 {
    if paths.is_empty() {
        return f64::NAN;
    }
    let hits = paths
        .iter()
        .filter(|p| species.iter().all(|&sp| p.terminal(sp) < threshold))
        .count();
    hits as f64 / paths.len() as f64
}

/// Empirical check of the k-th moment bound: the ensemble mean of
/// `x1^k + x2^k + y^k` on the recorded grid, summarized over the second half
/// of the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub k: f64,
    pub times: Vec<f64>,
    pub mean_moment: Vec<f64>,
    pub window: (f64, f64),
    pub window_max: f64,
    pub window_median: f64,
}

impl MomentReport {
    /// No blow-up: the running max over the tail window stays within twice
    /// its median.
    pub fn bounded(&self) -> bool {
        self.window_max <= 2.0 * self.window_median
    }
}

pub fn check_moment_bound<P: SampledPath>(paths: &[P], k: f64) -> Result<MomentReport, AnalysisError> {
    if paths.is_empty() {
        return Err(AnalysisError::EmptyEnsemble);
    }
    if !(k > 0.0) {
        return Err(AnalysisError::InvalidMomentOrder(k));
    }
    let len = paths.iter().map(|p| p.times().len()).min().unwrap_or(0);
    if len == 0 {
        return Err(AnalysisError::EmptyEnsemble);
    }
    let times: Vec<f64> = paths[0].times()[..len].to_vec();
    let mut mean_moment = Vec::with_capacity(len);
    let mut per_path = vec![0.0; paths.len()];
    for idx in 0..len {
        for (slot, p) in per_path.iter_mut().zip(paths) {
            *slot = Species::ALL
                .iter()
                .map(|&sp| (k * p.log_series(sp)[idx]).exp())
                .sum();
        }
        mean_moment.push(stats::mean(&per_path));
    }
    let t_end = *times.last().unwrap();
    let window = (t_end / 2.0, t_end);
    let tail: Vec<f64> = times
        .iter()
        .zip(&mean_moment)
        .filter(|(&t, _)| t >= window.0)
        .map(|(_, &m)| m)
        .collect();
    let window_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let window_median = stats::median(&tail);
    Ok(MomentReport {
        k,
        times,
        mean_moment,
        window,
        window_max,
        window_median,
    })
}

/// Thresholds and tolerances used by [`verify_regime`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// A terminal state below this counts as extinct.
    pub extinction_threshold: f64,
    /// Required fraction of extinct paths for an extinction check to pass.
    pub min_extinct_fraction: f64,
    /// Trailing fraction of the horizon used for tail estimates.
    pub tail_fraction: f64,
    /// Tolerances are `se_multiplier * std_error + tolerance_floor`.
    pub se_multiplier: f64,
    pub tolerance_floor: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            extinction_threshold: 1e-4,
            min_extinct_fraction: 0.95,
            tail_fraction: 0.5,
            se_multiplier: 3.0,
            tolerance_floor: 1e-3,
        }
    }
}

impl VerifyOptions {
    pub fn tolerance(&self, std_error: f64) -> f64 {
        self.se_multiplier * std_error + self.tolerance_floor
    }
}

/// Compare the verdict's predictions against an ensemble simulated from the
/// same model. Check failures are report entries, not errors; `Err` is
/// reserved for structural problems (empty ensemble, bad windows).
pub fn verify_regime<P: SampledPath>(
    model: &CrispModel,
    verdict: &RegimeVerdict,
    paths: &[P],
    opts: &VerifyOptions,
) -> Result<VerificationReport, AnalysisError> {
    if paths.is_empty() {
        return Err(AnalysisError::EmptyEnsemble);
    }
    let t_end = *paths[0].times().last().ok_or(AnalysisError::EmptyEnsemble)?;
    let window = (t_end * (1.0 - opts.tail_fraction), t_end);
    let mut checks = Vec::new();

    let extinct_species: Vec<Species> = Species::ALL
        .iter()
        .copied()
        .filter(|&sp| {
            verdict.predicted_bounds[sp.index()].is_none()
                && verdict.predicted_rates[sp.index()].is_some()
        })
        .collect();

    for &sp in &extinct_species {
        checks.push(CheckRecord::lower(
            format!("terminal_extinction_{}", sp.label()),
            opts.min_extinct_fraction,
            terminal_extinction_fraction(paths, sp, opts.extinction_threshold),
            0.0,
        ));
    }
    if extinct_species.len() > 1 {
        checks.push(CheckRecord::lower(
            "terminal_extinction_joint",
            opts.min_extinct_fraction,
            joint_extinction_fraction(paths, &extinct_species, opts.extinction_threshold),
            0.0,
        ));
    }

    for &sp in &Species::ALL {
        let idx = sp.index();
        match (verdict.predicted_rates[idx], verdict.predicted_bounds[idx]) {
            // Extinct species: tail log-slope bounded above by the predicted rate.
            (Some(rate), None) => {
                let slope = estimate_log_slope(paths, sp, opts.tail_fraction)?;
                checks.push(CheckRecord::upper(
                    format!("log_slope_{}_upper", sp.label()),
                    rate,
                    slope.value,
                    opts.tolerance(slope.std_error),
                ));
            }
            // Persistent species: slope near zero, time average within bounds.
            (rate, Some((lo, hi))) => {
                if let Some(rate) = rate {
                    let slope = estimate_log_slope(paths, sp, opts.tail_fraction)?;
                    checks.push(CheckRecord::two_sided(
                        format!("log_slope_{}_zero", sp.label()),
                        rate,
                        slope.value,
                        opts.tolerance(slope.std_error),
                    ));
                }
                let avg = estimate_time_average(paths, sp, window)?;
                let tol = opts.tolerance(avg.std_error);
                if lo == hi {
                    checks.push(CheckRecord::two_sided(
                        format!("time_average_{}", sp.label()),
                        lo,
                        avg.value,
                        tol,
                    ));
                } else {
                    checks.push(CheckRecord::lower(
                        format!("time_average_{}_lower", sp.label()),
                        lo,
                        avg.value,
                        tol,
                    ));
                    checks.push(CheckRecord::upper(
                        format!("time_average_{}_upper", sp.label()),
                        hi,
                        avg.value,
                        tol,
                    ));
                }
            }
            (None, None) => {}
        }
    }

    Ok(VerificationReport {
        regime: verdict.regime,
        b: *model.b(),
        checks,
    })
}
