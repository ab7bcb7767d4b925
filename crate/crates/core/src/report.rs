//! Verification report: one record per check, with the predicted value, the
//! observed value, the tolerance and a pass flag.
//!
//! Serialized both as a key-value text document and as CSV
//! (`check,predicted,observed,tolerance,pass`).

use crate::asymptotics::Regime;
use crate::model::BCoefficients;
use std::fmt::Write as _;

/// Outcome of a single verification check.
///
/// The comparison convention is encoded at construction: `two_sided` passes
/// when `|observed - predicted| <= tolerance`, `upper` when
/// `observed <= predicted + tolerance`, `lower` when
/// `observed >= predicted - tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub predicted: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn two_sided(name: impl Into<String>, predicted: f64, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            predicted,
            observed,
            tolerance,
            pass: (observed - predicted).abs() <= tolerance,
        }
    }

    pub fn upper(name: impl Into<String>, predicted: f64, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            predicted,
            observed,
            tolerance,
            pass: observed <= predicted + tolerance,
        }
    }

    pub fn lower(name: impl Into<String>, predicted: f64, observed: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            predicted,
            observed,
            tolerance,
            pass: observed >= predicted - tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub regime: Regime,
    pub b: BCoefficients,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_names(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect()
    }

    /// Key-value text rendering, one blank-line-separated record per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "regime = {}", self.regime);
        let _ = writeln!(out, "b1 = {}", self.b.b1);
        let _ = writeln!(out, "b2 = {}", self.b.b2);
        let _ = writeln!(out, "b3 = {}", self.b.b3);
        for check in &self.checks {
            let _ = writeln!(out);
            let _ = writeln!(out, "check = {}", check.name);
            let _ = writeln!(out, "predicted = {}", check.predicted);
            let _ = writeln!(out, "observed = {}", check.observed);
            let _ = writeln!(out, "tolerance = {}", check.tolerance);
            let _ = writeln!(out, "pass = {}", check.pass);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,predicted,observed,tolerance,pass\n");
        for check in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                check.name, check.predicted, check.observed, check.tolerance, check.pass
            );
        }
        out
    }
}
