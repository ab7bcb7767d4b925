//! Artifact writers.
//!
//! All CSVs use `.` decimal separators, a header row and LF line endings,
//! preceded by a single `#` comment stating the seed, step size, precision
//! level and crate version the file was produced with.

use crate::engine::{JumpEvent, SampledPath, ScalarTrajectory, Trajectory};
use crate::model::Species;
use crate::report::VerificationReport;
use crate::stats;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reproducibility context embedded as the leading comment of every artifact.
#[derive(Debug, Clone, Copy)]
pub struct ReproStamp {
    pub seed: u64,
    pub dt: f64,
    pub p: f64,
}

impl ReproStamp {
    pub fn comment_line(&self) -> String {
        format!(
            "# holling {} seed={} dt={} p={}",
            VERSION, self.seed, self.dt, self.p
        )
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Ensemble summary: per recorded time, cross-path means of the states and
/// log states (pairwise-summed, so values do not depend on how the ensemble
/// was scheduled).
pub fn write_summary_csv(
    path: &Path,
    stamp: &ReproStamp,
    paths: &[Trajectory],
) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", stamp.comment_line())?;
    writeln!(
        w,
        "time,mean_x1,mean_x2,mean_y,mean_log_x1,mean_log_x2,mean_log_y"
    )?;
    if paths.is_empty() {
        return w.flush();
    }
    let len = paths.iter().map(|t| t.times().len()).min().unwrap_or(0);
    let mut column = vec![0.0_f64; paths.len()];
    for idx in 0..len {
        let t = paths[0].times()[idx];
        let mut row = [0.0_f64; 6];
        for (slot, &sp) in row.iter_mut().zip(Species::ALL.iter()).take(3) {
            for (c, p) in column.iter_mut().zip(paths) {
                *c = p.log_series(sp)[idx].exp();
            }
            *slot = stats::mean(&column);
        }
        for (k, &sp) in Species::ALL.iter().enumerate() {
            for (c, p) in column.iter_mut().zip(paths) {
                *c = p.log_series(sp)[idx];
            }
            row[3 + k] = stats::mean(&column);
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            t, row[0], row[1], row[2], row[3], row[4], row[5]
        )?;
    }
    w.flush()
}

/// Per-path trajectory export: `time,x1,x2,y,u1,u2,v`.
pub fn write_trajectory_csv(
    path: &Path,
    stamp: &ReproStamp,
    traj: &Trajectory,
) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", stamp.comment_line())?;
    writeln!(w, "time,x1,x2,y,u1,u2,v")?;
    let (u1, u2, v) = (
        traj.log_series(Species::Prey1),
        traj.log_series(Species::Prey2),
        traj.log_series(Species::Predator),
    );
    for (i, &t) in traj.times().iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            t,
            u1[i].exp(),
            u2[i].exp(),
            v[i].exp(),
            u1[i],
            u2[i],
            v[i]
        )?;
    }
    w.flush()
}

/// One-dimensional comparison-path export: `time,value,log_value`.
pub fn write_scalar_trajectory_csv(
    path: &Path,
    stamp: &ReproStamp,
    traj: &ScalarTrajectory,
) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", stamp.comment_line())?;
    writeln!(w, "time,value,log_value")?;
    for (&t, &u) in traj.times().iter().zip(traj.log_values()) {
        writeln!(w, "{},{},{}", t, u.exp(), u)?;
    }
    w.flush()
}

/// Jump events: `time,species,mark,size`, one row per species per event.
pub fn write_jump_events_csv(
    path: &Path,
    stamp: &ReproStamp,
    events: &[JumpEvent],
    mark_sizes: &[[f64; 3]],
) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", stamp.comment_line())?;
    writeln!(w, "time,species,mark,size")?;
    for event in events {
        for sp in Species::ALL {
            writeln!(
                w,
                "{},{},{},{}",
                event.time,
                sp.number(),
                event.mark,
                mark_sizes[event.mark][sp.index()]
            )?;
        }
    }
    w.flush()
}

/// Verification report, text form (`report.txt`) and CSV form (`report.csv`).
pub fn write_report(
    dir: &Path,
    stamp: &ReproStamp,
    report: &VerificationReport,
) -> io::Result<()> {
    let mut text = create(&dir.join("report.txt"))?;
    writeln!(text, "{}", stamp.comment_line())?;
    write!(text, "{}", report.to_text())?;
    text.flush()?;
    let mut csv = create(&dir.join("report.csv"))?;
    writeln!(csv, "{}", stamp.comment_line())?;
    write!(csv, "{}", report.to_csv())?;
    csv.flush()
}
