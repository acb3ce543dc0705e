//! Delimited output tables and plot data.

use std::path::{Path, PathBuf};

use super::runner::{ComparisonRow, ExperimentReport, RunRecord};
use super::ExperimentError;
use crate::kernels::{w2_value_with, KappaForm};

/// Column order of the main results table.
pub const TABLE_HEADER: [&str; 16] = [
    "example", "gamma", "alpha", "b", "p", "scheme", "precond", "N", "M", "err_inf", "rate_inf",
    "err_l2", "rate_l2", "iters_avg", "wall_s", "mem_bytes",
];

/// Per-run diagnostics written next to the main table.
pub const DETAIL_HEADER: [&str; 20] = [
    "example", "gamma", "alpha", "b", "p", "scheme", "N", "M", "error_mode", "max_inf", "max_l2",
    "final_inf", "final_l2", "path", "setup_iters", "precond_builds", "stagnated_steps", "n_exp",
    "xi_constant", "diag_dominant",
];

pub const COMPARISON_HEADER: [&str; 14] = [
    "example", "gamma", "alpha", "b", "p", "N", "M", "err_inf_direct", "err_inf_fast",
    "max_difference", "wall_direct_s", "wall_fast_s", "n_exp", "agree",
];

/// Measured quantities: scientific notation, seven significant digits.
fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

/// Input parameters: shortest exact representation.
fn param(x: f64) -> String {
    format!("{x}")
}

fn io(path: &Path) -> impl Fn(csv::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path).map_err(io(path))?;
    w.write_record(header).map_err(io(path))?;
    for r in rows {
        w.write_record(&r).map_err(io(path))?;
    }
    w.flush()
        .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))
}

fn params(r: &RunRecord) -> Vec<String> {
    vec![r.example.label().into(), param(r.gamma), param(r.alpha), param(r.b), param(r.p)]
}

fn table_row(r: &RunRecord) -> Vec<String> {
    let mut v = params(r);
    v.extend([
        r.scheme.label().into(),
        r.precond.clone(),
        r.n.to_string(),
        r.m.to_string(),
        sci(r.err_inf),
        opt_sci(r.rate_inf),
        sci(r.err_l2),
        opt_sci(r.rate_l2),
        sci(r.iters_avg),
        opt_sci(r.wall_s),
        r.mem_bytes().to_string(),
    ]);
    v
}

fn detail_row(r: &RunRecord) -> Vec<String> {
    let rep = &r.report;
    let mut v = params(r);
    v.extend([
        r.scheme.label().into(),
        r.n.to_string(),
        r.m.to_string(),
        format!("{:?}", r.mode).to_lowercase(),
        sci(r.errors.error_inf),
        sci(r.errors.error_l2),
        sci(r.errors.final_inf),
        sci(r.errors.final_l2),
        rep.path.label().into(),
        sci(rep.setup_iterations),
        rep.preconditioner_builds.to_string(),
        rep.stagnated_steps.to_string(),
        rep.n_exp.map(|k| k.to_string()).unwrap_or_default(),
        rep.xi_constant.to_string(),
        rep.diagonally_dominant.to_string(),
    ]);
    v
}

fn comparison_row(c: &ComparisonRow) -> Vec<String> {
    vec![
        c.example.label().into(),
        param(c.gamma),
        param(c.alpha),
        param(c.b),
        param(c.p),
        c.n.to_string(),
        c.m.to_string(),
        sci(c.err_inf_direct),
        sci(c.err_inf_fast),
        sci(c.max_difference),
        opt_sci(c.wall_direct),
        opt_sci(c.wall_fast),
        c.n_exp.map(|k| k.to_string()).unwrap_or_default(),
        c.agree.to_string(),
    ]
}

/// Samples of `w_2(α)` for both κ₀ variants on `samples` points of (1, 2].
pub fn write_w2_curve(path: &Path, samples: usize) -> Result<(), ExperimentError> {
    let rows = (1..=samples.max(1)).map(|i| {
        let a = 1.0 + i as f64 / samples.max(1) as f64;
        let w = |f| w2_value_with(a, f).expect("alpha in range");
        vec![param(a), sci(w(KappaForm::QuasiCompact)), sci(w(KappaForm::Printed))]
    });
    write_csv(path, &["alpha", "w2", "w2_printed_kappa0"], rows)
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, Default)]
pub struct OutputFiles {
    pub table: PathBuf,
    pub details: PathBuf,
    pub comparison: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub w2_curve: Option<PathBuf>,
}

/// Writes `<stem>.csv`, `<stem>_details.csv` and, when present, the
/// comparison table and plot data into `dir`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path, stem: &str, plots: bool) -> Result<OutputFiles, ExperimentError> {
    std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
    let path = |suffix: &str| dir.join(format!("{stem}{suffix}.csv"));
    let mut files = OutputFiles {
        table: path(""),
        details: path("_details"),
        ..OutputFiles::default()
    };
    write_csv(&files.table, &TABLE_HEADER, report.rows.iter().map(table_row))?;
    write_csv(&files.details, &DETAIL_HEADER, report.rows.iter().map(detail_row))?;
    if !report.comparisons.is_empty() {
        let p = path("_comparison");
        write_csv(&p, &COMPARISON_HEADER, report.comparisons.iter().map(comparison_row))?;
        files.comparison = Some(p);
    }
    if plots {
        let p = path("_plot");
        let header = ["example", "gamma", "alpha", "b", "p", "scheme", "sweep", "h", "tau", "err_inf", "err_l2"];
        let rows = report.rows.iter().map(|r| {
            let mut v = params(r);
            v.extend([
                r.scheme.label().into(),
                report.sweep.into(),
                sci(r.h),
                sci(r.tau),
                sci(r.err_inf),
                sci(r.err_l2),
            ]);
            v
        });
        write_csv(&p, &header, rows)?;
        files.plot = Some(p);
        let w2 = dir.join("w2_curve.csv");
        write_w2_curve(&w2, 200)?;
        files.w2_curve = Some(w2);
    }
    Ok(files)
}
