//! Executes the runs of an experiment and collects table rows.

use std::collections::HashMap;

use super::config::{ErrorMode, ExperimentConfig, SchemeChoice, Sweep};
use super::ExperimentError;
use crate::problems::{
    compute_errors_two_grid, convergence_rate, example1, example2, example_a1, ErrorAccumulator,
    ErrorReport, ExampleId, ManufacturedProblem,
};
use crate::solver::{
    solve_with_observer, Discretization, RunReport, Scheme, SolutionField, SolverPath, Storage,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunnerOptions {
    /// Record wall-clock times; without them reruns give identical tables.
    pub timings: bool,
    /// Overrides the configured repetition count.
    pub repetitions: Option<usize>,
}

impl Default for RunnerOptions {
    fn default() -> Self {
        RunnerOptions {
            timings: true,
            repetitions: None,
        }
    }
}

/// One run of the sweep.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub example: ExampleId,
    pub gamma: f64,
    pub alpha: f64,
    pub b: f64,
    pub p: f64,
    pub scheme: Scheme,
    /// `gsf`, `dense`, or the Krylov preconditioner label.
    pub precond: String,
    pub n: usize,
    pub m: usize,
    /// Step sizes of the run.
    pub h: f64,
    pub tau: f64,
    /// The error pair used for rates: max over levels against the exact
    /// solution, or the final-level two-grid difference.
    pub err_inf: f64,
    pub err_l2: f64,
    pub rate_inf: Option<f64>,
    pub rate_l2: Option<f64>,
    pub errors: ErrorReport,
    pub mode: ErrorMode,
    pub iters_avg: f64,
    pub wall_s: Option<f64>,
    pub report: RunReport,
}

impl RunRecord {
    pub fn mem_bytes(&self) -> usize {
        self.report.memory_bytes()
    }

    /// Short identifier used in diagnostics.
    pub fn label(&self) -> String {
        row_label(self.example, (self.gamma, self.alpha, self.b, self.p), self.scheme, self.n, self.m)
    }
}

fn row_label(ex: ExampleId, (g, a, b, p): (f64, f64, f64, f64), s: Scheme, n: usize, m: usize) -> String {
    format!(
        "example={} gamma={g} alpha={a} b={b} p={p} scheme={} N={n} M={m}",
        ex.label(),
        s.label()
    )
}

/// Direct and fast results on the same grid.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub example: ExampleId,
    pub gamma: f64,
    pub alpha: f64,
    pub b: f64,
    pub p: f64,
    pub n: usize,
    pub m: usize,
    pub err_inf_direct: f64,
    pub err_inf_fast: f64,
    /// `max_j max_i |u_fast - u_direct|` over all levels.
    pub max_difference: f64,
    pub wall_direct: Option<f64>,
    pub wall_fast: Option<f64>,
    pub n_exp: Option<usize>,
    pub agree: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub sweep: &'static str,
    pub mode: ErrorMode,
    pub rows: Vec<RunRecord>,
    pub comparisons: Vec<ComparisonRow>,
}

impl ExperimentReport {
    /// Comparison rows whose schemes differ by more than the bound.
    pub fn disagreements(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.comparisons.iter().filter(|c| !c.agree)
    }
}

fn build_problem(cfg: &ExperimentConfig, (g, a, b, p): (f64, f64, f64, f64)) -> Result<ManufacturedProblem, ExperimentError> {
    let cfg_err = |e: crate::Error| ExperimentError::Config(e.to_string());
    match cfg.example {
        ExampleId::Example1 => example1(g, a, b, p).map_err(cfg_err),
        ExampleId::ExampleA1 => example_a1(g, a, b, p).map_err(cfg_err),
        ExampleId::Example2 => example2(g, a, b, p, cfg.xi).map_err(cfg_err),
        ExampleId::Custom => cfg
            .custom
            .as_ref()
            .ok_or_else(|| ExperimentError::Config("`custom` section missing".into()))?
            .build(g, a, b, p),
    }
}

struct Solved {
    field: SolutionField,
    errors: Option<ErrorReport>,
    report: RunReport,
    wall: f64,
}

/// Runs one grid `repetitions` times; errors against the exact solution
/// are streamed from the first run.
fn solve_point(
    cfg: &ExperimentConfig,
    pr: &ManufacturedProblem,
    scheme: Scheme,
    (n, m): (usize, usize),
    storage: Storage,
    repetitions: usize,
) -> Result<Solved, ExperimentError> {
    let params = (pr.gamma, pr.alpha, pr.b, pr.p);
    let fail = |source| ExperimentError::Solver {
        row: row_label(pr.id, params, scheme, n, m),
        source,
    };
    let disc = Discretization::new(&pr.spec, n, m, scheme, cfg.epsilon).map_err(fail)?;
    let options = cfg.solver.options(storage);
    let exact = pr.exact.clone();
    let mut acc = ErrorAccumulator::new();
    let (field, report) = solve_with_observer(&pr.spec, &disc, &options, |j, level| {
        if let Some(u) = &exact {
            let t = disc.t(j);
            acc.add(j, level.iter().enumerate().map(|(i, v)| v - u(disc.x(i), t)), disc.h);
        }
    })
    .map_err(fail)?;
    let mut wall = report.wall_seconds;
    for _ in 1..repetitions {
        let (_, again) =
            solve_with_observer(&pr.spec, &disc, &cfg.solver.options(Storage::FinalOnly), |_, _| {})
                .map_err(fail)?;
        wall += again.wall_seconds;
    }
    Ok(Solved {
        field,
        errors: exact.is_some().then(|| acc.finish()),
        report,
        wall: wall / repetitions as f64,
    })
}

fn precond_label(r: &RunReport) -> String {
    match r.path {
        SolverPath::Gsf => "gsf".into(),
        SolverPath::Dense => "dense".into(),
        SolverPath::Krylov => r.preconditioner.label(),
    }
}

fn refine(sweep: &Sweep, (n, m): (usize, usize)) -> (usize, usize) {
    match sweep {
        Sweep::Spatial { .. } => (2 * n, m),
        _ => (n, 2 * m),
    }
}

/// Maximum pointwise difference over the levels both fields store.
fn field_difference(a: &SolutionField, b: &SolutionField) -> f64 {
    a.levels
        .iter()
        .zip(&a.level_index)
        .filter_map(|(la, &j)| b.level(j).map(|lb| (la, lb)))
        .flat_map(|(la, lb)| la.iter().zip(lb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Runs every parameter combination and sweep point of `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunnerOptions) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let mode = cfg.resolved_errors();
    let repetitions = opts.repetitions.unwrap_or(cfg.repetitions).max(1);
    let schemes: &[Scheme] = match cfg.scheme {
        SchemeChoice::Direct => &[Scheme::Direct],
        SchemeChoice::Fast => &[Scheme::Fast],
        SchemeChoice::Compare => &[Scheme::Direct, Scheme::Fast],
    };
    let compare = cfg.scheme == SchemeChoice::Compare;
    // Full fields are needed for two-grid differences and scheme comparison.
    let storage = if mode == ErrorMode::TwoGrid || compare {
        Storage::Full
    } else {
        Storage::FinalOnly
    };
    let mut rows = Vec::new();
    let mut comparisons = Vec::new();
    for params in cfg.params.combinations() {
        let pr = build_problem(cfg, params)?;
        let points = cfg.sweep.points(params.0);
        let mut fields: Vec<Vec<SolutionField>> = Vec::new();
        for &scheme in schemes {
            let mut cache: HashMap<(usize, usize), SolutionField> = HashMap::new();
            let mut kept = Vec::new();
            for (k, &pt) in points.iter().enumerate() {
                let solved = solve_point(cfg, &pr, scheme, pt, storage, repetitions)?;
                let errors = match mode {
                    ErrorMode::TwoGrid => {
                        let fine_pt = refine(&cfg.sweep, pt);
                        let fine = match cache.remove(&fine_pt) {
                            Some(f) => f,
                            None => solve_point(cfg, &pr, scheme, fine_pt, Storage::Full, 1)?.field,
                        };
                        let e = compute_errors_two_grid(&solved.field, &fine).map_err(|source| {
                            ExperimentError::Solver {
                                row: row_label(pr.id, params, scheme, pt.0, pt.1),
                                source,
                            }
                        })?;
                        // The next point reuses this field as its coarse run.
                        if points.get(k + 1) == Some(&fine_pt) {
                            cache.insert(fine_pt, fine);
                        }
                        e
                    }
                    _ => solved.errors.expect("exact solution streamed"),
                };
                let (err_inf, err_l2) = match mode {
                    ErrorMode::TwoGrid => (errors.final_inf, errors.final_l2),
                    _ => (errors.error_inf, errors.error_l2),
                };
                let (rate_inf, rate_l2) = match (k, rows.last()) {
                    (k, Some(prev)) if k > 0 => {
                        let prev: &RunRecord = prev;
                        let ratio = cfg.sweep.ratio((prev.n, prev.m), pt);
                        (
                            convergence_rate(prev.err_inf, err_inf, ratio).ok(),
                            convergence_rate(prev.err_l2, err_l2, ratio).ok(),
                        )
                    }
                    _ => (None, None),
                };
                rows.push(RunRecord {
                    example: pr.id,
                    gamma: params.0,
                    alpha: params.1,
                    b: params.2,
                    p: params.3,
                    scheme,
                    precond: precond_label(&solved.report),
                    n: pt.0,
                    m: pt.1,
                    h: solved.field.h,
                    tau: solved.field.tau,
                    err_inf,
                    err_l2,
                    rate_inf,
                    rate_l2,
                    errors,
                    mode,
                    iters_avg: solved.report.average_iterations(),
                    wall_s: opts.timings.then_some(solved.wall),
                    report: solved.report,
                });
                if compare {
                    kept.push(solved.field);
                }
            }
            fields.push(kept);
        }
        if compare {
            let per = points.len();
            let base = rows.len() - 2 * per;
            for (k, &(n, m)) in points.iter().enumerate() {
                let (d, f) = (&rows[base + k], &rows[base + per + k]);
                let diff = field_difference(&fields[0][k], &fields[1][k]);
                comparisons.push(ComparisonRow {
                    example: pr.id,
                    gamma: params.0,
                    alpha: params.1,
                    b: params.2,
                    p: params.3,
                    n,
                    m,
                    err_inf_direct: d.err_inf,
                    err_inf_fast: f.err_inf,
                    max_difference: diff,
                    wall_direct: d.wall_s,
                    wall_fast: f.wall_s,
                    n_exp: f.report.n_exp,
                    agree: diff <= cfg.agreement,
                });
            }
        }
    }
    Ok(ExperimentReport {
        sweep: cfg.sweep.label(),
        mode,
        rows,
        comparisons,
    })
}

/// Runs `cfg` with both schemes side by side.
pub fn compare_schemes(cfg: &ExperimentConfig, opts: &RunnerOptions) -> Result<ExperimentReport, ExperimentError> {
    let mut cfg = cfg.clone();
    cfg.scheme = SchemeChoice::Compare;
    run_experiment(&cfg, opts)
}
