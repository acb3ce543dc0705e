//! Experiment description read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::custom::CustomProblem;
use super::ExperimentError;
use crate::krylov::{PreconditionerKind, SolveConfig};
use crate::problems::ExampleId;
use crate::solver::{PathChoice, SolverOptions, Storage, MIN_INTERVALS};

/// Which time-stepping scheme(s) a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    #[default]
    Direct,
    Fast,
    /// Both schemes on every grid, with a side-by-side agreement table.
    Compare,
}

/// How errors are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// Exact solution when the problem has one, two-grid otherwise.
    #[default]
    Auto,
    /// Max over all time levels against the exact solution.
    Exact,
    /// Final-level difference to the solution on the next finer grid.
    TwoGrid,
}

/// Rounding of `factor · M^((2-γ)/2)` in the coupled sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    #[default]
    Ceil,
    Floor,
}

/// The refinement axis of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// Fixed `n` spatial intervals, varying time steps.
    Temporal { n: usize, m: Vec<usize> },
    /// Fixed `m` time steps, varying spatial intervals.
    Spatial { m: usize, n: Vec<usize> },
    /// `N = round(factor · M^((2-γ)/2))` tied to each `M`.
    Coupled {
        m: Vec<usize>,
        #[serde(default)]
        rounding: Rounding,
        #[serde(default = "default_factor")]
        factor: f64,
    },
}

fn default_factor() -> f64 {
    2.0
}

impl Sweep {
    /// Grid sizes `(N, M)` of the sweep for a given γ.
    pub fn points(&self, gamma: f64) -> Vec<(usize, usize)> {
        match self {
            Sweep::Temporal { n, m } => m.iter().map(|&m| (*n, m)).collect(),
            Sweep::Spatial { m, n } => n.iter().map(|&n| (n, *m)).collect(),
            Sweep::Coupled { m, rounding, factor } => m
                .iter()
                .map(|&m| (coupled_n(m, gamma, *factor, *rounding), m))
                .collect(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Sweep::Temporal { .. } => "temporal",
            Sweep::Spatial { .. } => "spatial",
            Sweep::Coupled { .. } => "coupled",
        }
    }

    /// Refinement ratio between consecutive points, used for rates.
    pub fn ratio(&self, prev: (usize, usize), cur: (usize, usize)) -> f64 {
        match self {
            Sweep::Spatial { .. } => cur.0 as f64 / prev.0 as f64,
            _ => cur.1 as f64 / prev.1 as f64,
        }
    }
}

/// Spatial intervals tied to `m` time steps so that `h² ~ τ^(2-γ)`.
pub fn coupled_n(m: usize, gamma: f64, factor: f64, rounding: Rounding) -> usize {
    let raw = factor * (m as f64).powf((2.0 - gamma) / 2.0);
    // Guard against values like 27.999999999 from powf.
    let snapped = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw };
    match rounding {
        Rounding::Ceil => snapped.ceil() as usize,
        Rounding::Floor => snapped.floor() as usize,
    }
}

/// Cartesian grid of model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    #[serde(default = "default_b")]
    pub b: Vec<f64>,
    pub p: Vec<f64>,
}

fn default_b() -> Vec<f64> {
    vec![1.0]
}

impl ParamGrid {
    /// All `(γ, α, b, p)` combinations, γ slowest.
    pub fn combinations(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut out = Vec::new();
        for &g in &self.gamma {
            for &a in &self.alpha {
                for &b in &self.b {
                    for &p in &self.p {
                        out.push((g, a, b, p));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub rtol: f64,
    pub max_iter: usize,
    pub accept_rtol: f64,
    pub preconditioner: PreconditionerKind,
    pub path: PathChoice,
}

impl Default for SolverSection {
    fn default() -> Self {
        let cfg = SolveConfig::default();
        SolverSection {
            rtol: cfg.rtol,
            max_iter: cfg.max_iter,
            accept_rtol: cfg.accept_rtol,
            preconditioner: cfg.preconditioner,
            path: PathChoice::Auto,
        }
    }
}

impl SolverSection {
    pub fn options(&self, storage: Storage) -> SolverOptions {
        SolverOptions {
            solve: SolveConfig {
                rtol: self.rtol,
                max_iter: self.max_iter,
                preconditioner: self.preconditioner,
                accept_rtol: self.accept_rtol.max(self.rtol),
            },
            path: self.path,
            storage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for all files; the CLI `--out` flag overrides it.
    pub dir: Option<PathBuf>,
    /// Stem shared by the output files.
    pub stem: String,
    /// Also write log-log plot data and the `w_2(α)` curve.
    pub plots: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            stem: "results".into(),
            plots: true,
        }
    }
}

/// A full experiment: problem family, parameter grid, sweep and solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: ExampleId,
    #[serde(default)]
    pub scheme: SchemeChoice,
    #[serde(default)]
    pub errors: ErrorMode,
    pub params: ParamGrid,
    pub sweep: Sweep,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Tolerance of the sum-of-exponentials kernel in the fast scheme.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Constant diffusion of example 2.
    #[serde(default = "default_xi")]
    pub xi: f64,
    /// Timed repetitions per run; the reported wall time is their mean.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Largest accepted `max |u_fast - u_direct|` in compare mode.
    #[serde(default = "default_agreement")]
    pub agreement: f64,
    /// Problem data when `example = "custom"`.
    pub custom: Option<CustomProblem>,
}

fn default_epsilon() -> f64 {
    1e-9
}
fn default_xi() -> f64 {
    5.0
}
fn default_repetitions() -> usize {
    3
}
fn default_agreement() -> f64 {
    1e-5
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ExperimentError::Config(msg) => ExperimentError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Error mode after resolving `auto` against the problem family.
    pub fn resolved_errors(&self) -> ErrorMode {
        match self.errors {
            ErrorMode::Auto => {
                let exact = match self.example {
                    ExampleId::Example2 => false,
                    ExampleId::Custom => self.custom.as_ref().is_some_and(|c| c.exact.is_some()),
                    _ => true,
                };
                if exact {
                    ErrorMode::Exact
                } else {
                    ErrorMode::TwoGrid
                }
            }
            mode => mode,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |field: &str, why: &str| Err(ExperimentError::Config(format!("`{field}`: {why}")));
        let p = &self.params;
        for (name, v) in [("params.gamma", &p.gamma), ("params.alpha", &p.alpha), ("params.b", &p.b), ("params.p", &p.p)] {
            if v.is_empty() {
                return bad(name, "empty parameter list");
            }
        }
        if let Some(g) = p.gamma.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
            return bad("params.gamma", &format!("{g} outside (0, 1)"));
        }
        if let Some(a) = p.alpha.iter().find(|a| !(**a > 1.0 && **a <= 2.0)) {
            return bad("params.alpha", &format!("{a} outside (1, 2]"));
        }
        if let Some(b) = p.b.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return bad("params.b", &format!("{b} must be non-negative"));
        }
        if let Some(x) = p.p.iter().find(|x| !(**x >= 0.0 && **x <= 1.0)) {
            return bad("params.p", &format!("{x} outside [0, 1]"));
        }
        let (field, list): (&str, Vec<usize>) = match &self.sweep {
            Sweep::Temporal { n, m } => {
                if *n < MIN_INTERVALS {
                    return bad("sweep.n", &format!("need at least {MIN_INTERVALS} intervals"));
                }
                ("sweep.m", m.clone())
            }
            Sweep::Spatial { m, n } => {
                if *m == 0 {
                    return bad("sweep.m", "need at least one time step");
                }
                ("sweep.n", n.clone())
            }
            Sweep::Coupled { m, factor, .. } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return bad("sweep.factor", "must be positive");
                }
                ("sweep.m", m.clone())
            }
        };
        if list.is_empty() {
            return bad(field, "empty sweep");
        }
        if list.windows(2).any(|w| w[1] <= w[0]) {
            return bad(field, "sweep values must be strictly increasing");
        }
        if list.contains(&0) {
            return bad(field, "sweep values must be positive");
        }
        for &(g, ..) in &p.combinations() {
            if let Some(&(n, _)) = self.sweep.points(g).iter().find(|(n, _)| *n < MIN_INTERVALS) {
                return bad("sweep", &format!("N = {n} below the minimum of {MIN_INTERVALS}"));
            }
        }
        let s = &self.solver;
        if !(s.rtol > 0.0) {
            return bad("solver.rtol", "must be positive");
        }
        if s.max_iter == 0 {
            return bad("solver.max_iter", "need at least one iteration");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", "must lie in (0, 1)");
        }
        if !(self.xi > 0.0 && self.xi.is_finite()) {
            return bad("xi", "must be positive");
        }
        if self.repetitions == 0 {
            return bad("repetitions", "need at least one run");
        }
        if !(self.agreement > 0.0) {
            return bad("agreement", "must be positive");
        }
        if self.scheme != SchemeChoice::Direct {
            if let Some(b) = p.b.iter().find(|b| **b < 0.0) {
                return bad("params.b", &format!("fast scheme needs b >= 0, got {b}"));
            }
        }
        match (self.example, &self.custom) {
            (ExampleId::Custom, None) => return bad("custom", "required when example = \"custom\""),
            (ExampleId::Custom, Some(c)) => c.validate()?,
            (_, Some(_)) => return bad("custom", "only allowed when example = \"custom\""),
            _ => {}
        }
        if matches!(self.example, ExampleId::Example1 | ExampleId::ExampleA1)
            && p.b.contains(&0.0)
        {
            return bad("params.b", "examples 1 and A1 need b > 0");
        }
        match self.resolved_errors() {
            ErrorMode::Exact => {
                let has_exact = match self.example {
                    ExampleId::Example2 => false,
                    ExampleId::Custom => self.custom.as_ref().is_some_and(|c| c.exact.is_some()),
                    _ => true,
                };
                if !has_exact {
                    return bad("errors", "exact errors need a problem with an exact solution");
                }
            }
            ErrorMode::TwoGrid => {
                if matches!(self.sweep, Sweep::Coupled { .. }) {
                    return bad("errors", "two-grid errors need a temporal or spatial sweep");
                }
            }
            ErrorMode::Auto => unreachable!("resolved above"),
        }
        Ok(())
    }
}
