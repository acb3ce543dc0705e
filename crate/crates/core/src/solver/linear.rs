//! Per-step linear solves: one shared Toeplitz template, preconditioners
//! cached while the diffusion diagonal is unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{
    bicgstab, NoPreconditioner, Preconditioner, PreconditionerKind, SolveConfig, SolveOutcome,
};
use crate::toeplitz::{BandedFactor, DenseFactor, GsfInverse, SkewCirculantFactor, SystemOperator};

/// Largest system handed to the dense debugging path.
pub const DENSE_LIMIT: usize = 2048;

/// How the solver may treat the per-step systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    /// GSF when ξ is constant, preconditioned Krylov otherwise.
    #[default]
    Auto,
    Krylov,
    Dense,
    Gsf,
}

/// The path actually taken by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    /// One Gohberg–Semencul inverse reused for every step.
    Gsf,
    Krylov,
    Dense,
}

impl SolverPath {
    pub fn label(&self) -> &'static str {
        match self {
            SolverPath::Gsf => "gsf",
            SolverPath::Krylov => "krylov",
            SolverPath::Dense => "dense",
        }
    }
}

#[allow(clippy::large_enum_variant)]
enum Pre {
    None,
    Skew(SkewCirculantFactor),
    Banded(BandedFactor),
    Gsf(GsfInverse),
}

impl Pre {
    fn as_dyn(&self) -> &dyn Preconditioner {
        match self {
            Pre::None => &NoPreconditioner,
            Pre::Skew(s) => s,
            Pre::Banded(b) => b,
            Pre::Gsf(g) => g,
        }
    }

    fn stored_scalars(&self) -> usize {
        match self {
            Pre::None => 0,
            Pre::Skew(s) => s.stored_scalars(),
            Pre::Banded(b) => b.stored_scalars(),
            Pre::Gsf(g) => g.stored_scalars(),
        }
    }
}

pub(crate) struct LinearBackend {
    pub path: SolverPath,
    pub cfg: SolveConfig,
    template: SystemOperator,
    gsf: Option<GsfInverse>,
    dense: Option<(Vec<f64>, DenseFactor)>,
    pre: Option<(Vec<f64>, Pre)>,
    pub setup_iterations: f64,
    pub preconditioner_builds: usize,
    /// Steps accepted after stagnating between `rtol` and `accept_rtol`.
    pub stagnated_steps: usize,
    peak_scalars: usize,
}

impl LinearBackend {
    pub fn new(
        template: SystemOperator,
        path: SolverPath,
        cfg: SolveConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let mut backend = LinearBackend {
            path,
            cfg,
            gsf: None,
            dense: None,
            pre: None,
            setup_iterations: 0.0,
            preconditioner_builds: 0,
            stagnated_steps: 0,
            peak_scalars: template.stored_scalars(),
            template,
        };
        if path == SolverPath::Gsf {
            let g = GsfInverse::build(&backend.template)?;
            backend.setup_iterations = g.setup_iterations;
            backend.peak_scalars += g.stored_scalars();
            backend.gsf = Some(g);
        }
        if path == SolverPath::Dense && backend.template.dim() > DENSE_LIMIT {
            return Err(Error::GridMismatch(format!(
                "dense path limited to {DENSE_LIMIT} unknowns"
            )));
        }
        Ok(backend)
    }

    pub fn template(&self) -> &SystemOperator {
        &self.template
    }

    pub fn stored_scalars(&self) -> usize {
        self.peak_scalars
    }

    fn build_pre(&mut self, op: &SystemOperator) -> Result<Pre> {
        self.preconditioner_builds += 1;
        Ok(match self.cfg.preconditioner {
            PreconditionerKind::None => Pre::None,
            PreconditionerKind::SkewCirculant => Pre::Skew(SkewCirculantFactor::build(op)?),
            PreconditionerKind::Banded(l) => {
                let l = l.clamp(1, op.dim().saturating_sub(1).max(1));
                Pre::Banded(BandedFactor::build(op, l)?)
            }
            PreconditionerKind::ExactGsf => {
                let mean = op.mean_xi();
                let mut uniform = op.with_step(op.c0, vec![mean; op.dim()])?;
                uniform.time_independent = true;
                let g = GsfInverse::build(&uniform)?;
                self.setup_iterations += g.setup_iterations;
                Pre::Gsf(g)
            }
        })
    }

    /// Solves `M x = rhs` for the step whose diffusion diagonal is `diag`.
    /// Returns the solution and the Krylov iterations spent.
    pub fn solve(&mut self, level: usize, diag: Vec<f64>, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
        let fail = |reason: String| Error::LinearSolveFailed { level, reason };
        match self.path {
            SolverPath::Gsf => {
                let g = self.gsf.as_ref().expect("built with the backend");
                Ok((g.apply(rhs)?, 0.0))
            }
            SolverPath::Dense => {
                let stale = self.dense.as_ref().is_none_or(|(d, _)| *d != diag);
                if stale {
                    let op = self.template.with_step(self.template.c0, diag.clone())?;
                    let f = DenseFactor::build(&op).map_err(|e| fail(e.to_string()))?;
                    self.dense = Some((diag, f));
                }
                let (_, f) = self.dense.as_ref().expect("set above");
                Ok((f.solve(rhs).map_err(|e| fail(e.to_string()))?, 0.0))
            }
            SolverPath::Krylov => {
                let op = self.template.with_step(self.template.c0, diag)?;
                let stale = self.pre.as_ref().is_none_or(|(d, _)| *d != op.diag_xi);
                if stale {
                    let pre = self.build_pre(&op).map_err(|e| fail(e.to_string()))?;
                    self.peak_scalars = self
                        .peak_scalars
                        .max(self.template.stored_scalars() + pre.stored_scalars());
                    self.pre = Some((op.diag_xi.clone(), pre));
                }
                let (_, pre) = self.pre.as_ref().expect("set above");
                let res = bicgstab(&op, pre.as_dyn(), rhs, None, &self.cfg)?;
                let floor = res.outcome == SolveOutcome::Stagnated
                    && res.final_relative_residual <= self.cfg.accept_rtol;
                if floor {
                    self.stagnated_steps += 1;
                } else if !res.converged {
                    return Err(fail(format!(
                        "BiCGSTAB {:?} after {} iterations, relative residual {:e}",
                        res.outcome, res.iterations, res.final_relative_residual
                    )));
                }
                Ok((res.x, res.iterations))
            }
        }
    }
}
