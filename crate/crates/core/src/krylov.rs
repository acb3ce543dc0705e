//! Right-preconditioned BiCGSTAB over abstract operator and preconditioner
//! interfaces.
//!
//! Iterations are counted in half steps: leaving after the first half of
//! a BiCGSTAB sweep counts as 0.5.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A square linear map `y = A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Approximate inverse `z ≈ P⁻¹ r`.
pub trait Preconditioner {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]);
}

/// Adapts a closure to [`LinearOperator`].
pub struct FnOperator<F> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// The identity preconditioner.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPreconditioner;

impl Preconditioner for NoPreconditioner {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

impl<F: Fn(&[f64], &mut [f64])> Preconditioner for FnOperator<F> {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        (self.f)(r, z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "bandwidth")]
pub enum PreconditionerKind {
    None,
    Banded(usize),
    #[default]
    SkewCirculant,
    ExactGsf,
}

impl PreconditionerKind {
    pub fn label(&self) -> String {
        match self {
            PreconditionerKind::None => "none".into(),
            PreconditionerKind::Banded(l) => format!("banded{l}"),
            PreconditionerKind::SkewCirculant => "skew_circulant".into(),
            PreconditionerKind::ExactGsf => "gsf".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub rtol: f64,
    pub max_iter: usize,
    pub preconditioner: PreconditionerKind,
    /// A solve that stagnates on its rounding floor is still accepted when
    /// its recomputed relative residual is at most this bound.
    pub accept_rtol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rtol: 1e-12,
            max_iter: 2000,
            preconditioner: PreconditionerKind::SkewCirculant,
            accept_rtol: 1e-9,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) {
            return Err(invalid("rtol", self.rtol, "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", 0.0, "need at least one iteration"));
        }
        if !(self.accept_rtol >= self.rtol) {
            return Err(invalid("accept_rtol", self.accept_rtol, "must be at least rtol"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Breakdown {
    /// `(r̂, r)` vanished.
    Rho,
    /// `(r̂, A p̂)` vanished.
    Alpha,
    /// The stabilization parameter ω vanished.
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Converged,
    MaxIterations,
    /// The recurred residual met the tolerance but the recomputed one
    /// stayed above it after repeated residual replacement; the iterate
    /// sits on the rounding floor of the operator.
    Stagnated,
    Breakdown(Breakdown),
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub iterations: f64,
    pub converged: bool,
    /// `‖b - A x‖ / ‖b - A x₀‖`, recomputed explicitly.
    pub final_relative_residual: f64,
    pub outcome: SolveOutcome,
}

const BREAKDOWN: f64 = 1e-30;
/// Residual replacements allowed when the recurred residual drifts from
/// the true one.
const MAX_REPLACEMENTS: usize = 3;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual(a: &dyn LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) {
    a.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
}

/// Solves `A x = b` by BiCGSTAB applied to `A P⁻¹ y = b`, `x = P⁻¹ y`.
///
/// Stops when `‖r‖ / ‖r₀‖ ≤ rtol`, where `r₀ = b - A x₀`. On apparent
/// convergence the residual is recomputed from scratch; if it misses the
/// tolerance the iteration restarts from the true residual.
pub fn bicgstab(
    a: &dyn LinearOperator,
    pinv: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut x = match x0 {
        Some(v) if v.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            })
        }
        Some(v) => v.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    residual(a, b, &x, &mut r);
    let norm0 = norm(&r);
    if norm0 == 0.0 {
        return Ok(SolveResult {
            x,
            iterations: 0.0,
            converged: true,
            final_relative_residual: 0.0,
            outcome: SolveOutcome::Converged,
        });
    }

    let mut r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut p_hat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut s_hat = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut true_r = vec![0.0; n];
    let (mut rho_old, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut fresh = true;
    let mut replacements = 0;
    let mut best = (f64::INFINITY, x.clone());

    // Recomputes the residual; returns the relative value and whether it
    // meets the tolerance. A miss resets the Krylov recurrence.
    macro_rules! confirm {
        ($x:expr) => {{
            residual(a, b, $x, &mut true_r);
            let rel = norm(&true_r) / norm0;
            if rel < best.0 {
                best = (rel, $x.to_vec());
            }
            (rel, rel <= cfg.rtol)
        }};
    }

    // Leaves with the best explicitly checked iterate.
    macro_rules! bail {
        ($iters:expr, $outcome:expr) => {{
            let _ = confirm!(&x);
            return Ok(finish(best, $iters, $outcome));
        }};
    }

    for it in 1..=cfg.max_iter {
        let rho = dot(&r_hat, &r);
        if rho.abs() < BREAKDOWN * norm(&r_hat) * norm(&r) || rho == 0.0 {
            bail!(it as f64 - 1.0, SolveOutcome::Breakdown(Breakdown::Rho));
        }
        if fresh {
            p.copy_from_slice(&r);
            fresh = false;
        } else {
            let beta = (rho / rho_old) * (alpha / omega);
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
        }
        pinv.apply_inverse(&p, &mut p_hat);
        a.apply(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() < BREAKDOWN * norm(&r_hat) * norm(&v) || rv == 0.0 {
            bail!(it as f64 - 1.0, SolveOutcome::Breakdown(Breakdown::Alpha));
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
            x[i] += alpha * p_hat[i];
        }
        if norm(&s) / norm0 <= cfg.rtol {
            let (rel, ok) = confirm!(&x);
            if ok {
                return Ok(SolveResult {
                    x,
                    iterations: it as f64 - 0.5,
                    converged: true,
                    final_relative_residual: rel,
                    outcome: SolveOutcome::Converged,
                });
            }
            if replacements == MAX_REPLACEMENTS {
                bail!(it as f64 - 0.5, SolveOutcome::Stagnated);
            }
            replacements += 1;
            r.copy_from_slice(&true_r);
            r_hat.copy_from_slice(&r);
            fresh = true;
            rho_old = 1.0;
            continue;
        }
        pinv.apply_inverse(&s, &mut s_hat);
        a.apply(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        if omega.abs() < BREAKDOWN {
            bail!(it as f64 - 0.5, SolveOutcome::Breakdown(Breakdown::Omega));
        }
        for i in 0..n {
            x[i] += omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) / norm0 <= cfg.rtol {
            let (rel, ok) = confirm!(&x);
            if ok {
                return Ok(SolveResult {
                    x,
                    iterations: it as f64,
                    converged: true,
                    final_relative_residual: rel,
                    outcome: SolveOutcome::Converged,
                });
            }
            if replacements == MAX_REPLACEMENTS {
                bail!(it as f64, SolveOutcome::Stagnated);
            }
            replacements += 1;
            r.copy_from_slice(&true_r);
            r_hat.copy_from_slice(&r);
            fresh = true;
            rho_old = 1.0;
            continue;
        }
        rho_old = rho;
    }
    bail!(cfg.max_iter as f64, SolveOutcome::MaxIterations)
}

fn finish(best: (f64, Vec<f64>), iterations: f64, outcome: SolveOutcome) -> SolveResult {
    SolveResult {
        x: best.1,
        iterations,
        converged: false,
        final_relative_residual: best.0,
        outcome,
    }
}
