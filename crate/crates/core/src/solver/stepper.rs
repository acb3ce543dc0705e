use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Discretization, Scheme, TimeCoefficients};
use super::linear::{LinearBackend, PathChoice, SolverPath};
use super::spec::ProblemSpec;
use crate::error::{Error, Result};
use crate::krylov::{PreconditionerKind, SolveConfig};
use crate::special::gamma;
use crate::toeplitz::SystemOperator;

/// Grid points handled per parallel task when assembling right-hand sides.
const CHUNK: usize = 512;
/// Relative tolerance for deciding that ξ is constant.
const CONSTANT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Storage {
    /// Keep every time level in the returned field.
    #[default]
    Full,
    /// Return only the final level; the fast scheme then holds just two
    /// levels plus its accumulators.
    FinalOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub solve: SolveConfig,
    pub path: PathChoice,
    pub storage: Storage,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            solve: SolveConfig::default(),
            path: PathChoice::Auto,
            storage: Storage::Full,
        }
    }
}

/// Grid values `u^j_i`, boundary points included.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub tau: f64,
    pub x_left: f64,
    /// Stored levels, each of length `n + 1`.
    pub levels: Vec<Vec<f64>>,
    /// Time index of each stored level.
    pub level_index: Vec<usize>,
}

impl SolutionField {
    pub fn level(&self, j: usize) -> Option<&[f64]> {
        self.level_index
            .iter()
            .position(|&k| k == j)
            .map(|p| self.levels[p].as_slice())
    }

    pub fn final_level(&self) -> &[f64] {
        self.levels.last().expect("at least one level")
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.h
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.tau
    }

    pub fn is_full(&self) -> bool {
        self.levels.len() == self.m + 1
    }
}

/// Statistics of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scheme: Scheme,
    pub path: SolverPath,
    pub preconditioner: PreconditionerKind,
    pub n: usize,
    pub m: usize,
    /// Krylov iterations per step (zero on direct paths).
    pub iterations: Vec<f64>,
    /// Iterations spent once on setup (the two GSF column solves).
    pub setup_iterations: f64,
    pub preconditioner_builds: usize,
    /// Steps whose Krylov solve stalled on rounding but met `accept_rtol`.
    pub stagnated_steps: usize,
    pub wall_seconds: f64,
    /// Peak number of f64 scalars held by the solver state.
    pub stored_scalars: usize,
    pub n_exp: Option<usize>,
    pub xi_constant: bool,
    pub xi_time_independent: bool,
    pub diagonally_dominant: bool,
}

impl RunReport {
    pub fn average_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<f64>() / self.iterations.len() as f64
        }
    }

    pub fn memory_bytes(&self) -> usize {
        self.stored_scalars * std::mem::size_of::<f64>()
    }
}

enum History {
    /// All levels for the full L1 sum.
    Direct {
        c: Vec<f64>,
        diffs: Vec<f64>,
        levels: Vec<Vec<f64>>,
    },
    /// Two levels plus the SOE accumulators, laid out `acc[i * n_exp + k]`.
    Fast {
        local: f64,
        decay: Vec<f64>,
        coef: Vec<f64>,
        weight: Vec<f64>,
        acc: Vec<f64>,
        prev: Vec<f64>,
        curr: Vec<f64>,
    },
}

/// Marches the scheme one level at a time.
pub struct TimeStepper<'a> {
    spec: &'a ProblemSpec,
    disc: &'a Discretization,
    backend: LinearBackend,
    history: History,
    j: usize,
    pub iterations: Vec<f64>,
    xi_constant: bool,
    xi_time_independent: bool,
}

fn diffusion_diagonal(spec: &ProblemSpec, disc: &Discretization, t: f64) -> Result<Vec<f64>> {
    let xi = &spec.xi;
    (1..disc.n)
        .map(|i| {
            let x = disc.x(i);
            let v = xi(x, t);
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidDiffusion { x, t, value: v })
            }
        })
        .collect()
}

/// Samples ξ over every grid level and reports (constant, time-independent).
fn classify_diffusion(spec: &ProblemSpec, disc: &Discretization) -> Result<(bool, bool)> {
    let first = diffusion_diagonal(spec, disc, disc.t(1))?;
    let close = |a: f64, b: f64| (a - b).abs() <= CONSTANT_TOL * a.abs().max(b.abs()).max(1.0);
    let uniform = first.iter().all(|&v| close(v, first[0]));
    let mut steady = true;
    for j in 2..=disc.m {
        let d = diffusion_diagonal(spec, disc, disc.t(j))?;
        if !d.iter().zip(&first).all(|(&a, &b)| close(a, b)) {
            steady = false;
            // keep validating positivity on the remaining levels
        }
    }
    Ok((uniform && steady, steady))
}

impl<'a> TimeStepper<'a> {
    pub fn new(spec: &'a ProblemSpec, disc: &'a Discretization, options: &SolverOptions) -> Result<Self> {
        spec.validate()?;
        let (xi_constant, xi_time_independent) = classify_diffusion(spec, disc)?;
        let path = match options.path {
            PathChoice::Auto if xi_constant => SolverPath::Gsf,
            PathChoice::Auto | PathChoice::Krylov => SolverPath::Krylov,
            PathChoice::Dense => SolverPath::Dense,
            PathChoice::Gsf => {
                if !xi_constant {
                    return Err(Error::GsfNotApplicable(
                        "diffusion coefficient is not constant on the grid",
                    ));
                }
                SolverPath::Gsf
            }
        };
        let diag = diffusion_diagonal(spec, disc, disc.t(1))?;
        let template = SystemOperator::new(
            disc.leading_coefficient(),
            disc.h,
            spec.p,
            diag,
            Arc::clone(&disc.weights),
            xi_time_independent,
        )?;
        let backend = LinearBackend::new(template, path, options.solve)?;
        let u0: Vec<f64> = (0..=disc.n).map(|i| (spec.initial)(disc.x(i))).collect();
        let history = match &disc.time {
            TimeCoefficients::Direct(l1) => {
                let mut levels = Vec::with_capacity(disc.m + 1);
                levels.push(u0);
                History::Direct {
                    c: l1.c.clone(),
                    diffs: l1.differences(),
                    levels,
                }
            }
            TimeCoefficients::Fast { b, local, soe } => {
                let (mut decay, mut coef, mut weight) = (Vec::new(), Vec::new(), Vec::new());
                if let Some(soe) = soe {
                    let g = gamma(1.0 - spec.gamma);
                    for (&s, &w) in soe.nodes.iter().zip(&soe.weights) {
                        let st = s + b;
                        let e = (-st * disc.tau).exp();
                        decay.push(e);
                        coef.push(-(-st * disc.tau).exp_m1() * e / (disc.tau * st));
                        weight.push(w / g);
                    }
                }
                let n_int = disc.interior();
                History::Fast {
                    local: *local,
                    acc: vec![0.0; decay.len() * n_int],
                    decay,
                    coef,
                    weight,
                    prev: u0.clone(),
                    curr: u0,
                }
            }
        };
        Ok(TimeStepper {
            spec,
            disc,
            backend,
            history,
            j: 0,
            iterations: Vec::with_capacity(disc.m),
            xi_constant,
            xi_time_independent,
        })
    }

    /// Index of the latest computed level.
    pub fn level(&self) -> usize {
        self.j
    }

    pub fn path(&self) -> SolverPath {
        self.backend.path
    }

    pub fn current(&self) -> &[f64] {
        match &self.history {
            History::Direct { levels, .. } => levels.last().expect("initial level"),
            History::Fast { curr, .. } => curr,
        }
    }

    pub fn is_done(&self) -> bool {
        self.j >= self.disc.m
    }

    /// Known boundary values moved to the right-hand side.
    fn boundary_terms(&self, diag: &[f64], t: f64) -> Vec<f64> {
        let (n, p) = (self.disc.n, self.spec.p);
        let w = &self.disc.weights;
        let ul = (self.spec.left)(t);
        let ur = (self.spec.right)(t);
        let hp = self.backend.template().h_pow_alpha();
        (1..n)
            .map(|i| {
                let mut left = w.get(i + 1) * ul;
                let mut right = w.get(n - i + 1) * ur;
                if i == n - 1 {
                    left += w.get(0) * ur;
                }
                if i == 1 {
                    right += w.get(0) * ul;
                }
                diag[i - 1] / hp * (p * left + (1.0 - p) * right)
            })
            .collect()
    }

    fn source_terms(&self, t: f64) -> Vec<f64> {
        let f = &self.spec.source;
        (1..self.disc.n)
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|i| f(self.disc.x(i), t))
            .collect()
    }

    fn finish_step(&mut self, diag: Vec<f64>, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
        let t1 = self.disc.t(self.j + 1);
        let bc = self.boundary_terms(&diag, t1);
        let f = self.source_terms(t1);
        for ((r, b), s) in rhs.iter_mut().zip(&bc).zip(&f) {
            *r += b + s;
        }
        let (interior, iters) = self.backend.solve(self.j + 1, diag, &rhs)?;
        self.iterations.push(iters);
        let mut level = Vec::with_capacity(self.disc.n + 1);
        level.push((self.spec.left)(t1));
        level.extend_from_slice(&interior);
        level.push((self.spec.right)(t1));
        Ok(level)
    }

    /// Advances the direct scheme from level `j` to `j + 1`; the history
    /// sum costs O(jN).
    pub fn step_direct(&mut self) -> Result<()> {
        let j = self.j;
        let n_int = self.disc.interior();
        let History::Direct { c, diffs, levels } = &self.history else {
            return Err(Error::GridMismatch("stepper does not hold the direct scheme".into()));
        };
        let mut rhs = vec![0.0; n_int];
        rhs.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, out)| {
            let base = ci * CHUNK + 1;
            let u0 = &levels[0][base..base + out.len()];
            for (o, &u) in out.iter_mut().zip(u0) {
                *o = c[j] * u;
            }
            for s in 1..=j {
                let d = diffs[s - 1];
                let lev = &levels[j + 1 - s][base..base + out.len()];
                for (o, &u) in out.iter_mut().zip(lev) {
                    *o += d * u;
                }
            }
        });
        let diag = diffusion_diagonal(self.spec, self.disc, self.disc.t(j + 1))?;
        let level = self.finish_step(diag, rhs)?;
        if let History::Direct { levels, .. } = &mut self.history {
            levels.push(level);
        }
        self.j += 1;
        Ok(())
    }

    /// Advances the fast scheme from level `j` to `j + 1`. The SOE
    /// accumulators are updated with `u^j - u^{j-1}` first; they are zero
    /// for the first step.
    pub fn step_fast(&mut self) -> Result<()> {
        let j = self.j;
        let n_int = self.disc.interior();
        let History::Fast {
            local,
            decay,
            coef,
            weight,
            acc,
            prev,
            curr,
        } = &mut self.history
        else {
            return Err(Error::GridMismatch("stepper does not hold the fast scheme".into()));
        };
        let n_exp = decay.len();
        let mut rhs = vec![0.0; n_int];
        let (prev, curr) = (&*prev, &*curr);
        let (decay, coef, weight) = (&*decay, &*coef, &*weight);
        let local = *local;
        let work = |(ci, (out, acc)): (usize, (&mut [f64], &mut [f64]))| {
            let base = ci * CHUNK;
            for (i, o) in out.iter_mut().enumerate() {
                let g = base + i + 1;
                let du = curr[g] - prev[g];
                let row = &mut acc[i * n_exp..(i + 1) * n_exp];
                let mut hist = 0.0;
                for k in 0..n_exp {
                    if j >= 1 {
                        row[k] = decay[k] * row[k] + coef[k] * du;
                    }
                    hist += weight[k] * row[k];
                }
                *o = local * curr[g] - hist;
            }
        };
        if n_exp == 0 {
            rhs.par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(ci, out)| work((ci, (out, &mut []))));
        } else {
            rhs.par_chunks_mut(CHUNK)
                .zip(acc.par_chunks_mut(CHUNK * n_exp))
                .enumerate()
                .for_each(work);
        }
        let diag = diffusion_diagonal(self.spec, self.disc, self.disc.t(j + 1))?;
        let level = self.finish_step(diag, rhs)?;
        if let History::Fast { prev, curr, .. } = &mut self.history {
            *prev = std::mem::replace(curr, level);
        }
        self.j += 1;
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        match self.history {
            History::Direct { .. } => self.step_direct(),
            History::Fast { .. } => self.step_fast(),
        }
    }

    fn stored_scalars(&self, recorded_levels: usize) -> usize {
        let lvl = self.disc.n + 1;
        let state = match &self.history {
            History::Direct { levels, .. } => levels.len() * lvl + 2 * self.disc.m,
            History::Fast { acc, decay, .. } => acc.len() + 3 * decay.len() + 2 * lvl + recorded_levels * lvl,
        };
        state + self.backend.stored_scalars()
    }

    fn report(&self, wall: f64, recorded_levels: usize) -> RunReport {
        RunReport {
            scheme: self.disc.scheme(),
            path: self.backend.path,
            preconditioner: self.backend.cfg.preconditioner,
            n: self.disc.n,
            m: self.disc.m,
            iterations: self.iterations.clone(),
            setup_iterations: self.backend.setup_iterations,
            preconditioner_builds: self.backend.preconditioner_builds,
            stagnated_steps: self.backend.stagnated_steps,
            wall_seconds: wall,
            stored_scalars: self.stored_scalars(recorded_levels),
            n_exp: self.disc.n_exp(),
            xi_constant: self.xi_constant,
            xi_time_independent: self.xi_time_independent,
            diagonally_dominant: self.backend.template().is_diagonally_dominant(),
        }
    }
}

/// Runs the scheme over all `M` steps.
pub fn solve(
    spec: &ProblemSpec,
    disc: &Discretization,
    options: &SolverOptions,
) -> Result<(SolutionField, RunReport)> {
    solve_with_observer(spec, disc, options, |_, _| {})
}

/// As [`solve`], calling `observer(j, u^j)` for every level including the
/// initial one.
pub fn solve_with_observer(
    spec: &ProblemSpec,
    disc: &Discretization,
    options: &SolverOptions,
    mut observer: impl FnMut(usize, &[f64]),
) -> Result<(SolutionField, RunReport)> {
    let start = Instant::now();
    let mut stepper = TimeStepper::new(spec, disc, options)?;
    observer(0, stepper.current());
    let keep_all = options.storage == Storage::Full;
    let fast = disc.scheme() == Scheme::Fast;
    let mut recorded = Vec::new();
    if keep_all && fast {
        recorded.push(stepper.current().to_vec());
    }
    while !stepper.is_done() {
        stepper.step()?;
        observer(stepper.level(), stepper.current());
        if keep_all && fast {
            recorded.push(stepper.current().to_vec());
        }
    }
    let wall = start.elapsed().as_secs_f64();
    let report = stepper.report(wall, recorded.len());
    let (levels, level_index) = match stepper.history {
        History::Direct { levels, .. } if keep_all => (levels, (0..=disc.m).collect()),
        History::Direct { mut levels, .. } => (vec![levels.pop().expect("final")], vec![disc.m]),
        History::Fast { .. } if keep_all => (recorded, (0..=disc.m).collect()),
        History::Fast { curr, .. } => (vec![curr], vec![disc.m]),
    };
    Ok((
        SolutionField {
            n: disc.n,
            m: disc.m,
            h: disc.h,
            tau: disc.tau,
            x_left: disc.x_left,
            levels,
            level_index,
        },
        report,
    ))
}
