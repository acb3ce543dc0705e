//! Manufactured test problems, error norms and convergence rates.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::WeightingFunction;
use crate::solver::{ProblemSpec, SolutionField, SpaceTimeFn};
use crate::special::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExampleId {
    #[serde(rename = "1")]
    Example1,
    #[serde(rename = "2")]
    Example2,
    #[serde(rename = "A1")]
    ExampleA1,
    #[serde(rename = "custom")]
    Custom,
}

impl ExampleId {
    pub fn label(&self) -> &'static str {
        match self {
            ExampleId::Example1 => "1",
            ExampleId::Example2 => "2",
            ExampleId::ExampleA1 => "A1",
            ExampleId::Custom => "custom",
        }
    }
}

/// A problem with known data, and its exact solution when one exists.
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub id: ExampleId,
    pub gamma: f64,
    pub alpha: f64,
    pub b: f64,
    pub p: f64,
    pub spec: ProblemSpec,
    pub exact: Option<SpaceTimeFn>,
    /// Closed-form part added to the numerical solution to recover `u`
    /// (Example 2 solves only for the smooth remainder).
    pub known_part: Option<SpaceTimeFn>,
}

impl fmt::Debug for ManufacturedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedProblem")
            .field("id", &self.id)
            .field("gamma", &self.gamma)
            .field("alpha", &self.alpha)
            .field("b", &self.b)
            .field("p", &self.p)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

/// `Γ(k+1)/Γ(k+1-α) [p x^{k-α} + (1-p) (L-x)^{k-α}]`, the two-sided
/// Riemann–Liouville derivative of the monomials `x^k` and `(L-x)^k`.
fn rl_monomial(k: i32, alpha: f64, p: f64, x: f64, len: f64) -> f64 {
    let kf = k as f64;
    let c = gamma(kf + 1.0) / gamma(kf + 1.0 - alpha);
    let e = kf - alpha;
    c * (p * x.max(0.0).powf(e) + (1.0 - p) * (len - x).max(0.0).powf(e))
}

fn tempered_g(b: f64, t: f64) -> f64 {
    1.0 + (2.0 - (2.0 + 2.0 * b * t + b * b * t * t) * (-b * t).exp()) / (b * b * b)
}

fn check_orders(gamma_v: f64, alpha: f64, p: f64) -> Result<()> {
    if !(gamma_v > 0.0 && gamma_v < 1.0) {
        return Err(invalid("gamma", gamma_v, "must lie in (0, 1)"));
    }
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(invalid("alpha", alpha, "must lie in (1, 2]"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", p, "must lie in [0, 1]"));
    }
    Ok(())
}

fn smooth_example(
    id: ExampleId,
    gamma_v: f64,
    alpha: f64,
    b: f64,
    p: f64,
    xi: impl Fn(f64, f64) -> f64 + Send + Sync + Clone + 'static,
) -> Result<ManufacturedProblem> {
    check_orders(gamma_v, alpha, p)?;
    if !(b > 0.0 && b.is_finite()) {
        return Err(invalid("b", b, "decay rate must be positive"));
    }
    let len = 2.0;
    let shape = |x: f64| x * x * (2.0 - x) * (2.0 - x);
    let exact: SpaceTimeFn = Arc::new(move |x, t| tempered_g(b, t) * shape(x));
    let g4 = gamma(4.0 - gamma_v);
    let xi_f = xi.clone();
    let source = move |x: f64, t: f64| {
        let dt = 2.0 * t.powf(3.0 - gamma_v) * (-b * t).exp() / g4;
        let space = 4.0 * rl_monomial(2, alpha, p, x, len) - 4.0 * rl_monomial(3, alpha, p, x, len)
            + rl_monomial(4, alpha, p, x, len);
        dt * shape(x) - tempered_g(b, t) * xi_f(x, t) * space
    };
    let spec = ProblemSpec::new(0.0, len, 1.0, gamma_v, alpha, p)
        .with_lambda(WeightingFunction::tempered(b))
        .with_xi(xi)
        .with_source(source)
        .with_initial(shape)
        .with_boundaries(|_| 0.0, |_| 0.0);
    Ok(ManufacturedProblem {
        id,
        gamma: gamma_v,
        alpha,
        b,
        p,
        spec,
        exact: Some(exact),
        known_part: None,
    })
}

/// Smooth problem on `[0,2] × [0,1]` with `ξ = 1 + x² + sin t` and exact
/// solution `u = g(t) x²(2-x)²`,
/// `g(t) = 1 + (2 - (2 + 2bt + b²t²) e^{-bt}) / b³`.
pub fn example1(gamma_v: f64, alpha: f64, b: f64, p: f64) -> Result<ManufacturedProblem> {
    smooth_example(ExampleId::Example1, gamma_v, alpha, b, p, |x, t| {
        1.0 + x * x + t.sin()
    })
}

/// As [`example1`] with the larger coefficient `ξ = 10(1/2 + x² + sin t)`.
pub fn example_a1(gamma_v: f64, alpha: f64, b: f64, p: f64) -> Result<ManufacturedProblem> {
    smooth_example(ExampleId::ExampleA1, gamma_v, alpha, b, p, |x, t| {
        10.0 * (0.5 + x * x + t.sin())
    })
}

/// `q(x)`, with `5 ξ q` the spatial derivative of `5x³(1-x)³`.
pub fn example2_q(alpha: f64, p: f64, x: f64) -> f64 {
    rl_monomial(3, alpha, p, x, 1.0) - 3.0 * rl_monomial(4, alpha, p, x, 1.0)
        + 3.0 * rl_monomial(5, alpha, p, x, 1.0)
        - rl_monomial(6, alpha, p, x, 1.0)
}

/// Problem on `[0,1]²` with constant diffusion `xi_const` whose solution
/// has a `√t` singularity: `u = 5x³(1-x)³ φ(t) + v` with
/// `φ(t) = 1 - √t e^{-bt}/Γ(1.5)`. The returned spec is the problem for
/// the remainder `v`, which starts from zero.
pub fn example2(gamma_v: f64, alpha: f64, b: f64, p: f64, xi_const: f64) -> Result<ManufacturedProblem> {
    check_orders(gamma_v, alpha, p)?;
    if !(b >= 0.0 && b.is_finite()) {
        return Err(invalid("b", b, "decay rate must be non-negative"));
    }
    if !(xi_const > 0.0 && xi_const.is_finite()) {
        return Err(Error::InvalidDiffusion {
            x: f64::NAN,
            t: f64::NAN,
            value: xi_const,
        });
    }
    let shape = |x: f64| 5.0 * (x * (1.0 - x)).powi(3);
    let g15 = gamma(1.5);
    let phi = move |t: f64| 1.0 - t.sqrt() * (-b * t).exp() / g15;
    let (ga, gb) = (gamma(1.5 - gamma_v), gamma(2.5 - gamma_v));
    let source = move |x: f64, t: f64| {
        let time = (t.powf(0.5 - gamma_v) / ga - b * t.powf(1.5 - gamma_v) / gb) * (-b * t).exp();
        shape(x) * time + 5.0 * xi_const * example2_q(alpha, p, x) * phi(t)
    };
    let spec = ProblemSpec::new(0.0, 1.0, 1.0, gamma_v, alpha, p)
        .with_lambda(WeightingFunction::tempered(b))
        .with_xi(move |_, _| xi_const)
        .with_source(source)
        .with_initial(|_| 0.0)
        .with_boundaries(|_| 0.0, |_| 0.0);
    Ok(ManufacturedProblem {
        id: ExampleId::Example2,
        gamma: gamma_v,
        alpha,
        b,
        p,
        spec,
        exact: None,
        known_part: Some(Arc::new(move |x, t| shape(x) * phi(t))),
    })
}

/// Maximum-over-levels and final-level errors in the max norm and the
/// discrete norm `‖v‖₂ = sqrt(h Σ v_i²)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorReport {
    pub error_inf: f64,
    pub error_l2: f64,
    pub final_inf: f64,
    pub final_l2: f64,
}

/// Streams levels into an [`ErrorReport`].
#[derive(Debug, Clone, Default)]
pub struct ErrorAccumulator {
    report: ErrorReport,
    last_level: Option<usize>,
}

impl ErrorAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds the pointwise difference at level `j`; `h` is the mesh width
    /// of the points compared.
    pub fn add(&mut self, j: usize, diff: impl Iterator<Item = f64>, h: f64) {
        let (mut inf, mut sq) = (0.0f64, 0.0);
        for d in diff {
            inf = inf.max(d.abs());
            sq += d * d;
        }
        let l2 = (h * sq).sqrt();
        let r = &mut self.report;
        r.error_inf = r.error_inf.max(inf);
        r.error_l2 = r.error_l2.max(l2);
        if self.last_level.is_none_or(|k| j >= k) {
            r.final_inf = inf;
            r.final_l2 = l2;
            self.last_level = Some(j);
        }
    }

    pub fn finish(self) -> ErrorReport {
        self.report
    }
}

/// Errors of `field` against an exact solution over the stored levels.
pub fn compute_errors(field: &SolutionField, exact: &dyn Fn(f64, f64) -> f64) -> ErrorReport {
    let mut acc = ErrorAccumulator::new();
    for (lev, &j) in field.levels.iter().zip(&field.level_index) {
        let t = field.t(j);
        acc.add(
            j,
            lev.iter().enumerate().map(|(i, u)| u - exact(field.x(i), t)),
            field.h,
        );
    }
    acc.finish()
}

/// Errors between two fields on nested grids, compared at the coarse
/// points and at the time levels both fields store.
pub fn compute_errors_two_grid(coarse: &SolutionField, fine: &SolutionField) -> Result<ErrorReport> {
    let mismatch = |what: &str| Error::GridMismatch(what.to_string());
    if !fine.n.is_multiple_of(coarse.n) || !fine.m.is_multiple_of(coarse.m) {
        return Err(mismatch("fine grid must refine the coarse grid by integer factors"));
    }
    if (fine.x_left - coarse.x_left).abs() > 1e-14
        || (fine.h * fine.n as f64 - coarse.h * coarse.n as f64).abs() > 1e-12
        || (fine.tau * fine.m as f64 - coarse.tau * coarse.m as f64).abs() > 1e-12
    {
        return Err(mismatch("grids cover different domains"));
    }
    let (rx, rt) = (fine.n / coarse.n, fine.m / coarse.m);
    let mut acc = ErrorAccumulator::new();
    let mut shared = 0;
    for (lev, &j) in coarse.levels.iter().zip(&coarse.level_index) {
        if let Some(f) = fine.level(j * rt) {
            shared += 1;
            acc.add(j, lev.iter().enumerate().map(|(i, u)| u - f[i * rx]), coarse.h);
        }
    }
    if shared == 0 {
        return Err(mismatch("no common time level is stored"));
    }
    Ok(acc.finish())
}

/// Observed order `log(e_coarse / e_fine) / log(ratio)`.
pub fn convergence_rate(e_coarse: f64, e_fine: f64, ratio: f64) -> Result<f64> {
    if !(e_coarse > 0.0) {
        return Err(invalid("e_coarse", e_coarse, "errors must be positive"));
    }
    if !(e_fine > 0.0) {
        return Err(invalid("e_fine", e_fine, "errors must be positive"));
    }
    if !(ratio > 1.0) {
        return Err(invalid("ratio", ratio, "refinement ratio must exceed 1"));
    }
    Ok((e_coarse / e_fine).ln() / ratio.ln())
}
