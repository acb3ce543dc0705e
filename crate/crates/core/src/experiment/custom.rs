//! User-defined problems given as expression strings.
//!
//! Expressions may use `x`, `t` and the run parameters `gamma`, `alpha`,
//! `b`, `p`, together with the usual elementary functions (`sin`, `exp`,
//! `sqrt`, `^`, ...) and the constants `PI` and `E`.

use std::sync::Arc;

use exmex::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::kernels::WeightingFunction;
use crate::problems::{ExampleId, ManufacturedProblem};
use crate::solver::ProblemSpec;

const VARIABLES: [&str; 6] = ["x", "t", "gamma", "alpha", "b", "p"];

/// Weighting of the time derivative for a custom problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CustomWeighting {
    /// `λ(t) = exp(-bt)` with `b` from the parameter grid.
    #[default]
    Tempered,
    /// `λ ≡ 1`.
    Classical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomProblem {
    pub x_left: f64,
    pub x_right: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub weighting: CustomWeighting,
    /// Diffusion coefficient ξ(x, t).
    pub xi: String,
    #[serde(default = "zero")]
    pub source: String,
    /// Initial data u(x, 0).
    pub initial: String,
    /// Boundary data u(x_left, t).
    #[serde(default = "zero")]
    pub left: String,
    /// Boundary data u(x_right, t).
    #[serde(default = "zero")]
    pub right: String,
    /// Exact solution u(x, t), when known.
    pub exact: Option<String>,
}

fn one() -> f64 {
    1.0
}
fn zero() -> String {
    "0".into()
}

/// A parsed expression with its variables bound to run parameters.
struct Compiled {
    expr: FlatEx<f64>,
    /// For each variable of `expr` (alphabetical), its slot in `VARIABLES`.
    slots: Vec<usize>,
    params: [f64; 4],
}

impl Compiled {
    fn new(field: &str, text: &str, params: [f64; 4]) -> Result<Self, ExperimentError> {
        let expr = exmex::parse::<f64>(text)
            .map_err(|e| ExperimentError::Config(format!("`custom.{field}`: {e}")))?;
        let slots = expr
            .var_names()
            .iter()
            .map(|name| {
                VARIABLES.iter().position(|v| v == name).ok_or_else(|| {
                    ExperimentError::Config(format!(
                        "`custom.{field}`: unknown variable `{name}` (allowed: {})",
                        VARIABLES.join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Compiled { expr, slots, params })
    }

    fn eval(&self, x: f64, t: f64) -> f64 {
        let all = [x, t, self.params[0], self.params[1], self.params[2], self.params[3]];
        let mut args = [0.0; 6];
        for (a, &s) in args.iter_mut().zip(&self.slots) {
            *a = all[s];
        }
        self.expr.eval(&args[..self.slots.len()]).unwrap_or(f64::NAN)
    }
}

impl CustomProblem {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.x_left.is_finite() && self.x_right.is_finite() && self.x_right > self.x_left) {
            return Err(ExperimentError::Config("`custom`: need x_left < x_right".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ExperimentError::Config("`custom.horizon`: must be positive".into()));
        }
        self.build(0.5, 1.5, 1.0, 0.5).map(|_| ())
    }

    /// The problem at one parameter point.
    pub fn build(&self, gamma: f64, alpha: f64, b: f64, p: f64) -> Result<ManufacturedProblem, ExperimentError> {
        let params = [gamma, alpha, b, p];
        let compile = |field: &str, text: &str| Compiled::new(field, text, params).map(Arc::new);
        let xi = compile("xi", &self.xi)?;
        let source = compile("source", &self.source)?;
        let initial = compile("initial", &self.initial)?;
        let left = compile("left", &self.left)?;
        let right = compile("right", &self.right)?;
        let exact = self.exact.as_deref().map(|e| compile("exact", e)).transpose()?;
        let lambda = match self.weighting {
            CustomWeighting::Tempered => WeightingFunction::tempered(b),
            CustomWeighting::Classical => WeightingFunction::classical(),
        };
        let (xl, xr) = (self.x_left, self.x_right);
        let spec = ProblemSpec::new(xl, xr, self.horizon, gamma, alpha, p)
            .with_lambda(lambda)
            .with_xi(move |x, t| xi.eval(x, t))
            .with_source(move |x, t| source.eval(x, t))
            .with_initial(move |x| initial.eval(x, 0.0))
            .with_boundaries(move |t| left.eval(xl, t), move |t| right.eval(xr, t));
        Ok(ManufacturedProblem {
            id: ExampleId::Custom,
            gamma,
            alpha,
            b,
            p,
            spec,
            exact: exact.map(|e| Arc::new(move |x, t| e.eval(x, t)) as _),
            known_part: None,
        })
    }
}
