use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::kernels::WeightingFunction;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The continuous problem on `[x_left, x_right] × [0, horizon]`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub x_left: f64,
    pub x_right: f64,
    pub horizon: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// Weight of the left-sided derivative.
    pub p: f64,
    pub lambda: WeightingFunction,
    /// Diffusion coefficient ξ(x, t).
    pub xi: SpaceTimeFn,
    /// Source f(x, t).
    pub source: SpaceTimeFn,
    /// Initial data u(x, 0).
    pub initial: ScalarFn,
    /// u(x_left, t).
    pub left: ScalarFn,
    /// u(x_right, t).
    pub right: ScalarFn,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("domain", &(self.x_left, self.x_right))
            .field("horizon", &self.horizon)
            .field("gamma", &self.gamma)
            .field("alpha", &self.alpha)
            .field("p", &self.p)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// A problem with zero source and zero boundary data; the remaining
    /// pieces are filled in with the `with_*` builders.
    pub fn new(
        x_left: f64,
        x_right: f64,
        horizon: f64,
        gamma: f64,
        alpha: f64,
        p: f64,
    ) -> Self {
        let zero2: SpaceTimeFn = Arc::new(|_, _| 0.0);
        let zero1: ScalarFn = Arc::new(|_| 0.0);
        ProblemSpec {
            x_left,
            x_right,
            horizon,
            gamma,
            alpha,
            p,
            lambda: WeightingFunction::classical(),
            xi: Arc::new(|_, _| 1.0),
            source: zero2,
            initial: zero1.clone(),
            left: zero1.clone(),
            right: zero1,
        }
    }

    pub fn with_lambda(mut self, lambda: WeightingFunction) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_xi(mut self, xi: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.xi = Arc::new(xi);
        self
    }

    pub fn with_source(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn with_initial(mut self, u0: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.initial = Arc::new(u0);
        self
    }

    pub fn with_boundaries(
        mut self,
        left: impl Fn(f64) -> f64 + Send + Sync + 'static,
        right: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.left = Arc::new(left);
        self.right = Arc::new(right);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_right > self.x_left) {
            return Err(invalid("x_right", self.x_right, "domain must have positive length"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", self.horizon, "must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid("gamma", self.gamma, "must lie in (0, 1)"));
        }
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(invalid("alpha", self.alpha, "must lie in (1, 2]"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid("p", self.p, "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }
}
