use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::spec::ProblemSpec;
use crate::error::{invalid, Error, Result};
use crate::kernels::{
    l1_coefficients, local_weight, soe_build, wsgd_weights, L1Coefficients, SoeApproximation,
    WsgdWeights,
};

/// Smallest number of spatial intervals accepted.
pub const MIN_INTERVALS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Direct,
    Fast,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::Direct => "direct",
            Scheme::Fast => "fast",
        }
    }
}

/// Temporal coefficients of the chosen scheme.
#[derive(Debug, Clone)]
pub enum TimeCoefficients {
    /// Full L1 history `c_0 .. c_{M-1}`.
    Direct(L1Coefficients),
    /// Local weight plus an SOE compression of the history kernel. The
    /// SOE is absent when a single step leaves no history.
    Fast {
        b: f64,
        local: f64,
        soe: Option<SoeApproximation>,
    },
}

/// Uniform mesh with `n` spatial intervals and `m` time steps, together
/// with the spatial weights and the temporal coefficients.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub n: usize,
    pub m: usize,
    pub h: f64,
    pub tau: f64,
    pub x_left: f64,
    pub weights: Arc<WsgdWeights>,
    pub time: TimeCoefficients,
}

impl Discretization {
    fn base(spec: &ProblemSpec, n: usize, m: usize) -> Result<(f64, f64, Arc<WsgdWeights>)> {
        spec.validate()?;
        if n < MIN_INTERVALS {
            return Err(invalid("N", n as f64, "need at least 5 spatial intervals"));
        }
        if m == 0 {
            return Err(invalid("M", 0.0, "need at least one time step"));
        }
        let h = spec.length() / n as f64;
        let tau = spec.horizon / m as f64;
        let w = wsgd_weights(spec.alpha, n)?;
        Ok((h, tau, Arc::new(w)))
    }

    /// Mesh for the direct scheme.
    pub fn direct(spec: &ProblemSpec, n: usize, m: usize) -> Result<Self> {
        let (h, tau, weights) = Self::base(spec, n, m)?;
        let l1 = l1_coefficients(spec.gamma, &spec.lambda, tau, m)?;
        Ok(Discretization {
            n,
            m,
            h,
            tau,
            x_left: spec.x_left,
            weights,
            time: TimeCoefficients::Direct(l1),
        })
    }

    /// Mesh for the fast scheme with SOE tolerance `epsilon`.
    pub fn fast(spec: &ProblemSpec, n: usize, m: usize, epsilon: f64) -> Result<Self> {
        let (h, tau, weights) = Self::base(spec, n, m)?;
        let b = spec
            .lambda
            .tempered_rate()
            .ok_or(Error::FastSchemeRequiresTempered)?;
        let local = local_weight(spec.gamma, b, tau)?;
        let soe = if m > 1 {
            Some(soe_build(spec.gamma, tau, spec.horizon, epsilon)?)
        } else {
            None
        };
        Ok(Discretization {
            n,
            m,
            h,
            tau,
            x_left: spec.x_left,
            weights,
            time: TimeCoefficients::Fast { b, local, soe },
        })
    }

    pub fn new(spec: &ProblemSpec, n: usize, m: usize, scheme: Scheme, epsilon: f64) -> Result<Self> {
        match scheme {
            Scheme::Direct => Self::direct(spec, n, m),
            Scheme::Fast => Self::fast(spec, n, m, epsilon),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self.time {
            TimeCoefficients::Direct(_) => Scheme::Direct,
            TimeCoefficients::Fast { .. } => Scheme::Fast,
        }
    }

    /// Diagonal time coefficient of every step's system matrix.
    pub fn leading_coefficient(&self) -> f64 {
        match &self.time {
            TimeCoefficients::Direct(l1) => l1.c[0],
            TimeCoefficients::Fast { local, .. } => *local,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.h
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.tau
    }

    /// Number of interior unknowns, N - 1.
    pub fn interior(&self) -> usize {
        self.n - 1
    }

    pub fn n_exp(&self) -> Option<usize> {
        match &self.time {
            TimeCoefficients::Fast { soe: Some(s), .. } => Some(s.n_exp()),
            TimeCoefficients::Fast { soe: None, .. } => Some(0),
            TimeCoefficients::Direct(_) => None,
        }
    }
}
