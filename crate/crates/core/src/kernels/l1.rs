//! Generalized L1 coefficients for the weighted Caputo derivative.
//!
//! The discrete derivative at level `j + 1` is
//! `Σ_{s=0}^{j} c_{j-s} (u^{s+1} - u^s)` with
//!
//! ```text
//! c_ℓ = τ^{-γ}/Γ(2-γ) · [ λ(t_{ℓ+1/2}) a_ℓ + (λ(t_ℓ) - λ(t_{ℓ+1})) b_ℓ ]
//! a_ℓ = (ℓ+1)^{1-γ} - ℓ^{1-γ}
//! b_ℓ = [(ℓ+1)^{2-γ} - ℓ^{2-γ}]/(2-γ) - [(ℓ+1)^{1-γ} + ℓ^{1-γ}]/2
//! ```

use super::weighting::WeightingFunction;
use crate::error::{invalid, Error, Result};
use crate::special::{binomial, gamma};

/// Above this index `a_ℓ` and `b_ℓ` are summed as binomial series in 1/ℓ,
/// which avoids the cancellation in the differences of powers.
const SERIES_FROM: usize = 8;
const SERIES_TERMS: usize = 40;

#[derive(Debug, Clone)]
pub struct L1Coefficients {
    pub gamma: f64,
    pub tau: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl L1Coefficients {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// `c_{s-1} - c_s` for s = 1..len, the history weights of the
    /// reformulated linear systems.
    pub fn differences(&self) -> Vec<f64> {
        self.c.windows(2).map(|w| w[0] - w[1]).collect()
    }
}

/// `a_ℓ = (ℓ+1)^{1-γ} - ℓ^{1-γ}`.
pub fn l1_a(gamma: f64, ell: usize) -> f64 {
    let q = 1.0 - gamma;
    if ell < SERIES_FROM {
        let l = ell as f64;
        return (l + 1.0).powf(q) - l.powf(q);
    }
    let l = ell as f64;
    let u = 1.0 / l;
    l.powf(q) * (q * u.ln_1p()).exp_m1()
}

/// `b_ℓ`, the weight of the λ-slope correction.
pub fn l1_b(gamma: f64, ell: usize) -> f64 {
    let q = 1.0 - gamma;
    let l = ell as f64;
    if ell < SERIES_FROM {
        return ((l + 1.0).powf(q + 1.0) - l.powf(q + 1.0)) / (q + 1.0)
            - 0.5 * ((l + 1.0).powf(q) + l.powf(q));
    }
    // b_ℓ = ℓ^q Σ_{k≥2} C(q,k) (1/(k+1) - 1/2) ℓ^{-k}
    let u = 1.0 / l;
    let mut sum = 0.0;
    let mut uk = u * u;
    let mut ck = binomial(q, 2);
    for k in 2..SERIES_TERMS {
        sum += ck * (1.0 / (k as f64 + 1.0) - 0.5) * uk;
        ck *= (q - k as f64) / (k as f64 + 1.0);
        uk *= u;
    }
    l.powf(q) * sum
}

/// Coefficients `c_0 .. c_{steps-1}` on the uniform mesh `t_j = jτ`.
///
/// λ is sampled at `t_ℓ`, `t_{ℓ+1/2}` and `t_{ℓ+1}`; every sample must be
/// positive and the samples must be non-increasing in time.
pub fn l1_coefficients(
    gamma: f64,
    lambda: &WeightingFunction,
    tau: f64,
    steps: usize,
) -> Result<L1Coefficients> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", gamma, "must lie in (0, 1)"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", tau, "must be positive"));
    }
    if steps == 0 {
        return Err(invalid("steps", 0.0, "need at least one step"));
    }
    // λ on the half-step grid t = kτ/2, k = 0..=2·steps
    let half: Vec<f64> = (0..=2 * steps)
        .map(|k| lambda.eval(0.5 * k as f64 * tau))
        .collect();
    for (k, &v) in half.iter().enumerate() {
        let t = 0.5 * k as f64 * tau;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveWeight { t, value: v });
        }
        if k > 0 && v > half[k - 1] * (1.0 + 1e-14) {
            return Err(Error::IncreasingWeight {
                t0: t - 0.5 * tau,
                v0: half[k - 1],
                t1: t,
                v1: v,
            });
        }
    }
    let scale = tau.powf(-gamma) / gamma_2m(gamma);
    let mut a = Vec::with_capacity(steps);
    let mut b = Vec::with_capacity(steps);
    let mut c = Vec::with_capacity(steps);
    for ell in 0..steps {
        let al = l1_a(gamma, ell);
        let bl = l1_b(gamma, ell);
        let lam_l = half[2 * ell];
        let lam_mid = half[2 * ell + 1];
        let lam_r = half[2 * ell + 2];
        c.push(scale * (lam_mid * al + (lam_l - lam_r) * bl));
        a.push(al);
        b.push(bl);
    }
    Ok(L1Coefficients { gamma, tau, a, b, c })
}

fn gamma_2m(g: f64) -> f64 {
    gamma(2.0 - g)
}
