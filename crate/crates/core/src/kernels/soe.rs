//! Sum-of-exponentials (SOE) compression of the power kernel `t^{-γ}` and
//! the local weight of the fast tempered L1 operator.
//!
//! The kernel is written as a Laplace integral
//!
//! ```text
//! t^{-γ} = 1/Γ(γ) ∫_0^∞ e^{-ts} s^{γ-1} ds
//! ```
//!
//! and discretized with Gauss–Jacobi on `[0, 1/T]` (absorbing the `s^{γ-1}`
//! weight) plus Gauss–Legendre panels in `log s` out to the point where
//! `e^{-δ s}` is negligible. Nodes whose contribution on `[δ, T]` is far
//! below ε are dropped. Every candidate rule is certified by dense sampling
//! before it is returned, and the smallest certified rule wins.

use crate::error::{invalid, Error, Result};
use crate::special::{gamma, gauss_jacobi, gauss_legendre, integrate_adaptive, GaussRule};

/// Number of log-spaced points used to certify the approximation.
pub const CERTIFY_SAMPLES: usize = 10_000;
const QUICK_SAMPLES: usize = 400;

const JACOBI_NODES: std::ops::RangeInclusive<usize> = 2..=10;
const PANEL_NODES: std::ops::RangeInclusive<usize> = 3..=24;
const PANEL_WIDTHS: [f64; 4] = [1.5, 2.0, 2.5, 3.0];

#[derive(Debug, Clone)]
pub struct SoeApproximation {
    pub gamma: f64,
    pub delta: f64,
    pub horizon: f64,
    pub epsilon: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Largest sampled |t^{-γ} - Σ ω_k e^{-s_k t}| over the certification set.
    pub certified_error: f64,
}

impl SoeApproximation {
    pub fn n_exp(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * (-s * t).exp())
            .sum()
    }
}

/// Log-spaced sample points covering `[delta, horizon]`, endpoints included.
pub fn log_samples(delta: f64, horizon: f64, count: usize) -> Vec<f64> {
    let (la, lb) = (delta.ln(), horizon.ln());
    (0..count)
        .map(|i| {
            if i + 1 == count {
                horizon
            } else {
                (la + (lb - la) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

fn max_error(gamma: f64, nodes: &[f64], weights: &[f64], samples: &[f64]) -> f64 {
    samples
        .iter()
        .map(|&t| {
            let approx: f64 = nodes
                .iter()
                .zip(weights)
                .map(|(s, w)| w * (-s * t).exp())
                .sum();
            (approx - t.powf(-gamma)).abs()
        })
        .fold(0.0, f64::max)
}

struct Candidate {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    key: (usize, usize, usize, usize),
}

fn candidate(
    gamma_v: f64,
    delta: f64,
    horizon: f64,
    epsilon: f64,
    jacobi: &GaussRule,
    legendre: &GaussRule,
    width: f64,
) -> (Vec<f64>, Vec<f64>) {
    let s0 = 1.0 / horizon;
    let norm = 1.0 / gamma(gamma_v);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    // [0, s0] with s = s0 (1 + u)/2, s^{γ-1} ds = (s0/2)^γ (1+u)^{γ-1} du
    let jac_scale = (0.5 * s0).powf(gamma_v) * norm;
    for (u, w) in jacobi.nodes.iter().zip(&jacobi.weights) {
        nodes.push(0.5 * s0 * (1.0 + u));
        weights.push(w * jac_scale);
    }
    // [s0, s_max] in x = ln s, s^{γ-1} ds = e^{γx} dx
    let x0 = s0.ln();
    let x_max = ((1.0 / epsilon).ln() + 10.0).ln() - delta.ln();
    let panels = ((x_max - x0) / width).ceil().max(1.0) as usize;
    for p in 0..panels {
        let a = x0 + p as f64 * width;
        let mid = a + 0.5 * width;
        for (u, w) in legendre.nodes.iter().zip(&legendre.weights) {
            let x = mid + 0.5 * width * u;
            nodes.push(x.exp());
            weights.push(0.5 * width * w * (gamma_v * x).exp() * norm);
        }
    }
    // drop terms that stay far below ε on all of [δ, T]
    let cutoff = epsilon * 1e-3;
    let (n, w): (Vec<f64>, Vec<f64>) = nodes
        .into_iter()
        .zip(weights)
        .filter(|(s, w)| w * (-s * delta).exp() > cutoff)
        .unzip();
    (n, w)
}

/// Builds and certifies an SOE approximation of `t^{-γ}` on `[delta, horizon]`.
pub fn soe_build(gamma_v: f64, delta: f64, horizon: f64, epsilon: f64) -> Result<SoeApproximation> {
    if !(gamma_v > 0.0 && gamma_v < 1.0) {
        return Err(invalid("gamma", gamma_v, "must lie in (0, 1)"));
    }
    if !(delta > 0.0 && delta < horizon) {
        return Err(invalid("delta", delta, "need 0 < delta < horizon"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", epsilon, "must lie in (0, 1)"));
    }
    let jacobi: Vec<GaussRule> = JACOBI_NODES
        .map(|n| gauss_jacobi(n, 0.0, gamma_v - 1.0))
        .collect();
    let legendre: Vec<GaussRule> = PANEL_NODES.map(gauss_legendre).collect();

    let mut candidates = Vec::new();
    for (ji, jr) in jacobi.iter().enumerate() {
        for (wi, &width) in PANEL_WIDTHS.iter().enumerate() {
            for (li, lr) in legendre.iter().enumerate() {
                let (nodes, weights) = candidate(gamma_v, delta, horizon, epsilon, jr, lr, width);
                candidates.push(Candidate {
                    key: (nodes.len(), ji, wi, li),
                    nodes,
                    weights,
                });
            }
        }
    }
    candidates.sort_by_key(|c| c.key);

    let quick = log_samples(delta, horizon, QUICK_SAMPLES);
    let full = log_samples(delta, horizon, CERTIFY_SAMPLES);
    let mut best = f64::INFINITY;
    for c in candidates {
        let e_quick = max_error(gamma_v, &c.nodes, &c.weights, &quick);
        best = best.min(e_quick);
        if e_quick >= epsilon {
            continue;
        }
        let e_full = max_error(gamma_v, &c.nodes, &c.weights, &full);
        if e_full < epsilon {
            return Ok(SoeApproximation {
                gamma: gamma_v,
                delta,
                horizon,
                epsilon,
                nodes: c.nodes,
                weights: c.weights,
                certified_error: e_full,
            });
        }
        best = best.min(e_full);
    }
    Err(Error::SoeNotCertified { epsilon, best })
}

/// Diagonal time coefficient of the fast scheme for λ(t) = exp(-bt):
///
/// ```text
/// (e^{-bτ} τ^{1-γ} + b ∫_0^τ e^{-bθ} θ^{1-γ} dθ) / (τ Γ(2-γ))
/// ```
///
/// which is the exact one-step integral of the tempered kernel against a
/// constant derivative.
pub fn local_weight(gamma_v: f64, b: f64, tau: f64) -> Result<f64> {
    if !(gamma_v > 0.0 && gamma_v < 1.0) {
        return Err(invalid("gamma", gamma_v, "must lie in (0, 1)"));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(invalid("b", b, "decay rate must be non-negative"));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", tau, "must be positive"));
    }
    let integral = if b == 0.0 {
        0.0
    } else {
        integrate_adaptive(
            |th| (-b * th).exp() * th.powf(1.0 - gamma_v),
            0.0,
            tau,
            1e-12,
            0.0,
        )?
    };
    Ok(((-b * tau).exp() * tau.powf(1.0 - gamma_v) + b * integral) / (tau * gamma(2.0 - gamma_v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn certified_against_direct_kernel() {
        let soe = soe_build(0.5, 1e-3, 1.0, 1e-9).unwrap();
        assert!(soe.n_exp() < 80, "n_exp = {}", soe.n_exp());
        // independent check on a shifted sample set
        let pts = log_samples(1e-3, 1.0, 7919);
        for t in pts {
            assert!((soe.eval(t) - t.powf(-0.5)).abs() < 1e-9, "t = {t}");
        }
        assert!(soe.nodes.iter().all(|&s| s > 0.0));
        assert!(soe.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn tighter_tolerance_needs_at_least_as_many_terms() {
        let mut prev = 0;
        for k in 0..6 {
            let eps = 1e-6 / 2f64.powi(k);
            let n = soe_build(0.3, 1e-3, 1.0, eps).unwrap().n_exp();
            assert!(n >= prev, "ε = {eps}: {n} < {prev}");
            prev = n;
        }
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(soe_build(0.5, 1.0, 1.0, 1e-9).is_err());
        assert!(soe_build(0.5, 0.0, 1.0, 1e-9).is_err());
        assert!(soe_build(1.5, 1e-3, 1.0, 1e-9).is_err());
    }

    #[test]
    fn local_weight_without_tempering() {
        let (g, tau) = (0.4, 0.01);
        let lw = local_weight(g, 0.0, tau).unwrap();
        assert_relative_eq!(lw, tau.powf(-g) / gamma(2.0 - g), max_relative = 1e-15);
    }

    #[test]
    fn local_weight_matches_composite_quadrature() {
        let (g, b, tau) = (0.5, 1.0, 0.01);
        // composite Simpson on θ = τ v², which removes the θ^{1-γ} kink
        let n = 20_000;
        let f = |v: f64| {
            let th = tau * v * v;
            (-b * th).exp() * th.powf(1.0 - g) * 2.0 * tau * v
        };
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let integral = s * h / 3.0;
        let oracle = ((-b * tau).exp() * tau.powf(1.0 - g) + b * integral) / (tau * gamma(2.0 - g));
        let lw = local_weight(g, b, tau).unwrap();
        assert!((lw - oracle).abs() <= 1e-10 * oracle.max(1.0), "{lw} vs {oracle}");
    }

    #[test]
    fn local_weight_limit_matches_l1() {
        use crate::kernels::{l1_coefficients, WeightingFunction};
        let (g, tau, b) = (0.5, 0.01, 1e-12);
        let c0 = l1_coefficients(g, &WeightingFunction::tempered(b), tau, 1).unwrap().c[0];
        let lw = local_weight(g, b, tau).unwrap();
        assert!((lw - c0).abs() <= 1e-8, "{lw} vs {c0}");
    }
}
