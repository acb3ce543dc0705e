//! Weighted and shifted Grünwald (WSGD) weights for the two-sided
//! Riemann–Liouville derivative of order α ∈ (1, 2].
//!
//! The weights combine three shifted Grünwald sums,
//! `w_k = κ₁ g_k + κ₀ g_{k-1} + κ₋₁ g_{k-2}`, with
//! `κ₁ = (α²+3α+2)/12` and `κ₋₁ = (α²-3α+2)/12`. For a consistent
//! second-order operator the three κ must sum to one, which fixes
//! `κ₀ = (4-α²)/6`. At α = 2 this gives the classical three-point
//! Laplacian `[1, -2, 1]`.
//!
//! [`KappaForm::Printed`] keeps the variant `κ₀ = (4-α)/6` whose κ sum to
//! `(α²-α+6)/6`; it approximates a rescaled derivative and is provided
//! only for comparison.

use crate::error::{invalid, Result};

/// Choice of the middle shift constant κ₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KappaForm {
    /// `κ₀ = (4-α²)/6`, consistent with the Riemann–Liouville derivative.
    #[default]
    QuasiCompact,
    /// `κ₀ = (4-α)/6`.
    Printed,
}

impl KappaForm {
    pub fn kappa0(&self, alpha: f64) -> f64 {
        match self {
            KappaForm::QuasiCompact => (4.0 - alpha * alpha) / 6.0,
            KappaForm::Printed => (4.0 - alpha) / 6.0,
        }
    }
}

/// WSGD weights `w_0 .. w_K` together with the three shift constants.
#[derive(Debug, Clone, PartialEq)]
pub struct WsgdWeights {
    pub alpha: f64,
    pub w: Vec<f64>,
    pub kappa1: f64,
    pub kappa0: f64,
    pub kappa_m1: f64,
    pub form: KappaForm,
}

impl WsgdWeights {
    /// Highest weight index K.
    pub fn count(&self) -> usize {
        self.w.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.w.get(k).copied().unwrap_or(0.0)
    }
}

/// Grünwald coefficients `g_k = (-1)^k C(α, k)` for k = 0..=count, by the
/// recurrence `g_k = (1 - (α + 1)/k) g_{k-1}`.
pub fn grunwald_coefficients(alpha: f64, count: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(count + 1);
    g.push(1.0);
    for k in 1..=count {
        let prev = g[k - 1];
        g.push((1.0 - (alpha + 1.0) / k as f64) * prev);
    }
    g
}

/// Consistent WSGD weights `w_0 ..= w_count`.
pub fn wsgd_weights(alpha: f64, count: usize) -> Result<WsgdWeights> {
    wsgd_weights_with(alpha, count, KappaForm::QuasiCompact)
}

pub fn wsgd_weights_with(alpha: f64, count: usize, form: KappaForm) -> Result<WsgdWeights> {
    check_alpha(alpha)?;
    if count < 2 {
        return Err(invalid("count", count as f64, "need at least w_0..w_2"));
    }
    let kappa1 = (alpha * alpha + 3.0 * alpha + 2.0) / 12.0;
    let kappa0 = form.kappa0(alpha);
    let kappa_m1 = (alpha * alpha - 3.0 * alpha + 2.0) / 12.0;
    let g = grunwald_coefficients(alpha, count);
    let w = (0..=count)
        .map(|k| match k {
            0 => kappa1 * g[0],
            1 => kappa1 * g[1] + kappa0 * g[0],
            _ => kappa1 * g[k] + kappa0 * g[k - 1] + kappa_m1 * g[k - 2],
        })
        .collect();
    Ok(WsgdWeights {
        alpha,
        w,
        kappa1,
        kappa0,
        kappa_m1,
        form,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(invalid("alpha", alpha, "must lie in (1, 2]"));
    }
    Ok(())
}

/// Closed form of `w_2` as a quartic in α:
/// `(α⁴ + 6α³ + α² - 24α + 4)/24`.
pub fn w2_value(alpha: f64) -> Result<f64> {
    w2_value_with(alpha, KappaForm::QuasiCompact)
}

/// `w_2` for either κ₀; the printed form gives
/// `α⁴/24 + α³/12 + 5α²/24 - α + 1/6`.
pub fn w2_value_with(alpha: f64, form: KappaForm) -> Result<f64> {
    check_alpha(alpha)?;
    let (a2, a3, a4) = (alpha * alpha, alpha.powi(3), alpha.powi(4));
    Ok(match form {
        KappaForm::QuasiCompact => (a4 + 6.0 * a3 + a2 - 24.0 * alpha + 4.0) / 24.0,
        KappaForm::Printed => a4 / 24.0 + a3 / 12.0 + 5.0 * a2 / 24.0 - alpha + 1.0 / 6.0,
    })
}

/// The order α₀ at which the consistent `w_2` changes sign. For α ≥ α₀
/// every weight but `w_1` is non-negative and the WSGD matrices are
/// diagonally dominant.
pub fn w2_sign_change() -> f64 {
    w2_sign_change_with(KappaForm::QuasiCompact)
}

/// Sign change of `w_2` by bisection on its quartic.
pub fn w2_sign_change_with(form: KappaForm) -> f64 {
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    let f = |a: f64| w2_value_with(a, form).expect("in range");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    hi
}
