use std::sync::Arc;

use super::matrix::ToeplitzMatrix;
use crate::error::{invalid, Error, Result};
use crate::kernels::{w2_sign_change, WsgdWeights};
use crate::krylov::LinearOperator;

/// The combined WSGD Toeplitz matrix `p W_α + (1 - p) W_αᵀ` of order `n`.
///
/// `W_α` has `w_1` on the diagonal, `w_0` on the superdiagonal and
/// `w_{k+1}` on the k-th subdiagonal.
pub fn wsgd_toeplitz(weights: &WsgdWeights, n: usize, p: f64) -> Result<ToeplitzMatrix> {
    if weights.w.len() < n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: weights.w.len(),
        });
    }
    let mut col_w = vec![0.0; n];
    let mut row_w = vec![0.0; n];
    col_w.copy_from_slice(&weights.w[1..=n]);
    row_w[0] = weights.w[1];
    if n > 1 {
        row_w[1] = weights.w[0];
    }
    let col: Vec<f64> = col_w
        .iter()
        .zip(&row_w)
        .map(|(c, r)| p * c + (1.0 - p) * r)
        .collect();
    let row: Vec<f64> = row_w
        .iter()
        .zip(&col_w)
        .map(|(r, c)| p * r + (1.0 - p) * c)
        .collect();
    ToeplitzMatrix::new(col, row)
}

/// The per-step system matrix
///
/// ```text
/// M = c₀ I - diag(ξ) / h^α · [p W_α + (1 - p) W_αᵀ]
/// ```
///
/// The Toeplitz part is shared between steps; only `c₀` and the diagonal
/// change when ξ depends on time.
#[derive(Debug, Clone)]
pub struct SystemOperator {
    pub c0: f64,
    pub h: f64,
    pub alpha: f64,
    pub p: f64,
    pub diag_xi: Vec<f64>,
    pub weights: Arc<WsgdWeights>,
    pub time_independent: bool,
    toeplitz: Arc<ToeplitzMatrix>,
    h_pow: f64,
}

impl SystemOperator {
    pub fn new(
        c0: f64,
        h: f64,
        p: f64,
        diag_xi: Vec<f64>,
        weights: Arc<WsgdWeights>,
        time_independent: bool,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid("p", p, "skewness must lie in [0, 1]"));
        }
        if !(h > 0.0) {
            return Err(invalid("h", h, "must be positive"));
        }
        let n = diag_xi.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        for &x in &diag_xi {
            if !(x >= 0.0 && x.is_finite()) {
                return Err(Error::InvalidDiffusion {
                    x: f64::NAN,
                    t: f64::NAN,
                    value: x,
                });
            }
        }
        let toeplitz = Arc::new(wsgd_toeplitz(&weights, n, p)?);
        Ok(SystemOperator {
            c0,
            h,
            alpha: weights.alpha,
            p,
            h_pow: h.powf(weights.alpha),
            diag_xi,
            weights,
            time_independent,
            toeplitz,
        })
    }

    /// Same Toeplitz part with a new time coefficient and diffusion diagonal.
    pub fn with_step(&self, c0: f64, diag_xi: Vec<f64>) -> Result<Self> {
        if diag_xi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: diag_xi.len(),
            });
        }
        Ok(SystemOperator {
            c0,
            diag_xi,
            ..self.clone()
        })
    }

    pub fn dim(&self) -> usize {
        self.diag_xi.len()
    }

    pub fn h_pow_alpha(&self) -> f64 {
        self.h_pow
    }

    pub fn toeplitz(&self) -> &ToeplitzMatrix {
        &self.toeplitz
    }

    pub fn mean_xi(&self) -> f64 {
        self.diag_xi.iter().sum::<f64>() / self.dim() as f64
    }

    /// Whether all diagonal entries coincide (to a relative 1e-14).
    pub fn xi_is_uniform(&self) -> bool {
        let first = self.diag_xi[0];
        self.diag_xi
            .iter()
            .all(|x| (x - first).abs() <= 1e-14 * first.abs().max(1.0))
    }

    /// Entry `(i, j)` of M.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let t = self.toeplitz.entry(i, j);
        let d = if i == j { self.c0 } else { 0.0 };
        d - self.diag_xi[i] / self.h_pow * t
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// `y = M v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(v, &mut y)?;
        Ok(y)
    }

    pub fn apply_into(&self, v: &[f64], y: &mut [f64]) -> Result<()> {
        self.toeplitz.matvec_into(v, y)?;
        let inv_h = 1.0 / self.h_pow;
        for ((yi, &vi), &xi) in y.iter_mut().zip(v).zip(&self.diag_xi) {
            *yi = self.c0 * vi - xi * inv_h * *yi;
        }
        Ok(())
    }

    /// Whether M is diagonally dominant by rows.
    ///
    /// Up to 64 unknowns this is a direct row-sum check; beyond that the
    /// sufficient condition α ≥ α₀ with positive ξ is used.
    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.dim();
        if n <= 64 {
            return (0..n).all(|i| {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| self.entry(i, j).abs()).sum();
                self.entry(i, i).abs() >= off
            });
        }
        self.alpha >= w2_sign_change() && self.c0 >= 0.0 && self.diag_xi.iter().all(|&x| x > 0.0)
    }

    /// Scalars stored by the operator itself.
    pub fn stored_scalars(&self) -> usize {
        self.toeplitz.stored_scalars() + self.dim()
    }
}

impl LinearOperator for SystemOperator {
    fn dim(&self) -> usize {
        self.diag_xi.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y).expect("dimension checked by caller");
    }
}

pub fn is_diagonally_dominant(op: &SystemOperator) -> bool {
    op.is_diagonally_dominant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::wsgd_weights;

    fn op(alpha: f64, p: f64, n: usize, xi: f64) -> SystemOperator {
        let w = Arc::new(wsgd_weights(alpha, n + 1).unwrap());
        SystemOperator::new(3.0, 0.1, p, vec![xi; n], w, true).unwrap()
    }

    #[test]
    fn zero_diffusion_is_scaled_identity() {
        let m = op(1.5, 0.7, 9, 0.0);
        let v: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let y = m.apply(&v).unwrap();
        for (a, b) in y.iter().zip(&v) {
            assert!((a - 3.0 * b).abs() < 1e-13);
        }
    }

    #[test]
    fn half_skewness_is_symmetric() {
        let m = op(1.4, 0.5, 12, 2.0);
        let d = m.to_dense();
        for i in 0..12 {
            for j in 0..12 {
                assert!((d[i][j] - d[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dominance_cases() {
        assert!(op(1.9, 0.3, 31, 1.0).is_diagonally_dominant());
        assert!(op(2.0, 0.6, 31, 5.0).is_diagonally_dominant());
        // beyond the dense-check size the α ≥ α₀ criterion decides
        assert!(op(1.9, 0.3, 100, 1.0).is_diagonally_dominant());
        assert!(!op(1.2, 0.3, 100, 1.0).is_diagonally_dominant());
    }

    #[test]
    fn rejects_bad_skewness() {
        let w = Arc::new(wsgd_weights(1.5, 6).unwrap());
        assert!(SystemOperator::new(1.0, 0.1, 1.5, vec![1.0; 5], w, true).is_err());
    }
}
