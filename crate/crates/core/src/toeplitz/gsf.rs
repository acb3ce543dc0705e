use super::matrix::ToeplitzMatrix;
use super::skew::SkewCirculantFactor;
use super::system::SystemOperator;
use crate::error::{Error, Result};
use crate::krylov::{bicgstab, NoPreconditioner, Preconditioner, SolveConfig};

/// Tolerance for the two column solves that seed the inverse.
const COLUMN_RTOL: f64 = 1e-14;
/// Columns whose solves stall above this residual are rejected.
const COLUMN_ACCEPT: f64 = 1e-11;

/// Inverse of a Toeplitz system matrix from its first and last columns:
///
/// ```text
/// M⁻¹ = (1/x₀) [L(x) L(Jy)ᵀ - L(Zy) L(ZJx)ᵀ]
/// ```
///
/// with `x = M⁻¹e₁`, `y = M⁻¹eₙ`, `L(v)` lower triangular Toeplitz with
/// first column `v`, `J` the reversal and `Z` the down shift.
#[derive(Debug, Clone)]
pub struct GsfInverse {
    pub first_col: Vec<f64>,
    pub last_col: Vec<f64>,
    /// Krylov iterations spent on the two column solves.
    pub setup_iterations: f64,
    l_x: ToeplitzMatrix,
    u_jy: ToeplitzMatrix,
    l_zy: ToeplitzMatrix,
    u_zjx: ToeplitzMatrix,
    x0: f64,
}

impl GsfInverse {
    /// Builds the inverse, solving for the two columns with BiCGSTAB
    /// preconditioned by the skew-circulant approximation.
    pub fn build(op: &SystemOperator) -> Result<Self> {
        if !op.time_independent {
            return Err(Error::GsfNotApplicable("diffusion coefficient depends on time"));
        }
        if !op.xi_is_uniform() {
            return Err(Error::GsfNotApplicable("diffusion coefficient varies in space"));
        }
        let n = op.dim();
        let cfg = SolveConfig {
            rtol: COLUMN_RTOL,
            max_iter: 20 * n.max(50),
            ..SolveConfig::default()
        };
        let skew = SkewCirculantFactor::build(op).ok();
        let pinv: &dyn Preconditioner = match &skew {
            Some(s) => s,
            None => &NoPreconditioner,
        };
        let mut iters = 0.0;
        let mut column = |k: usize| -> Result<Vec<f64>> {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let res = bicgstab(op, pinv, &e, None, &cfg)?;
            iters += res.iterations;
            if !res.converged && res.final_relative_residual > COLUMN_ACCEPT {
                return Err(Error::LinearSolveFailed {
                    level: 0,
                    reason: format!(
                        "GSF column {k} stalled at relative residual {:e}",
                        res.final_relative_residual
                    ),
                });
            }
            Ok(res.x)
        };
        let x = column(0)?;
        let y = column(n - 1)?;
        let mut g = Self::from_columns(x, y)?;
        g.setup_iterations = iters;
        Ok(g)
    }

    /// Assembles the inverse from known first and last columns.
    pub fn from_columns(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        let x0 = x[0];
        let scale = x.iter().chain(&y).fold(0.0f64, |m, v| m.max(v.abs()));
        if !(x0.abs() > 1e-14 * scale) {
            return Err(Error::GsfNotApplicable("leading entry of the first inverse column vanishes"));
        }
        let jy: Vec<f64> = y.iter().rev().copied().collect();
        let mut zy = vec![0.0; n];
        zy[1..].copy_from_slice(&y[..n - 1]);
        let mut zjx = vec![0.0; n];
        for i in 1..n {
            zjx[i] = x[n - i];
        }
        Ok(GsfInverse {
            l_x: ToeplitzMatrix::lower_triangular(x.clone())?,
            u_jy: ToeplitzMatrix::upper_triangular(jy)?,
            l_zy: ToeplitzMatrix::lower_triangular(zy)?,
            u_zjx: ToeplitzMatrix::upper_triangular(zjx)?,
            first_col: x,
            last_col: y,
            setup_iterations: 0.0,
            x0,
        })
    }

    pub fn dim(&self) -> usize {
        self.first_col.len()
    }

    /// `M⁻¹ v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let a = self.l_x.matvec(&self.u_jy.matvec(v)?)?;
        let b = self.l_zy.matvec(&self.u_zjx.matvec(v)?)?;
        Ok(a.iter().zip(&b).map(|(p, q)| (p - q) / self.x0).collect())
    }

    pub fn stored_scalars(&self) -> usize {
        2 * self.dim()
            + self.l_x.stored_scalars()
            + self.u_jy.stored_scalars()
            + self.l_zy.stored_scalars()
            + self.u_zjx.stored_scalars()
    }
}

impl Preconditioner for GsfInverse {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        let y = self.apply(r).expect("dimension checked by caller");
        z.copy_from_slice(&y);
    }
}
