use nalgebra::{DMatrix, DVector, LU, Dyn};

use super::system::SystemOperator;
use crate::error::{Error, Result};

/// Dense LU of the system matrix, the debugging path for small grids.
#[derive(Debug, Clone)]
pub struct DenseFactor {
    lu: LU<f64, Dyn, Dyn>,
}

impl DenseFactor {
    pub fn build(op: &SystemOperator) -> Result<Self> {
        let n = op.dim();
        let m = DMatrix::from_fn(n, n, |i, j| op.entry(i, j));
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::SingularPivot { row: 0 });
        }
        Ok(DenseFactor { lu })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = DVector::from_column_slice(b);
        self.lu
            .solve(&rhs)
            .map(|x| x.as_slice().to_vec())
            .ok_or(Error::SingularPivot { row: 0 })
    }
}
