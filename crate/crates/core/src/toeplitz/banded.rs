use super::system::SystemOperator;
use crate::error::{invalid, Error, Result};
use crate::krylov::Preconditioner;

/// Pivots smaller than this fraction of the largest matrix entry are
/// treated as zero.
const PIVOT_RATIO: f64 = 1e-14;

/// LU factorization with partial pivoting of a general band matrix with
/// `kl` sub- and `ku` superdiagonals.
///
/// Row `i` keeps columns `i - kl ..= i + ku + kl`; the extra `kl` columns
/// hold fill-in from row swaps.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<f64>,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Factors the `n × n` matrix whose entries inside the band are given
    /// by `entry(i, j)`.
    pub fn factor(n: usize, kl: usize, ku: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            ab: vec![0.0; n * width],
            lower: vec![0.0; n * kl],
            pivots: vec![0; n],
        };
        let mut scale = 0.0f64;
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                let v = entry(i, j);
                scale = scale.max(v.abs());
                let k = lu.idx(i, j);
                lu.ab[k] = v;
            }
        }
        let tiny = PIVOT_RATIO * scale;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut piv = k;
            let mut best = lu.ab[lu.idx(k, k)].abs();
            for r in k + 1..=last_row {
                let v = lu.ab[lu.idx(r, k)].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if !(best > tiny) {
                return Err(Error::SingularPivot { row: k });
            }
            lu.pivots[k] = piv;
            let last_col = (k + ku + kl).min(n - 1);
            if piv != k {
                for j in k..=last_col {
                    let (a, b) = (lu.idx(k, j), lu.idx(piv, j));
                    lu.ab.swap(a, b);
                }
            }
            let d = lu.ab[lu.idx(k, k)];
            for r in k + 1..=last_row {
                let ir = lu.idx(r, k);
                let m = lu.ab[ir] / d;
                lu.ab[ir] = 0.0;
                lu.lower[k * kl + (r - k - 1)] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let (src, dst) = (lu.idx(k, j), lu.idx(r, j));
                        lu.ab[dst] -= m * lu.ab[src];
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, kl) = (self.n, self.kl);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            let last_row = (k + kl).min(n - 1);
            for r in k + 1..=last_row {
                x[r] -= self.lower[k * kl + (r - k - 1)] * xk;
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + self.ku + kl).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=last_col {
                s -= self.ab[self.idx(i, j)] * x[j];
            }
            x[i] = s / self.ab[self.idx(i, i)];
        }
    }

    pub fn stored_scalars(&self) -> usize {
        self.ab.len() + self.lower.len() + self.pivots.len()
    }
}

/// Banded preconditioner: LU of `c₀I - K/h^α [p W_{α,ℓ} + (1-p) W_{α,ℓ}ᵀ]`,
/// where `W_{α,ℓ}` keeps the diagonals `|i - j| ≤ ℓ` of the combined
/// Toeplitz matrix and `K` is the full diffusion diagonal.
#[derive(Debug, Clone)]
pub struct BandedFactor {
    pub bandwidth: usize,
    lu: BandLu,
}

impl BandedFactor {
    pub fn build(op: &SystemOperator, bandwidth: usize) -> Result<Self> {
        let n = op.dim();
        if bandwidth == 0 || bandwidth + 1 > n.max(2) {
            return Err(invalid(
                "bandwidth",
                bandwidth as f64,
                "need 1 <= bandwidth <= N - 2",
            ));
        }
        let lu = BandLu::factor(n, bandwidth, bandwidth, |i, j| op.entry(i, j))?;
        Ok(BandedFactor { bandwidth, lu })
    }

    pub fn dim(&self) -> usize {
        self.lu.dim()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.lu.solve_in_place(&mut x);
        x
    }

    pub fn stored_scalars(&self) -> usize {
        self.lu.stored_scalars()
    }
}

impl Preconditioner for BandedFactor {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.lu.solve_in_place(z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_needing_pivots() {
        // zero leading pivot forces a row swap
        let a = [[0.0, 2.0, 0.0], [1.0, 1.0, 3.0], [0.0, 4.0, 1.0]];
        let lu = BandLu::factor(3, 1, 1, |i, j| a[i][j]).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i][j] * x_true[j]).sum()).collect();
        lu.solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let err = BandLu::factor(3, 1, 1, |i, j| if i == 2 || j == 2 { 0.0 } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::SingularPivot { .. }));
    }
}
