use num_complex::Complex64;

use super::matrix::FftPair;
use super::system::SystemOperator;
use crate::error::{invalid, Error, Result};
use crate::krylov::Preconditioner;

/// Spectral values below this fraction of the largest are treated as zero.
const SINGULAR_RATIO: f64 = 1e-14;

/// The skew-circulant approximation
///
/// ```text
/// P = c₀ I - ξ̄/h^α [p sk(W) + (1 - p) sk(W)ᵀ]
/// ```
///
/// diagonalized as `P = Ω* F* diag(μ) F Ω` with `Ω = diag(e^{iπk/n})`.
/// `sk(W)` has first column `[w₁, w₂, …, w_{n-1}, -w₀]` and `ξ̄` is the
/// mean of the diffusion diagonal.
#[derive(Clone)]
pub struct SkewCirculantFactor {
    /// Eigenvalues μ_k of P.
    pub spectrum: Vec<Complex64>,
    /// Modulation entries e^{iπk/n}.
    pub omega: Vec<Complex64>,
    fft: FftPair,
}

impl std::fmt::Debug for SkewCirculantFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SkewCirculantFactor")
            .field("n", &self.spectrum.len())
            .finish()
    }
}

/// First column of `sk(W_α)` of order `n`: `[w₁, …, w_{n-1}, -w₀]`.
pub fn skew_first_column(w: &[f64], n: usize) -> Vec<f64> {
    let mut col: Vec<f64> = (1..n).map(|k| w.get(k).copied().unwrap_or(0.0)).collect();
    col.push(-w[0]);
    col
}

/// Dense skew-circulant matrix with first column `col`.
pub fn skew_circulant_dense(col: &[f64]) -> Vec<Vec<f64>> {
    let n = col.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i >= j { col[i - j] } else { -col[n + i - j] })
                .collect()
        })
        .collect()
}

impl SkewCirculantFactor {
    pub fn build(op: &SystemOperator) -> Result<Self> {
        let n = op.dim();
        if n < 2 {
            return Err(invalid("n", n as f64, "skew-circulant preconditioner needs N >= 3"));
        }
        let col = skew_first_column(&op.weights.w, n);
        Self::from_parts(&col, op.c0, op.mean_xi() / op.h_pow_alpha(), op.p)
    }

    /// `P = c0 I - scale [p S + (1 - p) Sᵀ]` with `S` skew-circulant of first
    /// column `col`.
    pub fn from_parts(col: &[f64], c0: f64, scale: f64, p: f64) -> Result<Self> {
        let n = col.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let omega: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let fft = FftPair::new(n);
        let mut lam: Vec<Complex64> = col.iter().zip(&omega).map(|(&c, &o)| o * c).collect();
        fft.forward(&mut lam);
        let spectrum: Vec<Complex64> = lam
            .iter()
            .map(|l| c0 - scale * (p * l + (1.0 - p) * l.conj()))
            .collect();
        let max = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (mode, z) in spectrum.iter().enumerate() {
            if z.norm() < SINGULAR_RATIO * max || max == 0.0 {
                return Err(Error::SingularPreconditioner {
                    mode,
                    magnitude: z.norm(),
                });
            }
        }
        Ok(SkewCirculantFactor {
            spectrum,
            omega,
            fft,
        })
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    fn transform(&self, v: &[f64], out: &mut [f64], invert: bool) {
        let mut buf: Vec<Complex64> = v.iter().zip(&self.omega).map(|(&x, &o)| o * x).collect();
        self.fft.forward(&mut buf);
        for (b, mu) in buf.iter_mut().zip(&self.spectrum) {
            if invert {
                *b /= mu;
            } else {
                *b *= mu;
            }
        }
        self.fft.inverse(&mut buf);
        for ((o, b), w) in out.iter_mut().zip(&buf).zip(&self.omega) {
            *o = (b * w.conj()).re;
        }
    }

    /// `y = P v`.
    pub fn apply_forward(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.transform(v, &mut out, false);
        out
    }

    /// `y = P⁻¹ v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        self.transform(v, &mut out, true);
        out
    }

    pub fn stored_scalars(&self) -> usize {
        4 * self.dim()
    }
}

impl Preconditioner for SkewCirculantFactor {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        self.transform(r, z, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_then_inverse_is_identity() {
        let col = [2.0, -0.3, 0.1, 0.05, -0.4];
        let f = SkewCirculantFactor::from_parts(&col, 5.0, 1.3, 0.7).unwrap();
        let v = [1.0, 2.0, -1.0, 0.5, 3.0];
        let back = f.solve(&f.apply_forward(&v));
        for (a, b) in back.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_reconstruction_matches_forward() {
        let col = [1.0, 0.2, -0.7, 0.3];
        let s = skew_circulant_dense(&col);
        let (c0, scale, p) = (3.0, 0.5, 0.25);
        let f = SkewCirculantFactor::from_parts(&col, c0, scale, p).unwrap();
        let v = [0.3, -1.0, 2.0, 0.7];
        let y = f.apply_forward(&v);
        for i in 0..4 {
            let mut e = c0 * v[i];
            for j in 0..4 {
                e -= scale * (p * s[i][j] + (1.0 - p) * s[j][i]) * v[j];
            }
            assert!((y[i] - e).abs() < 1e-12, "{} vs {e}", y[i]);
        }
    }

    #[test]
    fn singular_mode_is_reported() {
        // c0 I - S with S = I has a zero spectrum everywhere
        let col = [1.0, 0.0, 0.0];
        let err = SkewCirculantFactor::from_parts(&col, 1.0, 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::SingularPreconditioner { .. }));
    }
}
