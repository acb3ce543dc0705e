use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A length-`len` complex FFT pair with unnormalized forward transform.
#[derive(Clone)]
pub(crate) struct FftPair {
    pub len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the 1/len normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.len as f64;
        for z in buf.iter_mut() {
            *z *= s;
        }
    }
}

/// Dense `n × n` Toeplitz matrix `t[i][j] = t_{i-j}` stored by its first
/// column and first row, with the spectrum of its circulant embedding
/// precomputed for `O(n log n)` products.
#[derive(Clone)]
pub struct ToeplitzMatrix {
    first_col: Vec<f64>,
    first_row: Vec<f64>,
    spectrum: Vec<Complex64>,
    fft: FftPair,
}

impl fmt::Debug for ToeplitzMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ToeplitzMatrix")
            .field("n", &self.n())
            .field("first_col", &self.first_col)
            .field("first_row", &self.first_row)
            .finish()
    }
}

/// Smallest power of two that can hold the circulant embedding of an
/// `n × n` Toeplitz matrix (`≥ 2n - 1`).
pub fn embedding_size(n: usize) -> usize {
    (2 * n - 1).max(1).next_power_of_two()
}

impl ToeplitzMatrix {
    pub fn new(first_col: Vec<f64>, first_row: Vec<f64>) -> Result<Self> {
        let n = first_col.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if first_row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: first_row.len(),
            });
        }
        if first_col[0] != first_row[0] {
            return Err(Error::GridMismatch(
                "first column and first row disagree on the diagonal".into(),
            ));
        }
        let m = embedding_size(n);
        let fft = FftPair::new(m);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); m];
        for (k, &c) in first_col.iter().enumerate() {
            spectrum[k] = Complex64::new(c, 0.0);
        }
        for k in 1..n {
            spectrum[m - k] = Complex64::new(first_row[k], 0.0);
        }
        fft.forward(&mut spectrum);
        Ok(ToeplitzMatrix {
            first_col,
            first_row,
            spectrum,
            fft,
        })
    }

    /// Lower triangular Toeplitz matrix with first column `col`.
    pub fn lower_triangular(col: Vec<f64>) -> Result<Self> {
        let mut row = vec![0.0; col.len()];
        if let Some(d) = col.first() {
            row[0] = *d;
        }
        Self::new(col, row)
    }

    /// Upper triangular Toeplitz matrix with first row `row`.
    pub fn upper_triangular(row: Vec<f64>) -> Result<Self> {
        let mut col = vec![0.0; row.len()];
        if let Some(d) = row.first() {
            col[0] = *d;
        }
        Self::new(col, row)
    }

    pub fn n(&self) -> usize {
        self.first_col.len()
    }

    pub fn first_col(&self) -> &[f64] {
        &self.first_col
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    /// Entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.first_col[i - j]
        } else {
            self.first_row[j - i]
        }
    }

    /// `t_k` for `k = i - j` in `-(n-1)..=(n-1)`; zero outside.
    pub fn diagonal(&self, k: isize) -> f64 {
        let n = self.n() as isize;
        if k >= 0 && k < n {
            self.first_col[k as usize]
        } else if k < 0 && -k < n {
            self.first_row[(-k) as usize]
        } else {
            0.0
        }
    }

    pub fn transpose(&self) -> Result<Self> {
        Self::new(self.first_row.clone(), self.first_col.clone())
    }

    /// Scalars held by this representation: both generators plus the
    /// complex embedding spectrum.
    pub fn stored_scalars(&self) -> usize {
        2 * self.n() + 2 * self.spectrum.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// `y = T v` via the circulant embedding.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n()];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let n = self.n();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: out.len(),
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft.len];
        for (b, &x) in buf.iter_mut().zip(v) {
            *b = Complex64::new(x, 0.0);
        }
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.fft.inverse(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
        Ok(())
    }
}
