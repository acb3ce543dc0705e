//! Toeplitz structure of the WSGD system matrices: FFT products through
//! circulant embedding, the skew-circulant and banded preconditioners, and
//! the Gohberg–Semencul inverse for constant coefficients.

mod banded;
mod dense;
mod gsf;
mod matrix;
mod skew;
mod system;

pub use banded::{BandLu, BandedFactor};
pub use dense::DenseFactor;
pub use gsf::GsfInverse;
pub use matrix::{embedding_size, ToeplitzMatrix};
pub use skew::{skew_circulant_dense, skew_first_column, SkewCirculantFactor};
pub use system::{is_diagonally_dominant, wsgd_toeplitz, SystemOperator};
