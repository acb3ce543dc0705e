//! Closed-form discretization coefficients: WSGD spatial weights,
//! generalized L1 temporal coefficients, the weighting λ(t), and the
//! sum-of-exponentials compression of the temporal kernel.

mod l1;
mod soe;
mod weighting;
mod wsgd;

pub use l1::{l1_a, l1_b, l1_coefficients, L1Coefficients};
pub use soe::{local_weight, log_samples, soe_build, SoeApproximation, CERTIFY_SAMPLES};
pub use weighting::WeightingFunction;
pub use wsgd::{
    grunwald_coefficients, w2_sign_change, w2_sign_change_with, w2_value, w2_value_with,
    wsgd_weights, wsgd_weights_with, KappaForm, WsgdWeights,
};
