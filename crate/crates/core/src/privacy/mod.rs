//! DP-SGD mechanics and the Rényi-DP accountant.

mod accountant;
mod dpsgd;

pub use accountant::{
    calibrate_sigma, default_orders, epsilon_for, rdp_subsampled_gaussian, rdp_to_eps,
    rdp_to_eps_with, Conversion, PrivacyReport, RdpCurve, SIGMA_SEARCH_MAX, SIGMA_SEARCH_MIN,
};
pub use dpsgd::{
    clip_gradient, clip_in_place, dp_sgd_step, l2_norm, noisy_aggregate, poisson_sample, ClippedSum,
    DpConfig,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PrivacyError {
    #[error("gradient contains non-finite values")]
    NonFiniteGradient,
    #[error("clip norm must be positive and finite")]
    InvalidClipNorm,
    #[error("noisy aggregate of an empty batch")]
    EmptyBatch,
    #[error("gradient length {found} does not match {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("noise scale must be positive for accounting")]
    SigmaZero,
    #[error("invalid privacy parameter: {0}")]
    InvalidParameter(String),
    #[error("target epsilon {target} is unreachable with sigma up to {max_sigma}")]
    Unreachable { target: f64, max_sigma: f64 },
}
