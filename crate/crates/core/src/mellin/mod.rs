//! Mellin transform on logarithmic grids, weighted cone norms and potential operators.

pub mod cutoff;
pub mod grid;
pub mod norms;
pub mod potential;
pub mod special;
pub mod transform;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MellinError {
    #[error("non-finite input sample")]
    NonfiniteInput,
    #[error("negative Sobolev order {0} is not supported")]
    NegativeOrder(f64),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub use cutoff::{phi, phi0, phi1, phi_prime, psi};
pub use grid::{LogGrid, MellinQuadrature, WeightLine, WeightLineSamples};
pub use norms::{h_norm, k_norm, k_norm_l2, log_sobolev_norm, weighted_norm_direct, FieldView, KNormReport, NormReport};
pub use potential::{asymptotic_sample, flatness_check, potential_op, FlatnessReport, PotentialField};
pub use transform::{
    inverse_mellin, log_identity_check, mellin_derivative_identity_check, mellin_transform,
    mellin_transform_real, sample_weight_line, shift_identity_check, MellinValue,
};
