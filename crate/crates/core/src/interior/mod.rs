//! Method-of-lines solver for the degenerate Cauchy problem on `[0, X] x torus`.

pub mod characteristics;
pub mod grid;
pub mod rhs;
pub mod solve;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteriorError {
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("time step {dt} exceeds the CFL bound {admissible}")]
    CflViolation { dt: f64, admissible: f64 },
    #[error("non-finite state at t = {t} (step {step})")]
    NonfiniteState { t: f64, step: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("eigen-decomposition failed: {0}")]
    EigDecompositionFailure(String),
}

pub use characteristics::{trace_characteristics, CharacteristicsReport, Curve};
pub use grid::{Grading, GridField, SpaceGrid};
pub use rhs::{semidiscrete_rhs, tangential_rhs, Forcing, NoForcing, NodeCoefs, RowCoefs};
pub use solve::{energy_verdict, solve, solve_boundary_row, step, CoefficientCache, EnergyLog, EnergyVerdict, Solution, SolverConfig};
