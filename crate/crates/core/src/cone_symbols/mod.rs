//! Exact symbol calculus for first-order cone-degenerate operators.

pub mod coef;
pub mod diffop;
pub mod matrix;
pub mod operator;
pub mod random;
pub mod suite;
pub mod symbol;
pub mod symmetrizer;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("Taylor order {j} exceeds the truncation order {order}")]
    TruncationExceeded { j: usize, order: usize },
    #[error("symbol list has only {0} entries")]
    MissingSymbol(usize),
    #[error("eigenvalues collide (gap {gap:e}) at {at}")]
    NotStrictlyHyperbolic { gap: f64, at: String },
    #[error("non-real eigenvalue {re}+{im}i at {at}")]
    NonRealEigenvalue { re: f64, im: f64, at: String },
    #[error("eigen-decomposition failed at {0}")]
    EigDecompositionFailure(String),
    #[error("coefficient parse error: {0}")]
    CoefParse(String),
    #[error("coefficient matrix is not square")]
    NotSquare,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
}

pub use coef::Coef;
pub use diffop::ConeDiffOp;
pub use matrix::CoefMatrix;
pub use operator::{ConeOperator, Hyperbolicity};
pub use suite::{symbol_suite, SymbolSuiteReport};
pub use symbol::{adjoint_symbol, compose_symbols, mellin_symbol, mellin_symbols, ConormalSymbol, SymbolDump};
pub use symmetrizer::{
    build_symmetrizer, check_symmetrizer, compatibility_check, compressed_symbol, CompressedSymbol, SampleLattice,
    SymbolicSymmetrizer, SymmetrizerReport,
};
