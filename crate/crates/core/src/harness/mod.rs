//! Scenario-driven runs, manufactured data, reports and the command-line front end.

pub mod cli;
pub mod data;
pub mod exact;
pub mod output;
pub mod runs;
pub mod scenario;

use serde::Serialize;
use thiserror::Error;

pub use data::{DataConfig, DataTerm, ScenarioForcing, ScenarioTraceData};
pub use exact::{manufactured, ExactFamily, Manufactured};
pub use runs::{
    convergence, run_solve, run_traces, symbol_check, verify_energy, verify_traces, ConvergenceLevel,
    ConvergenceReport, EnergyReport, Resolution, SolveRun, SymbolCheckReport, TraceRecord, TraceReport,
};
pub use scenario::{AsymptoticsSpec, ChecksConfig, FitConfig, GridConfig, Prepared, Scenario, BUILTIN_NAMES};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("acceptance check failed: {0}")]
    AcceptanceFailure(String),
    #[error("no closed-form solution: {0}")]
    UnsupportedExactFamily(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Failure record written to stderr by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub message: String,
    pub exit_code: i32,
}

impl HarnessError {
    /// 2 config, 3 validation, 4 runtime, 5 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigParse(_) => 2,
            HarnessError::Validation(_) | HarnessError::UnsupportedExactFamily(_) => 3,
            HarnessError::Runtime(_) | HarnessError::Io(_) => 4,
            HarnessError::AcceptanceFailure(_) => 5,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::ConfigParse(_) => "ConfigParse",
            HarnessError::Validation(_) => "Validation",
            HarnessError::Runtime(_) => "Runtime",
            HarnessError::AcceptanceFailure(_) => "AcceptanceFailure",
            HarnessError::UnsupportedExactFamily(_) => "UnsupportedExactFamily",
            HarnessError::Io(_) => "Io",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() }
    }
}

impl From<crate::interior::InteriorError> for HarnessError {
    fn from(e: crate::interior::InteriorError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}

impl From<crate::trace_cascade::CascadeError> for HarnessError {
    fn from(e: crate::trace_cascade::CascadeError) -> Self {
        HarnessError::Runtime(e.to_string())
    }
}
