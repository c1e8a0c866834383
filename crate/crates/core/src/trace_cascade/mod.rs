//! Boundary hyperbolic systems for the asymptotic coefficients `gamma_pk u`.

pub mod apply;
pub mod cascade;
pub mod fit;
pub mod system;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::asymtype::Pair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CascadeError {
    #[error("trace {0} required but not provided")]
    MissingTrace(String),
    #[error("symbol of Taylor order {0} not available")]
    MissingSymbol(usize),
    #[error("trace {pair} depends on {needs}, which is not solved yet")]
    DependencyNotSolved { pair: String, needs: String },
    #[error("fit basis ill-conditioned (cond = {cond:e})")]
    IllConditionedBasis { cond: f64 },
    #[error("invalid fit window: {0}")]
    InvalidWindow(String),
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("Taylor recursion and symbol path disagree at {pair} (residual {residual:e})")]
    LeibnizMismatch { pair: String, residual: f64 },
    #[error("non-finite trace {pair} at t = {t}")]
    NonfiniteTrace { pair: String, t: f64 },
}

/// `gamma_pk` of a field on the time grid, layout `[(step * J + j) * N + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceField {
    pub pair: Pair,
    pub t: Vec<f64>,
    pub ny: usize,
    pub ncomp: usize,
    pub values: Vec<Complex64>,
}

impl TraceField {
    pub fn zeros(pair: Pair, t: Vec<f64>, ny: usize, ncomp: usize) -> Self {
        let len = t.len() * ny * ncomp;
        Self { pair, t, ny, ncomp, values: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn slice(&self, step: usize) -> &[Complex64] {
        let w = self.ny * self.ncomp;
        &self.values[step * w..(step + 1) * w]
    }

    pub fn slice_mut(&mut self, step: usize) -> &mut [Complex64] {
        let w = self.ny * self.ncomp;
        &mut self.values[step * w..(step + 1) * w]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Looks up a trace by pair (exponent tolerance).
pub fn find_trace<'a>(traces: &'a [TraceField], pair: &Pair) -> Option<&'a TraceField> {
    traces.iter().find(|f| f.pair.approx_eq(pair))
}

/// Relative `(t, y)`-L2 distance of two traces of one pair.
#[derive(Debug, Clone, Serialize)]
pub struct TraceComparison {
    pub pair: String,
    pub rel_err_l2: f64,
    pub abs_err_l2: f64,
    pub reference_l2: f64,
    pub samples: usize,
}

/// Compares `fitted` against `reference` at every common time (exact match of time stamps).
pub fn compare_traces(fitted: &[TraceField], reference: &[TraceField]) -> Result<Vec<TraceComparison>, CascadeError> {
    let mut out = Vec::new();
    for r in reference {
        let f = find_trace(fitted, &r.pair).ok_or_else(|| CascadeError::MissingTrace(r.pair.label()))?;
        if f.ny != r.ny || f.ncomp != r.ncomp {
            return Err(CascadeError::ShapeMismatch { expected: r.ny * r.ncomp, got: f.ny * f.ncomp });
        }
        let (mut num, mut den, mut samples) = (0.0, 0.0, 0usize);
        for (sf, tf) in f.t.iter().enumerate() {
            if let Some(sr) = r.t.iter().position(|t| t == tf) {
                for (a, b) in f.slice(sf).iter().zip(r.slice(sr)) {
                    num += (a - b).norm_sqr();
                    den += b.norm_sqr();
                }
                samples += 1;
            }
        }
        let abs = num.sqrt();
        let refn = den.sqrt();
        out.push(TraceComparison {
            pair: r.pair.label(),
            rel_err_l2: if refn > 0.0 { abs / refn } else { abs },
            abs_err_l2: abs,
            reference_l2: refn,
            samples,
        });
    }
    Ok(out)
}

pub use apply::{apply_symbols_to_traces, couplings, leibniz_taylor_rhs, symbol_at_order, Coupling};
pub use cascade::{solve_cascade, CascadeOptions, CascadeResult, NoTraceData, TraceData};
pub use fit::{fit_traces, FitOptions, FitResult};
pub use system::{assemble_system, BoundarySystem};
