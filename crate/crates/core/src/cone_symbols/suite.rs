//! Randomized residual suite for the symbol identities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::diffop::ConeDiffOp;
use super::random::random_pair;
use super::symbol::{adjoint_symbol, compose_symbols, mellin_symbols};
use super::symmetrizer::{compatibility_check, SampleLattice};

#[derive(Debug, Clone, Serialize)]
pub struct SymbolSuiteReport {
    pub seed: u64,
    pub cases: usize,
    pub taylor_order: usize,
    /// Max over cases and `l = 0..=order` of `|compose_symbols - sigma(A o B)|`.
    pub compose_residual: f64,
    pub adjoint_residual: f64,
    pub compatibility_residual: f64,
    /// Same adjoint comparison with the line reflected about `-2 delta` instead of `1 - 2 delta`.
    pub adjoint_negative_control: f64,
}

/// Runs `cases` random pairs through composition, adjoint and compatibility checks.
pub fn symbol_suite(seed: u64, cases: usize, taylor_order: usize) -> SymbolSuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compose: f64 = 0.0;
    let mut adjoint: f64 = 0.0;
    let mut compat: f64 = 0.0;
    let mut negative = f64::INFINITY;
    for _ in 0..cases {
        let (a, b) = random_pair(&mut rng, taylor_order);
        let sa = mellin_symbols(&a);
        let sb = mellin_symbols(&b);
        let direct = ConeDiffOp::from_operator(&a).compose(&ConeDiffOp::from_operator(&b));
        for ell in 0..=taylor_order {
            let s = compose_symbols(&sa, &sb, ell).expect("symbols up to the truncation order");
            compose = compose.max(s.distance(&direct.conormal(ell as u32)));
        }
        for op in [&a, &b] {
            let adj = ConeDiffOp::from_operator(op).adjoint(op.delta).conormal(0);
            let s0 = &mellin_symbols(op)[0];
            adjoint = adjoint.max(adjoint_symbol(s0, op.delta).distance(&adj));
            if op.a.first().is_some_and(|m| !m.is_zero()) {
                negative = negative.min(adjoint_symbol(s0, op.delta + 0.5).distance(&adj));
            }
            compat = compat.max(compatibility_check(op, &SampleLattice::for_operator(op, 4.0)));
        }
    }
    SymbolSuiteReport {
        seed,
        cases,
        taylor_order,
        compose_residual: compose,
        adjoint_residual: adjoint,
        compatibility_residual: compat,
        adjoint_negative_control: negative,
    }
}
