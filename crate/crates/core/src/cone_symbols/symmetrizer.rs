//! Compressed principal symbol, the compatibility check and symbolic symmetrizers.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::operator::ConeOperator;
use super::symbol::mellin_symbol;
use super::SymbolError;
use crate::linalg::{self, EigError};

/// Sample points `(t, x, y, direction)` for lattice checks.
#[derive(Debug, Clone, Serialize)]
pub struct SampleLattice {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Unit covectors `(xi~, eta)`.
    pub dirs: Vec<(f64, f64)>,
}

impl SampleLattice {
    pub fn for_operator(op: &ConeOperator, x_max: f64) -> Self {
        let tf = op.t_final;
        let y: Vec<f64> = if op.d == 1 {
            (0..8).map(|j| 2.0 * std::f64::consts::PI * j as f64 / 8.0).collect()
        } else {
            vec![0.0]
        };
        let dirs: Vec<(f64, f64)> = if op.d == 1 {
            (0..16)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / 16.0;
                    (a.cos(), a.sin())
                })
                .collect()
        } else {
            vec![(1.0, 0.0), (-1.0, 0.0)]
        };
        Self {
            t: vec![0.0, 0.5 * tf, tf],
            x: vec![0.0, 0.1, 0.25, 0.5, 1.0, x_max],
            y,
            dirs,
        }
    }

    fn points(&self) -> impl Iterator<Item = (f64, f64, f64, f64, f64)> + '_ {
        self.t.iter().flat_map(move |&t| {
            self.x.iter().flat_map(move |&x| {
                self.y
                    .iter()
                    .flat_map(move |&y| self.dirs.iter().map(move |&(xi, eta)| (t, x, y, xi, eta)))
            })
        })
    }
}

/// `sigma~(t, x, y, xi~, eta) = A xi~ + A_1 eta` (real convention; multiply by `i` for `d -> i xi`).
#[derive(Debug, Clone)]
pub struct CompressedSymbol {
    op: ConeOperator,
}

impl CompressedSymbol {
    pub fn new(op: &ConeOperator) -> Self {
        Self { op: op.clone() }
    }

    pub fn eval(&self, t: f64, x: f64, y: f64, xi: f64, eta: f64) -> DMatrix<Complex64> {
        let mut m = self.op.eval_a(t, x, y) * Complex64::new(xi, 0.0);
        if self.op.d == 1 {
            m += self.op.eval_a1(t, x, y) * Complex64::new(eta, 0.0);
        }
        m
    }
}

pub fn compressed_symbol(op: &ConeOperator) -> CompressedSymbol {
    CompressedSymbol::new(op)
}

/// Max residual of `i sigma~(t, 0, y, xi~, eta) = sum_{a+b=1} C_ab (i tau)^a (i eta)^b` at `tau = -xi~`.
pub fn compatibility_check(op: &ConeOperator, lattice: &SampleLattice) -> f64 {
    let cs = compressed_symbol(op);
    let s0 = mellin_symbol(op, 0).expect("order 0 always present");
    let ii = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for (t, _x, y, xi, eta) in lattice.points() {
        let lhs = cs.eval(t, 0.0, y, xi, eta) * ii;
        let tau = -xi;
        let mut rhs = DMatrix::zeros(op.n, op.n);
        for (&(a, b), c) in &s0.terms {
            if a + b == 1 {
                rhs += c.eval(t, y) * ((ii * tau).powu(a) * (ii * eta).powu(b));
            }
        }
        let r = (lhs - rhs).iter().map(|v| v.norm()).fold(0.0, f64::max);
        worst = worst.max(r);
    }
    worst
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Eigen,
}

/// Hermitian positive `b(t, x, y, xi~, eta)` with `b sigma~` Hermitian.
#[derive(Debug, Clone)]
pub struct SymbolicSymmetrizer {
    kind: Kind,
    symbol: CompressedSymbol,
}

pub const COLLISION_TOL: f64 = 1e-8;

fn map_eig(e: EigError, at: (f64, f64, f64, f64, f64)) -> SymbolError {
    let where_ = format!("t={} x={} y={} xi={} eta={}", at.0, at.1, at.2, at.3, at.4);
    match e {
        EigError::NonReal { re, im } => SymbolError::NonRealEigenvalue { re, im, at: where_ },
        EigError::Collision { gap } => SymbolError::NotStrictlyHyperbolic { gap, at: where_ },
        EigError::Failure => SymbolError::EigDecompositionFailure(where_),
    }
}

impl SymbolicSymmetrizer {
    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    pub fn eval(&self, t: f64, x: f64, y: f64, xi: f64, eta: f64) -> Result<DMatrix<Complex64>, SymbolError> {
        let m = self.symbol.eval(t, x, y, xi, eta);
        let n = m.nrows();
        match self.kind {
            Kind::Identity => Ok(DMatrix::identity(n, n)),
            Kind::Eigen => {
                let (_, r) = linalg::strict_real_eigen(&m, COLLISION_TOL).map_err(|e| map_eig(e, (t, x, y, xi, eta)))?;
                let rr = &r * r.adjoint();
                let inv = rr.try_inverse().ok_or_else(|| {
                    SymbolError::EigDecompositionFailure(format!("singular eigenvector matrix at t={t} x={x} y={y}"))
                })?;
                Ok((&inv + inv.adjoint()) * Complex64::new(0.5, 0.0))
            }
        }
    }
}

/// `b = I` for symmetric operators, `b = (R R^*)^{-1}` for strictly hyperbolic ones.
pub fn build_symmetrizer(op: &ConeOperator, lattice: &SampleLattice) -> Result<SymbolicSymmetrizer, SymbolError> {
    let symbol = compressed_symbol(op);
    if op.is_symmetric() {
        return Ok(SymbolicSymmetrizer { kind: Kind::Identity, symbol });
    }
    for p in lattice.points() {
        let m = symbol.eval(p.0, p.1, p.2, p.3, p.4);
        linalg::strict_real_eigen(&m, COLLISION_TOL).map_err(|e| map_eig(e, p))?;
    }
    Ok(SymbolicSymmetrizer { kind: Kind::Eigen, symbol })
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizerReport {
    pub c_min: f64,
    pub max_skew_residual: f64,
    /// `b(t, 0, y, 0, eta)` applied to the boundary family `A_1(t, 0, y) eta`.
    pub boundary_skew_residual: f64,
    /// Largest finite-difference slope of `b` across the lattice.
    pub continuity: f64,
    pub samples: usize,
}

/// Reports `min eig b` and `max ||b (i sigma~) + (b (i sigma~))^*||` over the lattice.
pub fn check_symmetrizer(
    b: &SymbolicSymmetrizer,
    op: &ConeOperator,
    lattice: &SampleLattice,
) -> Result<SymmetrizerReport, SymbolError> {
    let cs = compressed_symbol(op);
    let ii = Complex64::new(0.0, 1.0);
    let mut c_min = f64::INFINITY;
    let mut skew: f64 = 0.0;
    let mut cont: f64 = 0.0;
    let mut samples = 0;
    let h = 1e-6;
    for (t, x, y, xi, eta) in lattice.points() {
        let bm = b.eval(t, x, y, xi, eta)?;
        let s = cs.eval(t, x, y, xi, eta) * ii;
        let bs = &bm * &s;
        skew = skew.max((&bs + bs.adjoint()).norm());
        let ev = linalg::hermitian_eigen(&bm).0;
        c_min = c_min.min(ev[0]);
        let ang = eta.atan2(xi) + h;
        let bp = b.eval(t, x, y, ang.cos(), ang.sin())?;
        cont = cont.max((&bp - &bm).norm() / h);
        let bx = b.eval(t, x + h, y, xi, eta)?;
        cont = cont.max((&bx - &bm).norm() / h);
        samples += 1;
    }
    let mut bskew: f64 = 0.0;
    if op.d == 1 {
        for &t in &lattice.t {
            for &y in &lattice.y {
                for eta in [1.0, -1.0] {
                    let bm = b.eval(t, 0.0, y, 0.0, eta)?;
                    let s = op.eval_a1(t, 0.0, y) * (ii * eta);
                    let bs = &bm * &s;
                    bskew = bskew.max((&bs + bs.adjoint()).norm());
                }
            }
        }
    }
    Ok(SymmetrizerReport { c_min, max_skew_residual: skew, boundary_skew_residual: bskew, continuity: cont, samples })
}
