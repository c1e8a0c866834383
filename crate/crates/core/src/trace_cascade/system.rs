//! Boundary system `d_t g + A_1(t,0,y) d_y g + (-p A(t,0,y) + B(t,0,y)) g = gamma_pk f + R_pk`.

use num_complex::Complex64;

use super::apply::{couplings, Coupling};
use super::CascadeError;
use crate::asymtype::{AsymptoticType, Pair};
use crate::cone_symbols::ConeOperator;
use crate::interior::RowCoefs;

/// Left-hand operator data and the couplings forming `R_pk`.
#[derive(Debug, Clone)]
pub struct BoundarySystem {
    pub pair: Pair,
    pub n: usize,
    /// Off-diagonal terms; `R_pk = -sum symbol(source.p) gamma_source u`.
    pub couplings: Vec<Coupling>,
}

impl BoundarySystem {
    /// `A_1(t, 0, y)` and the zeroth-order part `B - p A` (exactly `B` when `p = 0`).
    pub fn row_coefs(&self, op: &ConeOperator, t: f64, y: &[f64]) -> RowCoefs {
        let mut rc = RowCoefs::sample(op, t, 0.0, y);
        let p = self.pair.p;
        if p != Complex64::new(0.0, 0.0) {
            let n = self.n;
            for (k, &yy) in y.iter().enumerate() {
                let a = op.eval_a(t, 0.0, yy);
                for r in 0..n {
                    for c in 0..n {
                        rc.b[k * n * n + r * n + c] -= p * a[(r, c)];
                    }
                }
            }
        }
        rc
    }

    pub fn dependencies(&self) -> Vec<Pair> {
        self.couplings.iter().map(|c| c.source).collect()
    }
}

/// Splits the sum for `pair` into the diagonal operator and the couplings `R_pk`;
/// every coupling source must already be in `solved`.
pub fn assemble_system(
    op: &ConeOperator,
    ptype: &AsymptoticType,
    pair: &Pair,
    solved: &[Pair],
) -> Result<BoundarySystem, CascadeError> {
    let all = couplings(op, ptype, pair)?;
    let off: Vec<Coupling> = all.into_iter().filter(|c| !c.is_diagonal()).collect();
    for c in &off {
        if !solved.iter().any(|s| s.approx_eq(&c.source)) {
            return Err(CascadeError::DependencyNotSolved { pair: pair.label(), needs: c.source.label() });
        }
    }
    Ok(BoundarySystem { pair: *pair, n: op.n, couplings: off })
}
