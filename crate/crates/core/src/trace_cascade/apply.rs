//! `gamma_pk(A u) = sum_j sum_{l - r = k} (1/r!) d_z^r sigma^{-j}(p + j) gamma_{p+j, l} u`.

use num_complex::Complex64;

use super::CascadeError;
use crate::asymtype::{exponents_equal, AsymptoticType, Pair, EXPONENT_TOL};
use crate::cone_symbols::{ConeOperator, ConormalSymbol};
use crate::spectral::PeriodicGrid;

/// `sigma^{-j}(z) = -A^(j) z + A_1^(j) d_y + B^(j)`; zero past the stored coefficients.
///
/// Fails only when the operator declares a truncation order below `j`.
pub fn symbol_at_order(op: &ConeOperator, j: usize) -> Result<ConormalSymbol, CascadeError> {
    if let Some(m) = op.taylor_order {
        if j > m {
            return Err(CascadeError::MissingSymbol(j));
        }
    }
    let mut s = ConormalSymbol::zero(op.n, j as u32);
    s.add_term(1, 0, op.a_coef(j).scale(Complex64::new(-1.0, 0.0)));
    s.add_term(0, 1, op.a1_coef(j));
    s.add_term(0, 0, op.b_coef(j));
    Ok(s)
}

/// One term of the double sum: `symbol(z = source.p)` applied to `gamma_source u`.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub source: Pair,
    pub j: usize,
    pub r: u32,
    /// `(1/r!) d_z^r sigma^{-j}`.
    pub symbol: ConormalSymbol,
}

impl Coupling {
    pub fn is_diagonal(&self) -> bool {
        self.j == 0 && self.r == 0
    }
}

/// Non-vanishing terms of the sum for `target` over the pairs of `ptype`.
///
/// Symbols have `z`-degree one, so only `r` in `{0, 1}` can contribute.
pub fn couplings(op: &ConeOperator, ptype: &AsymptoticType, target: &Pair) -> Result<Vec<Coupling>, CascadeError> {
    let mut out = Vec::new();
    for e in ptype.entries() {
        let shift = e.p - target.p;
        let j = shift.re.round();
        if j < 0.0 || !exponents_equal(shift, Complex64::new(j, 0.0)) {
            continue;
        }
        let j = j as usize;
        for r in 0..=1u32 {
            let l = target.k + r;
            if l >= e.mult {
                continue;
            }
            let sym = symbol_at_order(op, j)?.dz_scaled(r);
            if sym.is_zero() {
                continue;
            }
            out.push(Coupling { source: Pair::new(e.p, l), j, r, symbol: sym });
        }
    }
    Ok(out)
}

fn lookup<'a>(traces: &'a [(Pair, &'a [Complex64])], pair: &Pair) -> Option<&'a [Complex64]> {
    traces.iter().find(|(p, _)| p.approx_eq(pair)).map(|(_, v)| *v)
}

/// Evaluates the full sum at time `t`; traces use layout `[j * N + n]`.
pub fn apply_symbols_to_traces(
    op: &ConeOperator,
    ptype: &AsymptoticType,
    traces: &[(Pair, &[Complex64])],
    target: &Pair,
    t: f64,
    grid: &PeriodicGrid,
) -> Result<Vec<Complex64>, CascadeError> {
    let len = grid.len() * op.n;
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for c in couplings(op, ptype, target)? {
        let w = lookup(traces, &c.source).ok_or_else(|| CascadeError::MissingTrace(c.source.label()))?;
        if w.len() != len {
            return Err(CascadeError::ShapeMismatch { expected: len, got: w.len() });
        }
        for (o, v) in out.iter_mut().zip(c.symbol.apply_on_grid(c.source.p, t, w, grid)) {
            *o += v;
        }
    }
    Ok(out)
}

/// `-sum_{j >= 1} ((l - j) A^(j) + A_1^(j) d_y + B^(j)) u_{l-j}` from `l`-fold `x`-differentiation
/// of the equation at `x = 0`, for Taylor pairs `(-l, 0)`.
///
/// `lower[i]` holds `gamma_{-i, 0} u` (layout `[j * N + n]`) for `i < l`.
pub fn leibniz_taylor_rhs(
    op: &ConeOperator,
    l: usize,
    lower: &[Option<&[Complex64]>],
    t: f64,
    grid: &PeriodicGrid,
) -> Vec<Complex64> {
    let n = op.n;
    let ny = grid.len();
    let y = grid.nodes();
    let mut out = vec![Complex64::new(0.0, 0.0); ny * n];
    for j in 1..=l {
        let Some(w) = lower.get(l - j).copied().flatten() else { continue };
        let a = op.a_coef(j);
        let a1 = op.a1_coef(j);
        let b = op.b_coef(j);
        let mut dw = vec![Complex64::new(0.0, 0.0); ny * n];
        for c in 0..n {
            let row: Vec<Complex64> = (0..ny).map(|k| w[k * n + c]).collect();
            let d = grid.derivative(&row);
            for k in 0..ny {
                dw[k * n + c] = d[k];
            }
        }
        let lj = (l - j) as f64;
        for (k, &yy) in y.iter().enumerate() {
            let (am, a1m, bm) = (a.eval(t, yy), a1.eval(t, yy), b.eval(t, yy));
            for r in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in 0..n {
                    acc += (am[(r, s)] * lj + bm[(r, s)]) * w[k * n + s] + a1m[(r, s)] * dw[k * n + s];
                }
                out[k * n + r] -= acc;
            }
        }
    }
    out
}

/// Whether every stored exponent is a non-positive integer with multiplicity one.
pub fn is_taylor_type(ptype: &AsymptoticType) -> bool {
    ptype.entries().iter().all(|e| {
        e.mult == 1 && e.p.im.abs() <= EXPONENT_TOL && e.p.re <= EXPONENT_TOL && (e.p.re - e.p.re.round()).abs() <= EXPONENT_TOL
    })
}
