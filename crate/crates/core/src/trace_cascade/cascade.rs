//! Sequential solution of the boundary systems in cascade order.

use num_complex::Complex64;
use serde::Serialize;

use super::apply::{is_taylor_type, leibniz_taylor_rhs};
use super::system::assemble_system;
use super::{CascadeError, TraceField};
use crate::asymtype::{AsymptoticType, Pair};
use crate::cone_symbols::ConeOperator;
use crate::interior::solve::{rk_combine, RK3_STAGES};
use crate::interior::tangential_rhs;
use crate::spectral::PeriodicGrid;

/// `gamma_pk u_0` and `gamma_pk f(t)` on the `y`-grid, layout `[j * N + n]`.
pub trait TraceData: Sync {
    fn initial(&self, pair: &Pair, y: &[f64], ncomp: usize, out: &mut [Complex64]);
    fn forcing(&self, pair: &Pair, t: f64, y: &[f64], ncomp: usize, out: &mut [Complex64]);
    fn forcing_is_zero(&self, _pair: &Pair) -> bool {
        false
    }
}

/// Zero initial data and zero forcing.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoTraceData;

impl TraceData for NoTraceData {
    fn initial(&self, _pair: &Pair, _y: &[f64], _ncomp: usize, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
    }

    fn forcing(&self, _pair: &Pair, _t: f64, _y: &[f64], _ncomp: usize, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
    }

    fn forcing_is_zero(&self, _pair: &Pair) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CascadeOptions {
    /// Negative control: solve with `B` replaced by `-B`.
    pub flip_zeroth_order: bool,
}

#[derive(Debug, Clone)]
pub struct CascadeResult {
    /// In cascade order.
    pub traces: Vec<TraceField>,
    /// Largest symbol-path vs Taylor-recursion discrepancy of `R_pk` (Taylor types only).
    pub leibniz_residual: Option<f64>,
}

/// Stage inputs `v_1, v_2, v_3` of every step of one solved pair.
struct History {
    pair: Pair,
    stages: Vec<[Vec<Complex64>; 3]>,
}

const LEIBNIZ_TOL: f64 = 1e-12;

/// Solves every pair of `ptype` in cascade order on the time grid `k dt`, `k = 0..=steps`.
///
/// Each system uses the interior's SSP-RK3 and spectral `y`-derivative. Couplings read the
/// stage inputs of already solved pairs, so the result equals one RK3 integration of the
/// full triangular system.
pub fn solve_cascade(
    op: &ConeOperator,
    ptype: &AsymptoticType,
    data: &dyn TraceData,
    y: &PeriodicGrid,
    dt: f64,
    steps: usize,
    opts: CascadeOptions,
) -> Result<CascadeResult, CascadeError> {
    let flipped;
    let op = if opts.flip_zeroth_order {
        flipped = op.with_flipped_b();
        &flipped
    } else {
        op
    };
    let n = op.n;
    let ny = y.len();
    let len = ny * n;
    let nodes = y.nodes();
    let times: Vec<f64> = (0..=steps).map(|s| s as f64 * dt).collect();
    let taylor = is_taylor_type(ptype);
    let mut leibniz: Option<f64> = if taylor && !ptype.is_empty() { Some(0.0) } else { None };
    let mut solved: Vec<Pair> = Vec::new();
    let mut hist: Vec<History> = Vec::new();
    let mut traces = Vec::new();
    let t_dep = op.depends_on_t();
    for pair in ptype.cascade_order() {
        let sys = assemble_system(op, ptype, &pair, &solved)?;
        let deps: Vec<(usize, &super::Coupling)> = sys
            .couplings
            .iter()
            .map(|c| {
                let idx = hist.iter().position(|h| h.pair.approx_eq(&c.source)).expect("dependency checked by assemble_system");
                (idx, c)
            })
            .collect();
        let f_zero = data.forcing_is_zero(&pair);
        let plain_row = f_zero && deps.is_empty();
        // Taylor cross-check data: index i holds the history of (-i, 0)
        let taylor_l = if taylor { Some((-pair.p.re).round() as usize) } else { None };
        let lower: Vec<Option<usize>> = match taylor_l {
            Some(l) => (0..l).map(|i| hist.iter().position(|h| h.pair.approx_eq(&Pair::real(-(i as f64), 0)))).collect(),
            None => vec![],
        };

        let mut field = TraceField::zeros(pair, times.clone(), ny, n);
        let mut u = vec![Complex64::new(0.0, 0.0); len];
        data.initial(&pair, &nodes, n, &mut u);
        field.slice_mut(0).copy_from_slice(&u);
        let mut coefs = sys.row_coefs(op, 0.0, &nodes);
        let mut stages = Vec::with_capacity(steps);
        let mut f = vec![Complex64::new(0.0, 0.0); len];
        for s in 0..steps {
            let t = s as f64 * dt;
            let mut v = u.clone();
            let mut record: [Vec<Complex64>; 3] = [vec![], vec![], vec![]];
            for (st, &(a, b, c)) in RK3_STAGES.iter().enumerate() {
                let ts = t + c * dt;
                if t_dep {
                    coefs = sys.row_coefs(op, ts, &nodes);
                }
                let f_row = if plain_row {
                    None
                } else {
                    if f_zero {
                        f.fill(Complex64::new(0.0, 0.0));
                    } else {
                        data.forcing(&pair, ts, &nodes, n, &mut f);
                    }
                    let mut r_sym = vec![Complex64::new(0.0, 0.0); len];
                    for (idx, cpl) in &deps {
                        let w = &hist[*idx].stages[s][st];
                        for (o, val) in r_sym.iter_mut().zip(cpl.symbol.apply_on_grid(cpl.source.p, ts, w, y)) {
                            *o -= val;
                        }
                    }
                    if let (Some(l), Some(res)) = (taylor_l, leibniz.as_mut()) {
                        if st == 0 {
                            let lw: Vec<Option<&[Complex64]>> =
                                lower.iter().map(|o| o.map(|i| hist[i].stages[s][st].as_slice())).collect();
                            let r_l = leibniz_taylor_rhs(op, l, &lw, ts, y);
                            let scale = 1.0 + r_sym.iter().map(|v| v.norm()).fold(0.0, f64::max);
                            let d = r_sym.iter().zip(&r_l).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
                            if d > LEIBNIZ_TOL {
                                return Err(CascadeError::LeibnizMismatch { pair: pair.label(), residual: d });
                            }
                            *res = res.max(d);
                        }
                    }
                    for (fv, rv) in f.iter_mut().zip(&r_sym) {
                        *fv += rv;
                    }
                    Some(f.as_slice())
                };
                let mut lv = vec![Complex64::new(0.0, 0.0); len];
                tangential_rhs(n, y, &coefs, f_row, &v, &mut lv);
                let mut next = vec![Complex64::new(0.0, 0.0); len];
                rk_combine(a, &u, b, &v, &lv, dt, &mut next);
                record[st] = std::mem::replace(&mut v, next);
            }
            u = v;
            if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(CascadeError::NonfiniteTrace { pair: pair.label(), t: times[s + 1] });
            }
            field.slice_mut(s + 1).copy_from_slice(&u);
            stages.push(record);
        }
        solved.push(pair);
        hist.push(History { pair, stages });
        traces.push(field);
    }
    Ok(CascadeResult { traces, leibniz_residual: leibniz })
}
