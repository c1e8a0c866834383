//! Semi-discrete right-hand side `f - x A d_x u - A_1 d_y u - B u`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{GridField, SpaceGrid, Stencil};
use super::InteriorError;
use crate::cone_symbols::ConeOperator;
use crate::linalg::{self, CMat};
use crate::spectral::PeriodicGrid;

/// Fourth-difference dissipation coefficient of the central fallback.
pub const DISSIPATION: f64 = 0.02;

/// Source term sampled row by row.
pub trait Forcing: Sync {
    /// `f(t, x, y_j)` for every `y` node, layout `[j * ncomp + n]`.
    fn row(&self, t: f64, x: f64, y: &[f64], ncomp: usize, out: &mut [Complex64]);

    fn is_zero(&self) -> bool {
        false
    }
}

/// `f = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoForcing;

impl Forcing for NoForcing {
    fn row(&self, _t: f64, _x: f64, _y: &[f64], _ncomp: usize, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
    }

    fn is_zero(&self) -> bool {
        true
    }
}

fn flatten(m: &CMat, out: &mut Vec<Complex64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in 0..n {
            out.push(m[(r, c)]);
        }
    }
}

/// `A_1` and `B` sampled along one `x`-row, row-major `N x N` blocks per `y` node.
#[derive(Debug, Clone)]
pub struct RowCoefs {
    pub a1: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl RowCoefs {
    pub fn sample(op: &ConeOperator, t: f64, x: f64, y: &[f64]) -> Self {
        let mut a1 = Vec::new();
        let mut b = Vec::new();
        for &yy in y {
            if op.d == 1 {
                flatten(&op.eval_a1(t, x, yy), &mut a1);
            }
            flatten(&op.eval_b(t, x, yy), &mut b);
        }
        Self { a1, b }
    }
}

/// All coefficient samples needed by the right-hand side at one time.
#[derive(Debug, Clone)]
pub struct NodeCoefs {
    pub t: f64,
    pub n: usize,
    pub rows: Vec<RowCoefs>,
    /// `A^+`, `A^-` per node (`(i * J + j) * N * N`); for fallback nodes `a_plus` holds `A`.
    pub a_plus: Vec<Complex64>,
    pub a_minus: Vec<Complex64>,
    pub split: Vec<bool>,
    pub rho: Vec<f64>,
    pub max_speed_x: f64,
    pub max_speed_y: f64,
    pub max_b: f64,
}

impl NodeCoefs {
    pub fn build(op: &ConeOperator, grid: &SpaceGrid, t: f64) -> Result<Self, InteriorError> {
        let n = op.n;
        let y = grid.y.nodes();
        let rows: Vec<RowCoefs> = grid.x.par_iter().map(|&x| RowCoefs::sample(op, t, x, &y)).collect();
        let nodes: Vec<(usize, usize)> = (0..grid.nx()).flat_map(|i| (0..grid.ny()).map(move |j| (i, j))).collect();
        let parts: Vec<Result<(Vec<Complex64>, Vec<Complex64>, bool, f64, f64), InteriorError>> = nodes
            .par_iter()
            .map(|&(i, j)| {
                let a = op.eval_a(t, grid.x[i], y[j]);
                let (mut p, mut m) = (Vec::with_capacity(n * n), Vec::with_capacity(n * n));
                let ay = if op.d == 1 {
                    linalg::real_eigenvalues(&op.eval_a1(t, grid.x[i], y[j]))
                        .map_err(|e| InteriorError::EigDecompositionFailure(format!("A1 at x={} y={}: {e}", grid.x[i], y[j])))?
                        .iter()
                        .fold(0.0_f64, |acc, l| acc.max(l.abs()))
                } else {
                    0.0
                };
                match linalg::flux_split(&a) {
                    Some(s) => {
                        flatten(&s.plus, &mut p);
                        flatten(&s.minus, &mut m);
                        Ok((p, m, true, s.max_speed, ay))
                    }
                    None => {
                        let rho = linalg::eigenvalues(&a).iter().fold(0.0_f64, |acc, l| acc.max(l.norm()));
                        flatten(&a, &mut p);
                        m.resize(n * n, Complex64::new(0.0, 0.0));
                        Ok((p, m, false, rho, ay))
                    }
                }
            })
            .collect();
        let mut a_plus = Vec::with_capacity(nodes.len() * n * n);
        let mut a_minus = Vec::with_capacity(nodes.len() * n * n);
        let mut split = Vec::with_capacity(nodes.len());
        let mut rho = Vec::with_capacity(nodes.len());
        let mut sx: f64 = 0.0;
        let mut sy: f64 = 0.0;
        for (k, part) in parts.into_iter().enumerate() {
            let (p, m, ok, r, ay) = part?;
            let i = k / grid.ny();
            a_plus.extend(p);
            a_minus.extend(m);
            split.push(ok);
            rho.push(r);
            sx = sx.max(r * grid.metric[i]);
            sy = sy.max(ay);
        }
        let max_b = rows
            .iter()
            .flat_map(|r| r.b.chunks(n * n))
            .map(|blk| {
                // row-sum norm bounds the spectral radius
                (0..n).map(|r| (0..n).map(|c| blk[r * n + c].norm()).sum::<f64>()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        Ok(Self { t, n, rows, a_plus, a_minus, split, rho, max_speed_x: sx, max_speed_y: sy, max_b })
    }

    /// Largest stable step for CFL number `cfl`.
    pub fn admissible_dt(&self, grid: &SpaceGrid, cfl: f64) -> f64 {
        let rate = self.max_speed_x / grid.h + self.max_speed_y * grid.y.max_wavenumber() + self.max_b;
        if rate == 0.0 {
            f64::INFINITY
        } else {
            cfl / rate
        }
    }
}

fn matvec_sub(n: usize, m: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
    for r in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..n {
            acc += m[r * n + c] * v[c];
        }
        out[r] -= acc;
    }
}

/// `out = f - A_1 d_y u - B u` on one row; shared by the interior and the standalone boundary system.
pub fn tangential_rhs(
    n: usize,
    y: &PeriodicGrid,
    coefs: &RowCoefs,
    f_row: Option<&[Complex64]>,
    u_row: &[Complex64],
    out: &mut [Complex64],
) {
    let ny = y.len();
    match f_row {
        Some(f) => out.copy_from_slice(f),
        None => out.fill(Complex64::new(0.0, 0.0)),
    }
    if !coefs.a1.is_empty() {
        let mut uy = vec![Complex64::new(0.0, 0.0); ny * n];
        let mut comp = vec![Complex64::new(0.0, 0.0); ny];
        let mut dcomp = vec![Complex64::new(0.0, 0.0); ny];
        for c in 0..n {
            for j in 0..ny {
                comp[j] = u_row[j * n + c];
            }
            y.derivative_into(&comp, &mut dcomp);
            for j in 0..ny {
                uy[j * n + c] = dcomp[j];
            }
        }
        for j in 0..ny {
            matvec_sub(n, &coefs.a1[j * n * n..(j + 1) * n * n], &uy[j * n..(j + 1) * n], &mut out[j * n..(j + 1) * n]);
        }
    }
    for j in 0..ny {
        matvec_sub(n, &coefs.b[j * n * n..(j + 1) * n * n], &u_row[j * n..(j + 1) * n], &mut out[j * n..(j + 1) * n]);
    }
}

fn apply_stencil(s: &Stencil, u: &[Complex64], row_len: usize, offset: usize, n: usize, out: &mut [Complex64]) {
    out[..n].fill(Complex64::new(0.0, 0.0));
    for k in 0..s.len {
        let base = s.idx[k] * row_len + offset;
        for c in 0..n {
            out[c] += u[base + c] * s.w[k];
        }
    }
}

/// Semi-discrete right-hand side on the whole grid.
///
/// The `x = 0` row only sees [`tangential_rhs`]; the degenerate term is never formed there.
pub fn semidiscrete_rhs(
    op: &ConeOperator,
    grid: &SpaceGrid,
    coefs: &NodeCoefs,
    u: &GridField,
    t: f64,
    forcing: &dyn Forcing,
) -> Result<GridField, InteriorError> {
    u.check_shape(grid, op.n)?;
    let n = op.n;
    let ny = grid.ny();
    let row_len = ny * n;
    let y = grid.y.nodes();
    let mut out = GridField::zeros(grid, n, t);
    out.values.par_chunks_mut(row_len).enumerate().for_each(|(i, orow)| {
        let f_row = if forcing.is_zero() {
            None
        } else {
            let mut f = vec![Complex64::new(0.0, 0.0); row_len];
            forcing.row(t, grid.x[i], &y, n, &mut f);
            Some(f)
        };
        let urow = &u.values[i * row_len..(i + 1) * row_len];
        tangential_rhs(n, &grid.y, &coefs.rows[i], f_row.as_deref(), urow, orow);
        if i == 0 {
            return;
        }
        let mut dm = vec![Complex64::new(0.0, 0.0); n];
        let mut dp = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..ny {
            let node = i * ny + j;
            let blk = node * n * n..(node + 1) * n * n;
            let o = &mut orow[j * n..(j + 1) * n];
            if coefs.split[node] {
                apply_stencil(&grid.minus[i], &u.values, row_len, j * n, n, &mut dm);
                apply_stencil(&grid.plus[i], &u.values, row_len, j * n, n, &mut dp);
                matvec_sub(n, &coefs.a_plus[blk.clone()], &dm, o);
                matvec_sub(n, &coefs.a_minus[blk], &dp, o);
            } else {
                apply_stencil(&grid.central[i], &u.values, row_len, j * n, n, &mut dm);
                matvec_sub(n, &coefs.a_plus[blk], &dm, o);
                let s4 = &grid.fourth[i];
                if s4.len > 0 {
                    apply_stencil(s4, &u.values, row_len, j * n, n, &mut dp);
                    let c = DISSIPATION * coefs.rho[node] * grid.metric[i] / grid.h;
                    for k in 0..n {
                        o[k] -= dp[k] * c;
                    }
                }
            }
        }
    });
    Ok(out)
}
