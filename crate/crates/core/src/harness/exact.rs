//! Closed-form solutions of the constant-coefficient families.
//!
//! With `A = diag(alpha_n)`, constant `A_1`, `B`, `f = 0`, and either `A = alpha I` or
//! `A_1`, `B` diagonal, each Fourier mode solves
//! `u_eta(t, x) = E_eta(t) u0_eta(x e^{-alpha t})` with `E_eta(t) = exp(-(i eta A_1 + B) t)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::data::DataConfig;
use super::HarnessError;
use crate::asymtype::{exponents_equal, AsymptoticType};
use crate::cone_symbols::{CoefMatrix, ConeOperator};
use crate::interior::{GridField, SpaceGrid};
use crate::spectral::PeriodicGrid;
use crate::trace_cascade::TraceField;

/// Data of a scenario together with its closed-form solution.
#[derive(Debug, Clone)]
pub struct Manufactured {
    pub u0: GridField,
    /// Exact interior at the requested times.
    pub interior: Vec<GridField>,
    /// Exact traces at the same times, in cascade order.
    pub traces: Vec<TraceField>,
}

/// Constant-coefficient structure of an exactly solvable operator.
#[derive(Debug, Clone)]
pub struct ExactFamily {
    alpha: Vec<f64>,
    a1: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
}

fn constant(poly: &[CoefMatrix], n: usize) -> Option<DMatrix<Complex64>> {
    if poly.iter().skip(1).any(|m| !m.is_zero()) {
        return None;
    }
    match poly.first() {
        None => Some(DMatrix::zeros(n, n)),
        Some(m) if m.depends_on_t() || m.depends_on_y() => None,
        Some(m) => Some(m.eval(0.0, 0.0)),
    }
}

fn is_diag(m: &DMatrix<Complex64>) -> bool {
    (0..m.nrows()).all(|r| (0..m.ncols()).all(|c| r == c || m[(r, c)].norm() == 0.0))
}

impl ExactFamily {
    pub fn detect(op: &ConeOperator, data: &DataConfig) -> Result<Self, HarnessError> {
        let unsupported = |m: &str| HarnessError::UnsupportedExactFamily(m.into());
        if !data.f.is_empty() {
            return Err(unsupported("nonzero forcing"));
        }
        let n = op.n;
        let a = constant(&op.a, n).ok_or_else(|| unsupported("A is not constant"))?;
        let a1 = constant(&op.a1, n).ok_or_else(|| unsupported("A1 is not constant"))?;
        let b = constant(&op.b, n).ok_or_else(|| unsupported("B is not constant"))?;
        if !is_diag(&a) || (0..n).any(|i| a[(i, i)].im != 0.0) {
            return Err(unsupported("A is not real diagonal"));
        }
        let alpha: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        let scalar_a = alpha.iter().all(|&v| v == alpha[0]);
        if !scalar_a && !(is_diag(&a1) && is_diag(&b)) {
            return Err(unsupported("A is not scalar and A1, B are not diagonal"));
        }
        Ok(Self { alpha, a1, b })
    }

    /// `E_eta(t)`; the Nyquist mode is treated as `eta = 0`, as in the solver.
    fn propagator(&self, eta: f64, t: f64) -> DMatrix<Complex64> {
        let gen = (&self.a1 * Complex64::new(0.0, eta) + &self.b) * Complex64::new(-t, 0.0);
        gen.exp()
    }

    fn wavenumbers(y: &PeriodicGrid) -> Vec<f64> {
        (0..y.len()).map(|idx| if y.is_nyquist(idx) { 0.0 } else { y.wavenumber(idx) as f64 }).collect()
    }

    /// Applies `E_eta(t)` to a row given per component on the `y` nodes (`[j * N + m]` layout).
    fn propagate_row(&self, y: &PeriodicGrid, etas: &[f64], t: f64, row: &[Complex64], out: &mut [Complex64]) {
        let n = self.alpha.len();
        let ny = y.len();
        let coeffs: Vec<Vec<Complex64>> = (0..n)
            .map(|m| y.coefficients(&(0..ny).map(|j| row[j * n + m]).collect::<Vec<_>>()))
            .collect();
        let mut prop = vec![vec![Complex64::new(0.0, 0.0); ny]; n];
        for (idx, &eta) in etas.iter().enumerate() {
            let e = self.propagator(eta, t);
            for r in 0..n {
                prop[r][idx] = (0..n).map(|m| e[(r, m)] * coeffs[m][idx]).sum();
            }
        }
        for (r, c) in prop.iter().enumerate() {
            for (j, v) in y.synthesize(c).into_iter().enumerate() {
                out[j * n + r] = v;
            }
        }
    }

    /// Exact interior at time `t`.
    pub fn interior(&self, data: &DataConfig, grid: &SpaceGrid, t: f64) -> GridField {
        let n = self.alpha.len();
        let ny = grid.ny();
        let etas = Self::wavenumbers(&grid.y);
        // u0_m(x e^{-alpha_m t}) with every component on its own characteristic
        let mut pulled = vec![Complex64::new(0.0, 0.0); grid.nx() * ny * n];
        for m in 0..n {
            let xs: Vec<f64> = grid.x.iter().map(|&x| x * (-self.alpha[m] * t).exp()).collect();
            let mut buf = vec![Complex64::new(0.0, 0.0); grid.nx() * ny * n];
            for term in &data.u0 {
                term.accumulate(0.0, &xs, &grid.y, n, &mut buf);
            }
            for k in 0..grid.nx() * ny {
                pulled[k * n + m] = buf[k * n + m];
            }
        }
        let mut out = GridField::zeros(grid, n, t);
        let w = ny * n;
        for i in 0..grid.nx() {
            self.propagate_row(&grid.y, &etas, t, &pulled[i * w..(i + 1) * w], &mut out.values[i * w..(i + 1) * w]);
        }
        out
    }

    /// Exact traces `gamma_{q,k}(t) = sum_r E (alpha t)^r / r! e^{alpha q t} W_{q,k+r}`.
    pub fn traces(&self, data: &DataConfig, ptype: &AsymptoticType, y: &PeriodicGrid, times: &[f64]) -> Vec<TraceField> {
        let n = self.alpha.len();
        let ny = y.len();
        let nodes = y.nodes();
        let etas = Self::wavenumbers(y);
        let pairs = ptype.cascade_order();
        let mut out = Vec::with_capacity(pairs.len());
        for pair in &pairs {
            let mut tf = TraceField::zeros(*pair, times.to_vec(), ny, n);
            for (s, &t) in times.iter().enumerate() {
                let mut pre = vec![Complex64::new(0.0, 0.0); ny * n];
                for term in &data.u0 {
                    let q = term.pair();
                    if !exponents_equal(q.p, pair.p) || q.k < pair.k {
                        continue;
                    }
                    let r = q.k - pair.k;
                    let fact: f64 = (1..=r).map(f64::from).product();
                    for m in 0..n {
                        let at = self.alpha[m] * t;
                        let c = Complex64::new(at.powi(r as i32) / fact, 0.0) * (pair.p * at).exp();
                        for (j, &yy) in nodes.iter().enumerate() {
                            pre[j * n + m] += term.w()[m].eval(0.0, yy) * c;
                        }
                    }
                }
                self.propagate_row(y, &etas, t, &pre, tf.slice_mut(s));
            }
            out.push(tf);
        }
        out
    }
}

/// Builds `u0` and, for the exact families, the closed-form interior and traces at `times`.
pub fn manufactured(
    op: &ConeOperator,
    ptype: &AsymptoticType,
    data: &DataConfig,
    grid: &SpaceGrid,
    times: &[f64],
) -> Result<Manufactured, HarnessError> {
    let family = ExactFamily::detect(op, data)?;
    Ok(Manufactured {
        u0: data.initial_field(grid, op.n),
        interior: times.iter().map(|&t| family.interior(data, grid, t)).collect(),
        traces: family.traces(data, ptype, &grid.y, times),
    })
}
