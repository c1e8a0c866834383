//! Weighted least-squares extraction of `gamma_pk` from interior snapshots.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CascadeError, TraceField};
use crate::asymtype::AsymptoticType;
use crate::interior::GridField;
use crate::mellin::cutoff::phi;
use crate::mellin::potential::{power_log, sign_factorial};
use crate::spectral::{bracket, PeriodicGrid};

/// Largest admissible condition number of the column-normalized basis.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// `[x_a, x_b]`; default `[4 x_1, 0.2]` with `x_1` the first positive node.
    pub window: Option<(f64, f64)>,
    /// Weights `x^omega`; default `omega = 1 - 2 (delta + theta)`, the `K^{0, delta + theta}` weight on geometric nodes.
    pub weight_exponent: Option<f64>,
    /// Multiply the model of mode `eta` by `phi(x <eta>)`.
    pub modewise_cutoff: bool,
    /// Minimum number of window nodes per basis function.
    pub nodes_per_pair: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { window: None, weight_exponent: None, modewise_cutoff: true, nodes_per_pair: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// In cascade order, one time sample per snapshot.
    pub traces: Vec<TraceField>,
    /// Largest condition number over `y`-modes.
    pub condition: f64,
    pub window: (f64, f64),
    pub nodes: usize,
    pub weight_exponent: f64,
}

/// Fits `u(t, x, eta) ~ sum_pk c_pk phi(x <eta>) (-1)^k/k! x^{-p} log^k x` on the window nodes.
pub fn fit_traces(
    snapshots: &[GridField],
    x: &[f64],
    y: &PeriodicGrid,
    ptype: &AsymptoticType,
    opts: &FitOptions,
) -> Result<FitResult, CascadeError> {
    let pairs = ptype.cascade_order();
    let first_pos = x.iter().copied().find(|&v| v > 0.0).unwrap_or(f64::NAN);
    let window = opts.window.unwrap_or((4.0 * first_pos, 0.2));
    let omega = opts.weight_exponent.unwrap_or(1.0 - 2.0 * (ptype.delta() + ptype.cutoff()));
    if !(window.0 > 0.0 && window.1 > window.0 && window.1 <= 0.25) {
        return Err(CascadeError::InvalidWindow(format!("[{}, {}] must lie in (0, 1/4]", window.0, window.1)));
    }
    let idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= window.0 && x[i] <= window.1).collect();
    let ny = y.len();
    let ncomp = snapshots.first().map(|s| s.ncomp).unwrap_or(0);
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    if pairs.is_empty() {
        return Ok(FitResult { traces: vec![], condition: 1.0, window, nodes: idx.len(), weight_exponent: omega });
    }
    if idx.len() < opts.nodes_per_pair.max(1) * pairs.len() {
        return Err(CascadeError::InvalidWindow(format!(
            "{} nodes in [{}, {}], need {}",
            idx.len(),
            window.0,
            window.1,
            opts.nodes_per_pair * pairs.len()
        )));
    }
    for s in snapshots {
        let exp = x.len() * ny * ncomp;
        if s.values.len() != exp || s.ncomp != ncomp || s.ny != ny {
            return Err(CascadeError::ShapeMismatch { expected: exp, got: s.values.len() });
        }
    }
    let np = pairs.len();
    let m = idx.len();
    let sqrt_w: Vec<f64> = idx.iter().map(|&i| x[i].powf(0.5 * omega)).collect();
    let basis: Vec<Vec<Complex64>> = pairs
        .iter()
        .map(|pr| idx.iter().map(|&i| power_log(pr.p, pr.k, x[i]) * sign_factorial(pr.k)).collect())
        .collect();

    // y-Fourier coefficients of every window row, per snapshot and component: [snap][node][comp][mode]
    let ncols = snapshots.len() * ncomp;
    let coeffs: Vec<Vec<Vec<Vec<Complex64>>>> = snapshots
        .par_iter()
        .map(|s| {
            idx.iter()
                .map(|&i| {
                    (0..ncomp)
                        .map(|c| {
                            let row: Vec<Complex64> = (0..ny).map(|j| s.values[(i * ny + j) * ncomp + c]).collect();
                            y.coefficients(&row)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    // per mode: solve for all (snapshot, component) columns at once
    let per_mode: Vec<Result<(Vec<Complex64>, f64), CascadeError>> = (0..ny)
        .into_par_iter()
        .map(|mode| {
            let b = bracket(y.wavenumber(mode) as f64);
            let mut mat = DMatrix::<Complex64>::zeros(m, np);
            for (r, &i) in idx.iter().enumerate() {
                let cut = if opts.modewise_cutoff { phi(x[i] * b) } else { 1.0 };
                for q in 0..np {
                    mat[(r, q)] = basis[q][r] * (cut * sqrt_w[r]);
                }
            }
            let scale: Vec<f64> = (0..np).map(|q| mat.column(q).norm()).collect();
            if scale.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                return Err(CascadeError::IllConditionedBasis { cond: f64::INFINITY });
            }
            for q in 0..np {
                let s = scale[q];
                mat.column_mut(q).scale_mut(1.0 / s);
            }
            let svd = mat.svd(true, true);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
            if cond > MAX_CONDITION {
                return Err(CascadeError::IllConditionedBasis { cond });
            }
            let mut rhs = DMatrix::<Complex64>::zeros(m, ncols);
            for (sn, snap) in coeffs.iter().enumerate() {
                for c in 0..ncomp {
                    for r in 0..m {
                        rhs[(r, sn * ncomp + c)] = snap[r][c][mode] * sqrt_w[r];
                    }
                }
            }
            let sol = svd.solve(&rhs, 0.0).map_err(|e| CascadeError::InvalidWindow(e.to_string()))?;
            // layout [(q * ncols) + col]
            let mut out = Vec::with_capacity(np * ncols);
            for q in 0..np {
                for col in 0..ncols {
                    out.push(sol[(q, col)] / scale[q]);
                }
            }
            Ok((out, cond))
        })
        .collect();
    let mut modes = Vec::with_capacity(ny);
    let mut condition: f64 = 0.0;
    for r in per_mode {
        let (v, c) = r?;
        condition = condition.max(c);
        modes.push(v);
    }
    let mut traces = Vec::with_capacity(np);
    for (q, pr) in pairs.iter().enumerate() {
        let mut field = TraceField::zeros(*pr, times.clone(), ny, ncomp);
        for sn in 0..snapshots.len() {
            for c in 0..ncomp {
                let spec: Vec<Complex64> = (0..ny).map(|mode| modes[mode][q * ncols + sn * ncomp + c]).collect();
                let vals = y.synthesize(&spec);
                let out = field.slice_mut(sn);
                for j in 0..ny {
                    out[j * ncomp + c] = vals[j];
                }
            }
        }
        traces.push(field);
    }
    Ok(FitResult { traces, condition, window, nodes: m, weight_exponent: omega })
}
