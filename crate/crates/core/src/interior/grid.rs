//! Graded `x`-grids containing `x = 0`, tensor fields on them, and the
//! finite-difference stencils for `x d_x`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::InteriorError;
use crate::mellin::FieldView;
use crate::spectral::PeriodicGrid;

/// Node placement in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Grading {
    /// `x_0 = 0`, `x_i = x_min r^{i-1}`, uniform step `log_step` in `log x`.
    Geometric { x_min: f64, log_step: f64 },
    /// `x(s) = X (e^{kappa s} - 1)/(e^kappa - 1)`, `s` uniform with `n_cells` cells.
    Stretched { kappa: f64, n_cells: usize },
}

impl Default for Grading {
    fn default() -> Self {
        Grading::Geometric { x_min: 1e-8, log_step: 0.05 }
    }
}

impl Grading {
    /// Halves the computational step.
    pub fn refined(&self) -> Grading {
        match *self {
            Grading::Geometric { x_min, log_step } => Grading::Geometric { x_min, log_step: log_step / 2.0 },
            Grading::Stretched { kappa, n_cells } => Grading::Stretched { kappa, n_cells: n_cells * 2 },
        }
    }
}

/// Weighted combination of up to five nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct Stencil {
    pub idx: [usize; 5],
    pub w: [f64; 5],
    pub len: usize,
}

impl Stencil {
    fn new(pairs: &[(usize, f64)]) -> Self {
        let mut s = Stencil::default();
        for (k, &(i, w)) in pairs.iter().enumerate() {
            s.idx[k] = i;
            s.w[k] = w;
        }
        s.len = pairs.len();
        s
    }

    fn scaled(mut self, c: f64) -> Self {
        for w in &mut self.w[..self.len] {
            *w *= c;
        }
        self
    }

    pub fn empty() -> Self {
        Stencil::default()
    }
}

/// Tensor grid `x-nodes x periodic y-grid` with precomputed `x d_x` stencils.
#[derive(Debug, Clone)]
pub struct SpaceGrid {
    pub x: Vec<f64>,
    pub y: PeriodicGrid,
    pub grading: Grading,
    pub x_max: f64,
    /// Uniform computational step.
    pub h: f64,
    /// `x d_x = g d_s` in the computational coordinate.
    pub metric: Vec<f64>,
    /// Upwind-biased approximations of `x d_x` for positive / negative speeds.
    pub minus: Vec<Stencil>,
    pub plus: Vec<Stencil>,
    /// Central approximation of `x d_x` and the fourth difference (for the dissipative fallback).
    pub central: Vec<Stencil>,
    pub fourth: Vec<Stencil>,
}

impl SpaceGrid {
    pub fn new(x_max: f64, grading: Grading, ny: usize) -> Result<Self, InteriorError> {
        if !(x_max >= 2.0 && x_max.is_finite()) {
            return Err(InteriorError::InvalidGrid(format!("X = {x_max} must be >= 2")));
        }
        if ny == 0 {
            return Err(InteriorError::InvalidGrid("y grid needs at least one node".into()));
        }
        let (x, metric, h, first) = match grading {
            Grading::Geometric { x_min, log_step } => {
                if !(x_min > 0.0 && x_min < x_max && log_step > 0.0) {
                    return Err(InteriorError::InvalidGrid(format!(
                        "geometric grading needs 0 < x_min < X and log_step > 0 (x_min={x_min}, log_step={log_step})"
                    )));
                }
                let span = (x_max / x_min).ln();
                let cells = (span / log_step).round().max(4.0) as usize;
                let h = span / cells as f64;
                let mut x = vec![0.0];
                for i in 0..=cells {
                    x.push(x_min * (h * i as f64).exp());
                }
                let last = x.len() - 1;
                x[1] = x_min;
                x[last] = x_max;
                let mut metric = vec![1.0; x.len()];
                metric[0] = 0.0;
                (x, metric, h, 1usize)
            }
            Grading::Stretched { kappa, n_cells } => {
                if !(kappa > 0.0 && n_cells >= 8) {
                    return Err(InteriorError::InvalidGrid(format!(
                        "stretched grading needs kappa > 0 and n_cells >= 8 (kappa={kappa}, n_cells={n_cells})"
                    )));
                }
                let h = 1.0 / n_cells as f64;
                let denom = kappa.exp() - 1.0;
                let x: Vec<f64> = (0..=n_cells)
                    .map(|i| {
                        let s = i as f64 * h;
                        x_max * ((kappa * s).exp() - 1.0) / denom
                    })
                    .collect();
                let metric: Vec<f64> = (0..=n_cells)
                    .map(|i| {
                        let s = i as f64 * h;
                        ((kappa * s).exp() - 1.0) / (kappa * (kappa * s).exp())
                    })
                    .collect();
                (x, metric, h, 0usize)
            }
        };
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(InteriorError::InvalidGrid("x nodes not strictly increasing".into()));
        }
        let y = if ny == 1 { PeriodicGrid::point() } else { PeriodicGrid::new(ny) };
        let mut g = SpaceGrid {
            x,
            y,
            grading,
            x_max,
            h,
            metric,
            minus: vec![],
            plus: vec![],
            central: vec![],
            fourth: vec![],
        };
        g.build_stencils(first);
        Ok(g)
    }

    fn build_stencils(&mut self, first: usize) {
        let n = self.x.len();
        let last = n - 1;
        let h = self.h;
        let mut minus = vec![Stencil::empty(); n];
        let mut plus = vec![Stencil::empty(); n];
        let mut central = vec![Stencil::empty(); n];
        let mut fourth = vec![Stencil::empty(); n];
        for i in 1..n {
            let g = self.metric[i];
            let uniform = |k: isize| k >= first as isize && k <= last as isize;
            let ii = i as isize;
            // D^- : (u_{i-2} - 6u_{i-1} + 3u_i + 2u_{i+1}) / 6h
            minus[i] = if uniform(ii - 2) && uniform(ii + 1) {
                Stencil::new(&[(i - 2, 1.0), (i - 1, -6.0), (i, 3.0), (i + 1, 2.0)]).scaled(g / (6.0 * h))
            } else if i == last {
                Stencil::new(&[(i - 2, 1.0), (i - 1, -4.0), (i, 3.0)]).scaled(g / (2.0 * h))
            } else if uniform(ii - 1) {
                Stencil::new(&[(i - 1, -1.0), (i + 1, 1.0)]).scaled(g / (2.0 * h))
            } else {
                // node next to x = 0 on a geometric grid: x (u_1 - u_0) / (x_1 - x_0)
                let x1 = self.x[i];
                let c = x1 / (x1 - self.x[i - 1]);
                Stencil::new(&[(i - 1, -c), (i, c)])
            };
            // D^+ : (-2u_{i-1} - 3u_i + 6u_{i+1} - u_{i+2}) / 6h
            plus[i] = if uniform(ii - 1) && uniform(ii + 2) {
                Stencil::new(&[(i - 1, -2.0), (i, -3.0), (i + 1, 6.0), (i + 2, -1.0)]).scaled(g / (6.0 * h))
            } else if i == last {
                // outflow extrapolation
                Stencil::new(&[(i - 2, 1.0), (i - 1, -4.0), (i, 3.0)]).scaled(g / (2.0 * h))
            } else if uniform(ii + 2) {
                Stencil::new(&[(i, -3.0), (i + 1, 4.0), (i + 2, -1.0)]).scaled(g / (2.0 * h))
            } else {
                Stencil::new(&[(i - 1, -1.0), (i + 1, 1.0)]).scaled(g / (2.0 * h))
            };
            central[i] = if i == last {
                Stencil::new(&[(i - 2, 1.0), (i - 1, -4.0), (i, 3.0)]).scaled(g / (2.0 * h))
            } else if uniform(ii - 1) {
                Stencil::new(&[(i - 1, -1.0), (i + 1, 1.0)]).scaled(g / (2.0 * h))
            } else {
                minus[i]
            };
            if uniform(ii - 2) && uniform(ii + 2) {
                fourth[i] = Stencil::new(&[(i - 2, 1.0), (i - 1, -4.0), (i, 6.0), (i + 1, -4.0), (i + 2, 1.0)]);
            }
        }
        self.minus = minus;
        self.plus = plus;
        self.central = central;
        self.fourth = fourth;
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn refined(&self) -> Result<SpaceGrid, InteriorError> {
        SpaceGrid::new(self.x_max, self.grading.refined(), self.ny())
    }

    /// Smallest computational step relative to speed one, for the CFL bound.
    pub fn max_metric(&self) -> f64 {
        self.metric.iter().fold(0.0, |a: f64, &b| a.max(b))
    }

    /// Trapezoid weights in `x` times the `y` weight.
    pub fn l2_weights(&self) -> Vec<f64> {
        let n = self.nx();
        let mut w = vec![0.0; n];
        for i in 0..n - 1 {
            let d = self.x[i + 1] - self.x[i];
            w[i] += 0.5 * d;
            w[i + 1] += 0.5 * d;
        }
        let wy = self.y.weight();
        w.iter().map(|v| v * wy).collect()
    }
}

/// `N`-component complex field on a [`SpaceGrid`], layout `[(i * J + j) * N + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub t: f64,
    pub nx: usize,
    pub ny: usize,
    pub ncomp: usize,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn zeros(grid: &SpaceGrid, ncomp: usize, t: f64) -> Self {
        Self { t, nx: grid.nx(), ny: grid.ny(), ncomp, values: vec![Complex64::new(0.0, 0.0); grid.nx() * grid.ny() * ncomp] }
    }

    pub fn from_fn(grid: &SpaceGrid, ncomp: usize, t: f64, f: impl Fn(f64, f64, usize) -> Complex64) -> Self {
        let y = grid.y.nodes();
        let mut out = Self::zeros(grid, ncomp, t);
        for (i, &x) in grid.x.iter().enumerate() {
            for (j, &yy) in y.iter().enumerate() {
                for n in 0..ncomp {
                    out.values[(i * grid.ny() + j) * ncomp + n] = f(x, yy, n);
                }
            }
        }
        out
    }

    pub fn check_shape(&self, grid: &SpaceGrid, ncomp: usize) -> Result<(), InteriorError> {
        let expected = grid.nx() * grid.ny() * ncomp;
        if self.values.len() != expected || self.nx != grid.nx() || self.ny != grid.ny() || self.ncomp != ncomp {
            return Err(InteriorError::ShapeMismatch { expected, got: self.values.len() });
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        let w = self.ny * self.ncomp;
        &self.values[i * w..(i + 1) * w]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn view<'a>(&'a self, grid: &'a SpaceGrid) -> FieldView<'a> {
        FieldView { x: &grid.x, y: &grid.y, ncomp: self.ncomp, values: &self.values }
    }

    pub fn at(&self, i: usize, j: usize, n: usize) -> Complex64 {
        self.values[(i * self.ny + j) * self.ncomp + n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_contains_zero() {
        let g = SpaceGrid::new(4.0, Grading::default(), 1).unwrap();
        assert_eq!(g.x[0], 0.0);
        assert_eq!(g.x[1], 1e-8);
        assert_eq!(*g.x.last().unwrap(), 4.0);
        let r = g.x[3] / g.x[2];
        assert!((g.x[10] / g.x[9] - r).abs() < 1e-12);
    }

    #[test]
    fn stretched_grid_metric() {
        let g = SpaceGrid::new(4.0, Grading::Stretched { kappa: 6.0, n_cells: 64 }, 1).unwrap();
        assert_eq!(g.x[0], 0.0);
        assert!((g.x[64] - 4.0).abs() < 1e-12);
        assert_eq!(g.metric[0], 0.0);
    }

    #[test]
    fn stencils_exact_on_log_linear() {
        // u = log x on the geometric part: x d_x u = 1
        let g = SpaceGrid::new(4.0, Grading::Geometric { x_min: 1e-4, log_step: 0.1 }, 1).unwrap();
        let u: Vec<f64> = g.x.iter().map(|&x| if x > 0.0 { x.ln() } else { 0.0 }).collect();
        for i in 3..g.nx() - 2 {
            for s in [&g.minus[i], &g.plus[i], &g.central[i]] {
                let v: f64 = (0..s.len).map(|k| s.w[k] * u[s.idx[k]]).sum();
                assert!((v - 1.0).abs() < 1e-9, "i={i} v={v}");
            }
        }
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(SpaceGrid::new(1.0, Grading::default(), 1).is_err());
        assert!(SpaceGrid::new(4.0, Grading::Geometric { x_min: 0.0, log_step: 0.1 }, 1).is_err());
    }
}
