//! SSP-RK3 time stepping, energy monitoring and the standalone boundary system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::{GridField, SpaceGrid};
use super::rhs::{semidiscrete_rhs, tangential_rhs, Forcing, NodeCoefs, RowCoefs};
use super::InteriorError;
use crate::cone_symbols::ConeOperator;
use crate::mellin::norms::k_norm_l2;
use crate::spectral::PeriodicGrid;

/// Coefficient samples, rebuilt only when the operator depends on `t`.
#[derive(Debug, Clone)]
pub struct CoefficientCache {
    coefs: NodeCoefs,
    t_dependent: bool,
}

impl CoefficientCache {
    pub fn new(op: &ConeOperator, grid: &SpaceGrid, t: f64) -> Result<Self, InteriorError> {
        Ok(Self { coefs: NodeCoefs::build(op, grid, t)?, t_dependent: op.depends_on_t() })
    }

    pub fn at(&mut self, op: &ConeOperator, grid: &SpaceGrid, t: f64) -> Result<&NodeCoefs, InteriorError> {
        if self.t_dependent && self.coefs.t != t {
            self.coefs = NodeCoefs::build(op, grid, t)?;
        }
        Ok(&self.coefs)
    }

    /// Admissible step over `[t0, t1]`, sampling the endpoints and midpoint for `t`-dependent operators.
    pub fn admissible_dt(&mut self, op: &ConeOperator, grid: &SpaceGrid, cfl: f64, t0: f64, t1: f64) -> Result<f64, InteriorError> {
        if !self.t_dependent {
            return Ok(self.coefs.admissible_dt(grid, cfl));
        }
        let mut dt = f64::INFINITY;
        for t in [t0, 0.5 * (t0 + t1), t1] {
            dt = dt.min(NodeCoefs::build(op, grid, t)?.admissible_dt(grid, cfl));
        }
        Ok(dt)
    }
}

/// `u_{n+1}` from the three SSP-RK3 stages: `a u + b (v + dt L(v))`.
pub fn rk_combine(a: f64, u: &[Complex64], b: f64, v: &[Complex64], lv: &[Complex64], dt: f64, out: &mut [Complex64]) {
    for k in 0..out.len() {
        out[k] = u[k] * a + (v[k] + lv[k] * dt) * b;
    }
}

/// Stage weights `(a, b)` and stage time offsets of SSP-RK3.
pub const RK3_STAGES: [(f64, f64, f64); 3] = [(0.0, 1.0, 0.0), (0.75, 0.25, 1.0), (1.0 / 3.0, 2.0 / 3.0, 0.5)];

/// One SSP-RK3 step; refuses steps above the CFL bound.
pub fn step(
    op: &ConeOperator,
    grid: &SpaceGrid,
    cache: &mut CoefficientCache,
    u: &GridField,
    dt: f64,
    forcing: &dyn Forcing,
    cfl: f64,
) -> Result<GridField, InteriorError> {
    u.check_shape(grid, op.n)?;
    let t = u.t;
    let adm = cache.admissible_dt(op, grid, cfl, t, t + dt)?;
    if dt > adm * (1.0 + 1e-12) {
        return Err(InteriorError::CflViolation { dt, admissible: adm });
    }
    let mut v = u.clone();
    for &(a, b, c) in &RK3_STAGES {
        let ts = t + c * dt;
        let coefs = cache.at(op, grid, ts)?;
        let lv = semidiscrete_rhs(op, grid, coefs, &v, ts, forcing)?;
        let mut next = GridField::zeros(grid, op.n, t + dt);
        rk_combine(a, &u.values, b, &v.values, &lv.values, dt, &mut next.values);
        v = next;
    }
    v.t = t + dt;
    Ok(v)
}

/// Scheme and output parameters of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub cfl: f64,
    /// Explicit step; chosen from the CFL bound when absent.
    pub dt: Option<f64>,
    /// Keep every `snapshot_every`-th state (the initial and final states are always kept).
    pub snapshot_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { cfl: 0.4, dt: None, snapshot_every: 1 }
    }
}

/// `||u(t)||`, `||f(t)||` in `K^{0, delta}` and the fitted constant `C_fit`.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyLog {
    pub t: Vec<f64>,
    pub u_norm: Vec<f64>,
    pub f_norm: Vec<f64>,
    pub c_fit: f64,
}

impl EnergyLog {
    fn finish(&mut self) {
        let mut int_f = 0.0;
        for k in 1..self.t.len() {
            int_f += 0.5 * (self.t[k] - self.t[k - 1]) * (self.f_norm[k] + self.f_norm[k - 1]);
        }
        let denom = self.u_norm.first().copied().unwrap_or(0.0) + int_f;
        let sup = self.u_norm.iter().fold(0.0_f64, |a, &b| a.max(b));
        self.c_fit = if denom > 0.0 { sup / denom } else { f64::NAN };
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub snapshots: Vec<GridField>,
    pub energy: EnergyLog,
    pub dt: f64,
    pub steps: usize,
    /// The `x = 0` row after every step (index 0 is the initial row).
    pub boundary_rows: Vec<Vec<Complex64>>,
}

fn forcing_field(grid: &SpaceGrid, ncomp: usize, t: f64, forcing: &dyn Forcing) -> GridField {
    let mut f = GridField::zeros(grid, ncomp, t);
    if forcing.is_zero() {
        return f;
    }
    let y = grid.y.nodes();
    let w = grid.ny() * ncomp;
    for (i, chunk) in f.values.chunks_mut(w).enumerate() {
        forcing.row(t, grid.x[i], &y, ncomp, chunk);
    }
    f
}

/// Integrates to `op.t_final` on a uniform time grid.
pub fn solve(
    op: &ConeOperator,
    grid: &SpaceGrid,
    u0: &GridField,
    forcing: &dyn Forcing,
    cfg: &SolverConfig,
) -> Result<Solution, InteriorError> {
    u0.check_shape(grid, op.n)?;
    if !u0.is_finite() {
        return Err(InteriorError::NonfiniteState { t: 0.0, step: 0 });
    }
    let mut cache = CoefficientCache::new(op, grid, 0.0)?;
    let tf = op.t_final;
    let dt_req = match cfg.dt {
        Some(dt) => dt,
        None => cache.admissible_dt(op, grid, cfg.cfl, 0.0, tf)?,
    };
    let steps = if dt_req.is_finite() { (tf / dt_req).ceil().max(1.0) as usize } else { 1 };
    let dt = tf / steps as f64;
    let delta = op.delta;
    let norm = |u: &GridField| k_norm_l2(&u.view(grid), delta);
    let mut energy = EnergyLog { t: vec![0.0], u_norm: vec![norm(u0)], f_norm: vec![norm(&forcing_field(grid, op.n, 0.0, forcing))], c_fit: 0.0 };
    let mut snapshots = vec![u0.clone()];
    let mut boundary_rows = vec![u0.row(0).to_vec()];
    let mut u = u0.clone();
    u.t = 0.0;
    let every = cfg.snapshot_every.max(1);
    for s in 1..=steps {
        let mut next = step(op, grid, &mut cache, &u, dt, forcing, cfg.cfl)?;
        next.t = s as f64 * dt;
        if !next.is_finite() {
            return Err(InteriorError::NonfiniteState { t: next.t, step: s });
        }
        energy.t.push(next.t);
        energy.u_norm.push(norm(&next));
        energy.f_norm.push(norm(&forcing_field(grid, op.n, next.t, forcing)));
        boundary_rows.push(next.row(0).to_vec());
        if s % every == 0 || s == steps {
            snapshots.push(next.clone());
        }
        u = next;
    }
    energy.finish();
    Ok(Solution { snapshots, energy, dt, steps, boundary_rows })
}

/// Refinement comparison of two energy logs.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyVerdict {
    pub c_fit: f64,
    pub c_fit_refined: f64,
    pub rel_change: f64,
    /// `u = 0` and `f = 0`: nothing to fit.
    pub trivial: bool,
    pub pass: bool,
}

pub fn energy_verdict(coarse: &EnergyLog, fine: &EnergyLog) -> EnergyVerdict {
    if coarse.c_fit.is_nan() && fine.c_fit.is_nan() {
        let zero = coarse.u_norm.iter().chain(&fine.u_norm).all(|&v| v == 0.0);
        return EnergyVerdict { c_fit: f64::NAN, c_fit_refined: f64::NAN, rel_change: 0.0, trivial: zero, pass: zero };
    }
    let rel = (fine.c_fit - coarse.c_fit).abs() / coarse.c_fit.abs();
    EnergyVerdict {
        c_fit: coarse.c_fit,
        c_fit_refined: fine.c_fit,
        rel_change: rel,
        trivial: false,
        pass: coarse.c_fit.is_finite() && fine.c_fit.is_finite() && rel <= 0.1,
    }
}

/// `d_t v + A_1(t, 0, y) d_y v + B(t, 0, y) v = f(t, 0, y)` with the interior integrator.
pub fn solve_boundary_row(
    op: &ConeOperator,
    y: &PeriodicGrid,
    v0: &[Complex64],
    forcing: &dyn Forcing,
    dt: f64,
    steps: usize,
) -> Vec<Vec<Complex64>> {
    let n = op.n;
    let nodes = y.nodes();
    let t_dep = op.depends_on_t();
    let mut coefs = RowCoefs::sample(op, 0.0, 0.0, &nodes);
    let mut out = vec![v0.to_vec()];
    let mut u = v0.to_vec();
    let len = u.len();
    for s in 0..steps {
        let t = s as f64 * dt;
        let mut v = u.clone();
        for &(a, b, c) in &RK3_STAGES {
            let ts = t + c * dt;
            if t_dep {
                coefs = RowCoefs::sample(op, ts, 0.0, &nodes);
            }
            let f_row = if forcing.is_zero() {
                None
            } else {
                let mut f = vec![Complex64::new(0.0, 0.0); len];
                forcing.row(ts, 0.0, &nodes, n, &mut f);
                Some(f)
            };
            let mut lv = vec![Complex64::new(0.0, 0.0); len];
            tangential_rhs(n, y, &coefs, f_row.as_deref(), &v, &mut lv);
            let mut next = vec![Complex64::new(0.0, 0.0); len];
            rk_combine(a, &u, b, &v, &lv, dt, &mut next);
            v = next;
        }
        u = v;
        out.push(u.clone());
    }
    out
}
