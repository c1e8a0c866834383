//! Characteristic curves `dx/dt = x lambda_k(A)`, `dy/dt = lambda_k(A_1)` (RK4).

use serde::Serialize;

use super::InteriorError;
use crate::cone_symbols::ConeOperator;
use crate::linalg;

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub family: usize,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicsReport {
    pub curves: Vec<Curve>,
    /// `max_t |x(t)|` over curves seeded at `x = 0` (0 when none are).
    pub max_abs_x_from_boundary: f64,
    /// Every curve seeded at `x > 0` stayed positive.
    pub interior_stays_positive: bool,
}

fn speeds(op: &ConeOperator, t: f64, x: f64, y: f64, k: usize) -> Result<(f64, f64), InteriorError> {
    let fail = |e: linalg::EigError| InteriorError::EigDecompositionFailure(format!("t={t} x={x} y={y}: {e}"));
    // eigenvalues sorted ascending; family k pairs the k-th of each
    let lx = linalg::real_eigenvalues(&op.eval_a(t, x, y)).map_err(fail)?[k];
    let ly = if op.d == 1 { linalg::real_eigenvalues(&op.eval_a1(t, x, y)).map_err(fail)?[k] } else { 0.0 };
    Ok((x * lx, ly))
}

/// Traces every family from every seed over `[0, t_end]` with `steps` RK4 steps.
pub fn trace_characteristics(
    op: &ConeOperator,
    seeds: &[(f64, f64)],
    t_end: f64,
    steps: usize,
) -> Result<CharacteristicsReport, InteriorError> {
    let dt = t_end / steps.max(1) as f64;
    let mut curves = Vec::new();
    let mut max_x: f64 = 0.0;
    let mut positive = true;
    for &(x0, y0) in seeds {
        for k in 0..op.n {
            let mut c = Curve { family: k, t: vec![0.0], x: vec![x0], y: vec![y0] };
            let (mut x, mut y) = (x0, y0);
            for s in 0..steps {
                let t = s as f64 * dt;
                let k1 = speeds(op, t, x, y, k)?;
                let k2 = speeds(op, t + 0.5 * dt, x + 0.5 * dt * k1.0, y + 0.5 * dt * k1.1, k)?;
                let k3 = speeds(op, t + 0.5 * dt, x + 0.5 * dt * k2.0, y + 0.5 * dt * k2.1, k)?;
                let k4 = speeds(op, t + dt, x + dt * k3.0, y + dt * k3.1, k)?;
                x += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
                y += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
                c.t.push(t + dt);
                c.x.push(x);
                c.y.push(y);
                if x0 == 0.0 {
                    max_x = max_x.max(x.abs());
                } else if x <= 0.0 {
                    positive = false;
                }
            }
            curves.push(c);
        }
    }
    Ok(CharacteristicsReport { curves, max_abs_x_from_boundary: max_x, interior_stays_positive: positive })
}
