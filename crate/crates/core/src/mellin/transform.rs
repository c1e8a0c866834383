//! Discrete Mellin transform `M u(z) = int_0^inf x^{z-1} u(x) dx` and its inverse.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{MellinQuadrature, WeightLine, WeightLineSamples};
use super::MellinError;

/// Transform value plus the end-point tail estimate that was folded in.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MellinValue {
    pub value: Complex64,
    /// `|tail corrections| / max(|value|, tiny)`; `inf` when a tail diverges.
    pub tail_diagnostic: f64,
    pub converged: bool,
}

/// Power-law extrapolation of the integral beyond one end of the grid.
///
/// Near the end node the integrand is modelled as `u_e (x / x_e)^alpha`
/// with `alpha` read off the last two magnitudes.
fn power_tail(
    quad: &MellinQuadrature,
    u: &[Complex64],
    z: Complex64,
    lower: bool,
    floor: f64,
) -> Option<Complex64> {
    let n = quad.len();
    let (e, nb) = if lower { (0, 1) } else { (n - 1, n - 2) };
    let ue = u[e];
    // roundoff-level end values carry no tail
    if ue.norm() <= floor {
        return Some(Complex64::new(0.0, 0.0));
    }
    let ub = u[nb].norm();
    if ub == 0.0 {
        // abrupt decay towards the interior: treat as unresolved, no correction
        return Some(Complex64::new(0.0, 0.0));
    }
    let alpha = (ue.norm() / ub).ln() / (quad.log_x[e] - quad.log_x[nb]);
    let s = z + alpha;
    let xz = (z * quad.log_x[e]).exp();
    if lower {
        if s.re <= 0.0 {
            return None;
        }
        Some(ue * xz / s)
    } else {
        if s.re >= 0.0 {
            return None;
        }
        Some(-ue * xz / s)
    }
}

/// Mellin transform of grid samples with trapezoid quadrature in `log x`.
///
/// Power-law tails beyond both ends of the grid are added analytically;
/// their size is reported in [`MellinValue::tail_diagnostic`].
pub fn mellin_transform(
    quad: &MellinQuadrature,
    u: &[Complex64],
    z: Complex64,
) -> Result<MellinValue, MellinError> {
    if u.len() != quad.len() {
        return Err(MellinError::ShapeMismatch { expected: quad.len(), got: u.len() });
    }
    if u.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MellinError::NonfiniteInput);
    }
    Ok(transform_unchecked(quad, u, z))
}

pub(crate) fn transform_unchecked(quad: &MellinQuadrature, u: &[Complex64], z: Complex64) -> MellinValue {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((w, lx), v) in quad.weights.iter().zip(quad.log_x.iter()).zip(u.iter()) {
        if *v != Complex64::new(0.0, 0.0) {
            acc += *w * (z * *lx).exp() * *v;
        }
    }
    let floor = 1e-13 * u.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let lower = power_tail(quad, u, z, true, floor);
    let upper = power_tail(quad, u, z, false, floor);
    match (lower, upper) {
        (Some(lo), Some(hi)) => {
            let value = acc + lo + hi;
            let tail = lo.norm() + hi.norm();
            MellinValue {
                value,
                tail_diagnostic: if tail == 0.0 { 0.0 } else { tail / value.norm().max(1e-300) },
                converged: true,
            }
        }
        _ => MellinValue { value: acc, tail_diagnostic: f64::INFINITY, converged: false },
    }
}

/// Real-valued convenience wrapper.
pub fn mellin_transform_real(
    quad: &MellinQuadrature,
    u: &[f64],
    z: Complex64,
) -> Result<MellinValue, MellinError> {
    let c: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    mellin_transform(quad, &c, z)
}

/// Relative residual of `{-x d_x u}~(z) = z u~(z)`.
///
/// `x_du` holds samples of `x * du/dx` on the same nodes as `u`.
pub fn mellin_derivative_identity_check(
    quad: &MellinQuadrature,
    u: &[Complex64],
    x_du: &[Complex64],
    z: Complex64,
) -> Result<f64, MellinError> {
    let lhs_in: Vec<Complex64> = x_du.iter().map(|v| -v).collect();
    let lhs = mellin_transform(quad, &lhs_in, z)?.value;
    let rhs = z * mellin_transform(quad, u, z)?.value;
    Ok((lhs - rhs).norm() / (1.0 + rhs.norm()))
}

/// Relative residual of `{x^{-gamma} u}~(z) = u~(z - gamma)`.
pub fn shift_identity_check(
    quad: &MellinQuadrature,
    u: &[Complex64],
    gamma: f64,
    z: Complex64,
) -> Result<f64, MellinError> {
    let shifted: Vec<Complex64> = u
        .iter()
        .zip(quad.x.iter())
        .map(|(v, x)| *v * x.powf(-gamma))
        .collect();
    let lhs = mellin_transform(quad, &shifted, z)?.value;
    let rhs = mellin_transform(quad, u, z - gamma)?.value;
    Ok((lhs - rhs).norm() / (1.0 + rhs.norm()))
}

/// Relative residual of `{log x u}~(z) = d/dz u~(z)`, derivative by central differences in `beta`.
pub fn log_identity_check(
    quad: &MellinQuadrature,
    u: &[Complex64],
    z: Complex64,
    h: f64,
) -> Result<f64, MellinError> {
    let logu: Vec<Complex64> = u.iter().zip(quad.log_x.iter()).map(|(v, l)| *v * *l).collect();
    let lhs = mellin_transform(quad, &logu, z)?.value;
    let up = mellin_transform(quad, u, z + h)?.value;
    let dn = mellin_transform(quad, u, z - h)?.value;
    let rhs = (up - dn) / (2.0 * h);
    Ok((lhs - rhs).norm() / (1.0 + rhs.norm()))
}

/// Samples `u~` along a weight line (parallel over nodes, order preserved).
pub fn sample_weight_line(
    quad: &MellinQuadrature,
    u: &[Complex64],
    line: WeightLine,
) -> Result<WeightLineSamples, MellinError> {
    if u.len() != quad.len() {
        return Err(MellinError::ShapeMismatch { expected: quad.len(), got: u.len() });
    }
    if u.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MellinError::NonfiniteInput);
    }
    let tau = line.tau_nodes();
    let values: Vec<Complex64> = tau
        .par_iter()
        .map(|&t| transform_unchecked(quad, u, line.z(t)).value)
        .collect();
    Ok(WeightLineSamples { line, tau, values })
}

/// `M^{-1} v(x) = (2 pi i)^{-1} int_{Gamma_beta} x^{-z} v(z) dz`, trapezoid in `tau`.
pub fn inverse_mellin(samples: &WeightLineSamples, x: f64) -> Result<Complex64, MellinError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(MellinError::NonfiniteInput);
    }
    if samples.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MellinError::NonfiniteInput);
    }
    let lx = x.ln();
    let w = samples.line.tau_weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((t, v), wt) in samples.tau.iter().zip(samples.values.iter()).zip(w.iter()) {
        let z = samples.line.z(*t);
        acc += *wt * (-z * lx).exp() * *v;
    }
    // dz = i dtau cancels the i in 1/(2 pi i)
    Ok(acc / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::super::cutoff::phi;
    use super::super::grid::LogGrid;
    use super::*;

    fn cplx(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&a| Complex64::new(a, 0.0)).collect()
    }

    #[test]
    fn zero_input_gives_zero() {
        let q = LogGrid::default().quadrature();
        let u = vec![Complex64::new(0.0, 0.0); q.len()];
        let v = mellin_transform(&q, &u, Complex64::new(0.3, 1.0)).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
        let r = mellin_derivative_identity_check(&q, &u, &u, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn nonfinite_rejected() {
        let q = LogGrid::new(1e-3, 1.0, 10).unwrap().quadrature();
        let mut u = vec![Complex64::new(1.0, 0.0); 10];
        u[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            mellin_transform(&q, &u, Complex64::new(1.0, 0.0)),
            Err(MellinError::NonfiniteInput)
        ));
    }

    #[test]
    fn multiplication_by_x_shifts_argument() {
        let q = LogGrid::default().quadrature();
        let u = cplx(&q.x.iter().map(|x| (-x).exp()).collect::<Vec<_>>());
        let xu = cplx(&q.x.iter().map(|x| x * (-x).exp()).collect::<Vec<_>>());
        for z in [Complex64::new(0.7, 0.0), Complex64::new(1.3, 2.0)] {
            let a = mellin_transform(&q, &xu, z).unwrap().value;
            let b = mellin_transform(&q, &u, z + 1.0).unwrap().value;
            assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn compact_support_derivative_identity() {
        let q = LogGrid::default().quadrature();
        let u: Vec<f64> = q.x.iter().map(|&x| phi(x) * x * x).collect();
        let xdu: Vec<f64> = q
            .x
            .iter()
            .map(|&x| x * (super::super::cutoff::phi_prime(x) * x * x + 2.0 * x * phi(x)))
            .collect();
        let r = mellin_derivative_identity_check(&q, &cplx(&u), &cplx(&xdu), Complex64::new(1.0, 0.0))
            .unwrap();
        assert!(r <= 1e-6, "residual {r}");
    }
}
