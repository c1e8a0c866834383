//! Potential operators `Gamma_pk` and the flatness check of their remainders.

use num_complex::Complex64;
use serde::Serialize;

use super::cutoff::phi;
use super::grid::LogGrid;
use super::norms::{k_norm, FieldView};
use super::MellinError;
use crate::spectral::{bracket, PeriodicGrid};

/// `(-1)^k / k!`.
pub fn sign_factorial(k: u32) -> f64 {
    let f: f64 = (1..=k).map(f64::from).product();
    if k.is_multiple_of(2) {
        1.0 / f
    } else {
        -1.0 / f
    }
}

/// `x^{-p} log^k x` for `x > 0`.
pub fn power_log(p: Complex64, k: u32, x: f64) -> Complex64 {
    let lx = x.ln();
    (-p * lx).exp() * lx.powi(k as i32)
}

/// Samples of `Gamma_pk w` on `x-nodes x y-grid`, layout `values[i * J + j]`.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub values: Vec<Complex64>,
    /// Set when a node sits at `x = 0` and the limit there does not exist.
    pub singular_at_zero: bool,
}

/// `(Gamma_pk w)(x, y) = (-1)^k/k! F^{-1}{phi(x <eta>) w^(eta)} x^{-p} log^k x`.
///
/// A node at `x = 0` receives the limit: 0 when `Re p < 0`, `w` when `p = 0, k = 0`,
/// NaN otherwise (and `singular_at_zero` is set).
pub fn potential_op(
    p: Complex64,
    k: u32,
    w: &[Complex64],
    x: &[f64],
    grid: &PeriodicGrid,
) -> Result<PotentialField, MellinError> {
    let ny = grid.len();
    if w.len() != ny {
        return Err(MellinError::ShapeMismatch { expected: ny, got: w.len() });
    }
    let coeffs = grid.coefficients(w);
    let brackets: Vec<f64> = (0..ny).map(|idx| bracket(grid.wavenumber(idx) as f64)).collect();
    let c = sign_factorial(k);
    let mut values = Vec::with_capacity(x.len() * ny);
    let mut singular = false;
    let mut modes = vec![Complex64::new(0.0, 0.0); ny];
    for &xi in x {
        if xi == 0.0 {
            if p.re < 0.0 {
                values.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), ny));
            } else if p == Complex64::new(0.0, 0.0) && k == 0 {
                values.extend_from_slice(w);
            } else {
                singular = true;
                values.extend(std::iter::repeat_n(Complex64::new(f64::NAN, f64::NAN), ny));
            }
            continue;
        }
        for (m, (cf, b)) in modes.iter_mut().zip(coeffs.iter().zip(brackets.iter())) {
            *m = *cf * phi(xi * b);
        }
        let row = grid.synthesize(&modes);
        let f = power_log(p, k, xi) * c;
        values.extend(row.into_iter().map(|v| v * f));
    }
    Ok(PotentialField { values, singular_at_zero: singular })
}

/// One refinement level of a flatness check.
#[derive(Debug, Clone, Serialize)]
pub struct FlatnessLevel {
    pub eps: f64,
    pub x_min: f64,
    pub value: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    pub levels: Vec<FlatnessLevel>,
    /// Every sequence finite, converged, and non-increasing up to 5%.
    pub bounded: bool,
}

/// `K^{s-eps, 1/2 - Re p + eps}` norm of `Gamma_pk w - (-1)^k/k! phi(x) x^{-p} log^k x w(y)`
/// for `eps in {0.1, 0.05}` and `x_min in {x0, x0/4, x0/16}`.
pub fn flatness_check(
    p: Complex64,
    k: u32,
    w: &[Complex64],
    grid: &PeriodicGrid,
    s: f64,
    x0: f64,
) -> Result<FlatnessReport, MellinError> {
    let mut levels = Vec::new();
    let mut bounded = true;
    let c = sign_factorial(k);
    for eps in [0.1, 0.05] {
        if s - eps < 0.0 {
            return Err(MellinError::NegativeOrder(s - eps));
        }
        let mut prev: Option<f64> = None;
        for refine in [1.0, 4.0, 16.0] {
            let x_min = x0 / refine;
            let x_max = 2.0;
            let n = ((x_max / x_min).ln() / 0.05).ceil() as usize + 1;
            let x = LogGrid::new(x_min, x_max, n)?.nodes();
            let gk = potential_op(p, k, w, &x, grid)?;
            let ny = grid.len();
            let r: Vec<Complex64> = x
                .iter()
                .enumerate()
                .flat_map(|(i, &xi)| {
                    let base = power_log(p, k, xi) * c * phi(xi);
                    let gk = &gk.values;
                    (0..ny).map(move |j| gk[i * ny + j] - base * w[j])
                })
                .collect();
            let view = FieldView::new(&x, grid, 1, &r)?;
            let rep = k_norm(&view, s - eps, 0.5 - p.re + eps, None)?;
            let conv = rep.cone_part.converged && rep.value.is_finite();
            if let Some(pv) = prev {
                if rep.value > pv * 1.05 + 1e-14 {
                    bounded = false;
                }
            }
            bounded &= conv;
            prev = Some(rep.value);
            levels.push(FlatnessLevel { eps, x_min, value: rep.value, converged: conv });
        }
    }
    Ok(FlatnessReport { levels, bounded })
}

/// Smooth sample with prescribed asymptotics:
/// `phi(x) sum_j c_j (-1)^{k_j}/k_j! x^{-p_j} log^{k_j} x + phi(x) x^{flat} e^{-x}`.
pub fn asymptotic_sample(
    terms: &[(Complex64, u32, Complex64)],
    flat: Option<(f64, Complex64)>,
    x: &[f64],
) -> Vec<Complex64> {
    x.iter()
        .map(|&xi| {
            if xi <= 0.0 {
                return Complex64::new(f64::NAN, f64::NAN);
            }
            let ph = phi(xi);
            let mut v = Complex64::new(0.0, 0.0);
            for (p, k, c) in terms {
                v += *c * sign_factorial(*k) * power_log(*p, *k, xi);
            }
            if let Some((e, a)) = flat {
                v += a * xi.powf(e) * (-xi).exp();
            }
            v * ph
        })
        .collect()
}
