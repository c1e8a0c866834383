//! Weighted Sobolev norms: the Mellin-side characterisation, the direct
//! `x^{-gamma}`-weighted `L^2` norm, the `K^{s,gamma}` norm and the
//! log-Sobolev norms of boundary traces.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::cutoff::phi;
use super::grid::{MellinQuadrature, WeightLine};
use super::transform::transform_unchecked;
use super::MellinError;
use crate::spectral::{bracket, PeriodicGrid};

/// Borrowed samples of an `N`-component field on `x-nodes x y-grid`.
///
/// Layout: `values[(i * J + j) * ncomp + n]`.
#[derive(Debug, Clone, Copy)]
pub struct FieldView<'a> {
    pub x: &'a [f64],
    pub y: &'a PeriodicGrid,
    pub ncomp: usize,
    pub values: &'a [Complex64],
}

impl<'a> FieldView<'a> {
    pub fn new(
        x: &'a [f64],
        y: &'a PeriodicGrid,
        ncomp: usize,
        values: &'a [Complex64],
    ) -> Result<Self, MellinError> {
        let expected = x.len() * y.len() * ncomp;
        if values.len() != expected {
            return Err(MellinError::ShapeMismatch { expected, got: values.len() });
        }
        Ok(Self { x, y, ncomp, values })
    }

    fn at(&self, i: usize, j: usize, n: usize) -> Complex64 {
        self.values[(i * self.y.len() + j) * self.ncomp + n]
    }

    /// One `x`-column for fixed `(j, n)`, restricted to node indices `range`.
    fn column(&self, j: usize, n: usize, range: std::ops::Range<usize>) -> Vec<Complex64> {
        range.map(|i| self.at(i, j, n)).collect()
    }

    fn check_finite(&self) -> Result<(), MellinError> {
        if self.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(MellinError::NonfiniteInput);
        }
        Ok(())
    }
}

/// Machine-readable norm record.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub name: String,
    pub s: f64,
    pub gamma: f64,
    pub value: f64,
    pub tail_diagnostic: f64,
    pub converged: bool,
}

/// `K^{s,gamma}` norm with both pieces reported.
#[derive(Debug, Clone, Serialize)]
pub struct KNormReport {
    pub value: f64,
    pub cone_part: NormReport,
    pub plain_part: f64,
}

fn y_norm_sq(grid: &PeriodicGrid, coeffs: &[Complex64], weight: impl Fn(f64) -> f64) -> f64 {
    let scale = if grid.is_point() { 1.0 } else { 2.0 * std::f64::consts::PI };
    let mut acc = 0.0;
    for (idx, c) in coeffs.iter().enumerate() {
        let eta = grid.wavenumber(idx) as f64;
        acc += weight(eta) * c.norm_sqr();
    }
    acc * scale
}

/// `H^{s,gamma}` norm through the Mellin side:
/// `(2 pi i)^{-1} int_{Gamma_{1/2-gamma}} 1/2 (||u~||_{H^s}^2 + <z>^{2s} ||u~||_{L^2}^2) dz`.
///
/// The factor `1/2` makes the `s = 0` value coincide with `||x^{-gamma} u||_{L^2}`.
/// All `x` nodes must be positive.
pub fn h_norm(
    field: &FieldView<'_>,
    s: f64,
    gamma: f64,
    line: Option<WeightLine>,
) -> Result<NormReport, MellinError> {
    if s < 0.0 {
        return Err(MellinError::NegativeOrder(s));
    }
    field.check_finite()?;
    let quad = MellinQuadrature::from_nodes(field.x)?;
    let beta = 0.5 - gamma;
    let line = line.map(|l| WeightLine { beta, ..l }).unwrap_or_else(|| quad.natural_line(beta));
    let nx = field.x.len();
    let ny = field.y.len();
    let columns: Vec<Vec<Complex64>> = (0..ny)
        .flat_map(|j| (0..field.ncomp).map(move |n| (j, n)))
        .map(|(j, n)| field.column(j, n, 0..nx))
        .collect();
    if columns.iter().all(|c| c.iter().all(|v| *v == Complex64::new(0.0, 0.0))) {
        return Ok(NormReport {
            name: "h_norm".into(),
            s,
            gamma,
            value: 0.0,
            tail_diagnostic: 0.0,
            converged: true,
        });
    }
    let tau = line.tau_nodes();
    let weights = line.tau_weights();
    let per_node: Vec<(f64, f64, bool)> = tau
        .par_iter()
        .map(|&t| {
            let z = line.z(t);
            let mut tail: f64 = 0.0;
            let mut ok = true;
            // u~(z, y_j) for each component
            let mut tilde = vec![Complex64::new(0.0, 0.0); ny * field.ncomp];
            for (c, col) in columns.iter().enumerate() {
                let mv = transform_unchecked(&quad, col, z);
                ok &= mv.converged;
                if mv.tail_diagnostic.is_finite() {
                    tail = tail.max(mv.tail_diagnostic);
                }
                tilde[c] = mv.value;
            }
            let zb = (4.0 + z.norm_sqr()).sqrt().powf(2.0 * s);
            let mut integrand = 0.0;
            for n in 0..field.ncomp {
                let row: Vec<Complex64> = (0..ny).map(|j| tilde[j * field.ncomp + n]).collect();
                let coeffs = field.y.coefficients(&row);
                let hs = y_norm_sq(field.y, &coeffs, |eta| bracket(eta).powf(2.0 * s));
                let l2 = y_norm_sq(field.y, &coeffs, |_| 1.0);
                integrand += 0.5 * (hs + zb * l2);
            }
            (integrand, tail, ok)
        })
        .collect();
    let mut total = 0.0;
    let mut tail = 0.0_f64;
    let mut converged = true;
    for ((v, tl, ok), w) in per_node.iter().zip(weights.iter()) {
        total += w * v;
        tail = tail.max(*tl);
        converged &= *ok;
    }
    let value = (total / (2.0 * std::f64::consts::PI)).max(0.0).sqrt();
    Ok(NormReport {
        name: "h_norm".into(),
        s,
        gamma,
        value,
        tail_diagnostic: if converged { tail } else { f64::INFINITY },
        converged,
    })
}

/// Direct `||x^{-gamma} u||_{L^2(dx dy)}`, trapezoid in `log x` with a power-law tail at `x_min`.
pub fn weighted_norm_direct(field: &FieldView<'_>, gamma: f64) -> Result<NormReport, MellinError> {
    field.check_finite()?;
    let quad = MellinQuadrature::from_nodes(field.x)?;
    let ny = field.y.len();
    let wy = field.y.weight();
    let integrand: Vec<f64> = (0..quad.len())
        .map(|i| {
            let mut s = 0.0;
            for j in 0..ny {
                for n in 0..field.ncomp {
                    s += field.at(i, j, n).norm_sqr();
                }
            }
            s * wy * quad.x[i].powf(1.0 - 2.0 * gamma)
        })
        .collect();
    let body: f64 = integrand.iter().zip(quad.weights.iter()).map(|(a, w)| a * w).sum();
    let (tail, converged) = lower_tail(&quad, &integrand);
    let total = body + tail;
    Ok(NormReport {
        name: "weighted_l2_direct".into(),
        s: 0.0,
        gamma,
        value: total.max(0.0).sqrt(),
        tail_diagnostic: if converged {
            if total > 0.0 {
                tail / total
            } else {
                0.0
            }
        } else {
            f64::INFINITY
        },
        converged,
    })
}

fn lower_tail(quad: &MellinQuadrature, integrand: &[f64]) -> (f64, bool) {
    let i0 = integrand[0];
    let i1 = integrand[1];
    if i0 == 0.0 {
        return (0.0, true);
    }
    if i1 == 0.0 {
        return (0.0, true);
    }
    let kappa = (i0 / i1).ln() / (quad.log_x[0] - quad.log_x[1]);
    if kappa <= 0.0 {
        (f64::INFINITY, false)
    } else {
        (i0 / kappa, true)
    }
}

/// Plain `H^s` norm of `(1 - phi) u` over `x in [1/2, x_max]`.
fn plain_part(field: &FieldView<'_>, s: f64) -> f64 {
    let nx = field.x.len();
    let ny = field.y.len();
    let wy = field.y.weight();
    let x_max = field.x[nx - 1];
    if x_max <= 0.5 {
        return 0.0;
    }
    if s == 0.0 {
        let mut acc = 0.0;
        for i in 0..nx - 1 {
            let h = field.x[i + 1] - field.x[i];
            let f = |i: usize| {
                let c = 1.0 - phi(field.x[i]);
                let mut t = 0.0;
                for j in 0..ny {
                    for n in 0..field.ncomp {
                        t += (c * field.at(i, j, n)).norm_sqr();
                    }
                }
                t * wy
            };
            acc += 0.5 * h * (f(i) + f(i + 1));
        }
        return acc.sqrt();
    }
    // resample onto a uniform grid, reflect evenly, multiplier norm
    let nu = 256usize;
    let len = x_max - 0.5;
    let hu = len / (nu - 1) as f64;
    let xu: Vec<f64> = (0..nu).map(|m| 0.5 + hu * m as f64).collect();
    let period = 2 * (nu - 1);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(period);
    let mut total = 0.0;
    for n in 0..field.ncomp {
        // x-transforms per y node
        let mut spec = vec![vec![Complex64::new(0.0, 0.0); ny]; period];
        for j in 0..ny {
            let mut line: Vec<Complex64> = xu
                .iter()
                .map(|&x| (1.0 - phi(x)) * interp(field, x, j, n))
                .collect();
            for m in (1..nu - 1).rev() {
                line.push(line[m]);
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                spec[k][j] = *v / period as f64;
            }
        }
        for (k, row) in spec.iter().enumerate() {
            let kk = if k <= period / 2 { k as f64 } else { k as f64 - period as f64 };
            let xi = std::f64::consts::PI * kk / len;
            let coeffs = field.y.coefficients(row);
            for (idx, c) in coeffs.iter().enumerate() {
                let eta = field.y.wavenumber(idx) as f64;
                total += (1.0 + xi * xi + eta * eta).powf(s) * c.norm_sqr();
            }
        }
    }
    // Parseval on the reflected period: half of it is the physical interval
    let yscale = if field.y.is_point() { 1.0 } else { 2.0 * std::f64::consts::PI };
    (total * (2.0 * len) * yscale * 0.5).sqrt()
}

fn interp(field: &FieldView<'_>, x: f64, j: usize, n: usize) -> Complex64 {
    let xs = field.x;
    let idx = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => return field.at(i, j, n),
        Err(i) => i,
    };
    if idx == 0 {
        return field.at(0, j, n);
    }
    if idx >= xs.len() {
        return field.at(xs.len() - 1, j, n);
    }
    let t = (x - xs[idx - 1]) / (xs[idx] - xs[idx - 1]);
    field.at(idx - 1, j, n) * (1.0 - t) + field.at(idx, j, n) * t
}

/// `K^{s,gamma}` norm: `sqrt(h_norm(phi u)^2 + ||(1 - phi) u||_{H^s}^2)`.
///
/// A node at `x = 0` (if present) carries no measure and is skipped by the cone part.
pub fn k_norm(
    field: &FieldView<'_>,
    s: f64,
    gamma: f64,
    line: Option<WeightLine>,
) -> Result<KNormReport, MellinError> {
    if s < 0.0 {
        return Err(MellinError::NegativeOrder(s));
    }
    field.check_finite()?;
    let start = if field.x[0] == 0.0 { 1 } else { 0 };
    let ny = field.y.len();
    let nc = field.ncomp;
    let xs = &field.x[start..];
    let cut: Vec<Complex64> = (start..field.x.len())
        .flat_map(|i| {
            let c = phi(field.x[i]);
            (0..ny * nc).map(move |r| (i, r, c))
        })
        .map(|(i, r, c)| c * field.values[i * ny * nc + r])
        .collect();
    let view = FieldView { x: xs, y: field.y, ncomp: nc, values: &cut };
    let mut cone = h_norm(&view, s, gamma, line)?;
    cone.name = "k_norm_cone".into();
    let plain = plain_part(field, s);
    Ok(KNormReport { value: (cone.value.powi(2) + plain * plain).sqrt(), cone_part: cone, plain_part: plain })
}

/// `K^{0,gamma}` norm by direct quadrature: `sqrt(||x^{-gamma} phi u||^2 + ||(1 - phi) u||^2)`.
///
/// Equal to `k_norm(.., 0, gamma, ..)` by Parseval, without the weight-line sweep.
/// A node at `x = 0` carries no measure. Non-finite input yields NaN.
pub fn k_norm_l2(field: &FieldView<'_>, gamma: f64) -> f64 {
    let start = if field.x[0] == 0.0 { 1 } else { 0 };
    let ny = field.y.len();
    let nc = field.ncomp;
    let xs = &field.x[start..];
    let cut: Vec<Complex64> = (start..field.x.len())
        .flat_map(|i| {
            let c = phi(field.x[i]);
            (0..ny * nc).map(move |r| (i, r, c))
        })
        .map(|(i, r, c)| c * field.values[i * ny * nc + r])
        .collect();
    let view = FieldView { x: xs, y: field.y, ncomp: nc, values: &cut };
    let cone = match weighted_norm_direct(&view, gamma) {
        Ok(r) => r.value,
        Err(_) => return f64::NAN,
    };
    let plain = plain_part(field, 0.0);
    (cone * cone + plain * plain).sqrt()
}

/// `||w||_{H^{s,<k>}}` with multiplier `<eta>^s log^k <eta>` on the periodic grid.
pub fn log_sobolev_norm(w: &[Complex64], grid: &PeriodicGrid, s: f64, k: i32) -> f64 {
    let coeffs = grid.coefficients(w);
    y_norm_sq(grid, &coeffs, |eta| {
        let b = bracket(eta);
        (b.powf(s) * b.ln().powi(k)).powi(2)
    })
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::super::grid::LogGrid;
    use super::*;

    #[test]
    fn negative_order_rejected() {
        let x = [0.1, 0.2];
        let g = PeriodicGrid::point();
        let v = [Complex64::new(1.0, 0.0); 2];
        let f = FieldView::new(&x, &g, 1, &v).unwrap();
        assert!(matches!(h_norm(&f, -0.5, 0.0, None), Err(MellinError::NegativeOrder(_))));
    }

    #[test]
    fn zero_field_zero_norms() {
        let x = LogGrid::new(1e-6, 4.0, 200).unwrap().nodes();
        let g = PeriodicGrid::new(8);
        let v = vec![Complex64::new(0.0, 0.0); x.len() * 8];
        let f = FieldView::new(&x, &g, 1, &v).unwrap();
        assert_eq!(h_norm(&f, 1.0, 0.3, None).unwrap().value, 0.0);
        assert_eq!(k_norm(&f, 0.0, 0.0, None).unwrap().value, 0.0);
        assert_eq!(k_norm(&f, 1.5, 0.0, None).unwrap().value, 0.0);
    }

    #[test]
    fn log_sobolev_single_mode_and_zero_mode() {
        let g = PeriodicGrid::new(16);
        let y = g.nodes();
        let w: Vec<Complex64> = y.iter().map(|&t| Complex64::new(0.0, 3.0 * t).exp()).collect();
        let b = bracket(3.0);
        let expect = b.powf(1.5) * b.ln().powi(2) * (2.0 * std::f64::consts::PI).sqrt();
        let got = log_sobolev_norm(&w, &g, 1.5, 2);
        assert!((got - expect).abs() < 1e-12 * expect);

        let p = PeriodicGrid::point();
        let got = log_sobolev_norm(&[Complex64::new(1.0, 0.0)], &p, 0.7, 3);
        let expect = 2f64.powf(0.7) * 2f64.ln().powi(3);
        assert!((got - expect).abs() < 1e-14);
        assert!(got > 0.0);
    }

    #[test]
    fn log_sobolev_k0_is_hs() {
        let g = PeriodicGrid::new(8);
        let w: Vec<Complex64> = g.nodes().iter().map(|&t| Complex64::new(t.cos(), t.sin() * 0.2)).collect();
        let hs = log_sobolev_norm(&w, &g, 0.0, 0);
        let l2: f64 = w.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.weight();
        assert!((hs - l2.sqrt()).abs() < 1e-12);
    }
}
