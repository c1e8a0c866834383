//! Quadrature grids in `log x` and along weight lines `Re z = beta`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MellinError;

/// Geometric grid `x_i = x_min * r^i`, `i = 0..n_points`, ending at `x_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self { x_min: 1e-8, x_max: 40.0, n_points: 4096 }
    }
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, MellinError> {
        let g = Self { x_min, x_max, n_points };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<(), MellinError> {
        if !(self.x_min > 0.0 && self.x_max > self.x_min && self.x_max.is_finite() && self.n_points >= 2)
        {
            return Err(MellinError::InvalidGrid(format!(
                "log grid needs 0 < x_min < x_max and n >= 2, got ({}, {}, {})",
                self.x_min, self.x_max, self.n_points
            )));
        }
        Ok(())
    }

    /// Spacing in `log x`.
    pub fn log_step(&self) -> f64 {
        (self.x_max / self.x_min).ln() / (self.n_points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let l0 = self.x_min.ln();
        let h = self.log_step();
        let mut x: Vec<f64> = (0..self.n_points).map(|i| (l0 + h * i as f64).exp()).collect();
        x[0] = self.x_min;
        x[self.n_points - 1] = self.x_max;
        x
    }

    pub fn quadrature(&self) -> MellinQuadrature {
        MellinQuadrature::from_nodes(&self.nodes()).expect("validated log grid")
    }

    /// Weight-line spacing that keeps `|u~|^2` free of aliasing on this grid.
    pub fn max_dtau(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.x_max / self.x_min).ln()
    }
}

/// Trapezoid rule in `xi = log x` on arbitrary increasing positive nodes.
#[derive(Debug, Clone)]
pub struct MellinQuadrature {
    pub x: Vec<f64>,
    pub log_x: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MellinQuadrature {
    pub fn from_nodes(x: &[f64]) -> Result<Self, MellinError> {
        if x.len() < 2 {
            return Err(MellinError::InvalidGrid("need at least two nodes".into()));
        }
        if x[0] <= 0.0 || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MellinError::InvalidGrid(
                "nodes must be positive and strictly increasing".into(),
            ));
        }
        let log_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let n = x.len();
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = log_x[i + 1] - log_x[i];
            weights[i] += 0.5 * h;
            weights[i + 1] += 0.5 * h;
        }
        Ok(Self { x: x.to_vec(), log_x, weights })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Extent of the grid in `log x`.
    pub fn log_extent(&self) -> f64 {
        self.log_x[self.len() - 1] - self.log_x[0]
    }

    /// Smallest spacing in `log x`.
    pub fn min_log_step(&self) -> f64 {
        self.log_x
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Weight line resolving this quadrature: Nyquist range in `tau`, spacing below the aliasing bound.
    pub fn natural_line(&self, beta: f64) -> WeightLine {
        let tau_max = std::f64::consts::PI / self.min_log_step();
        let dtau = 0.8 * 2.0 * std::f64::consts::PI / self.log_extent();
        WeightLine { beta, tau_max, dtau }
    }
}

/// Symmetric uniform `tau` grid on `Re z = beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightLine {
    pub beta: f64,
    pub tau_max: f64,
    pub dtau: f64,
}

impl WeightLine {
    /// Reference line: `|tau| <= 200`, `dtau = 0.05`.
    pub fn reference(beta: f64) -> Self {
        Self { beta, tau_max: 200.0, dtau: 0.05 }
    }

    pub fn n_nodes(&self) -> usize {
        2 * (self.tau_max / self.dtau).round() as usize + 1
    }

    pub fn tau_nodes(&self) -> Vec<f64> {
        let half = (self.tau_max / self.dtau).round() as i64;
        (-half..=half).map(|k| k as f64 * self.dtau).collect()
    }

    /// Trapezoid weights in `tau`.
    pub fn tau_weights(&self) -> Vec<f64> {
        let n = self.n_nodes();
        let mut w = vec![self.dtau; n];
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
        w
    }

    pub fn z(&self, tau: f64) -> Complex64 {
        Complex64::new(self.beta, tau)
    }
}

/// Samples of a Mellin-side function on a weight line.
#[derive(Debug, Clone)]
pub struct WeightLineSamples {
    pub line: WeightLine,
    pub tau: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl WeightLineSamples {
    pub fn from_fn(line: WeightLine, f: impl Fn(Complex64) -> Complex64) -> Self {
        let tau = line.tau_nodes();
        let values = tau.iter().map(|&t| f(line.z(t))).collect();
        Self { line, tau, values }
    }

    /// Largest endpoint magnitude relative to the peak; small means the truncation is harmless.
    pub fn decay_diagnostic(&self) -> f64 {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        self.values[0].norm().max(self.values[n - 1].norm()) / peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_is_geometric() {
        let g = LogGrid::new(1e-3, 10.0, 50).unwrap();
        let x = g.nodes();
        let r = x[1] / x[0];
        for w in x.windows(2) {
            assert!((w[1] / w[0] - r).abs() < 1e-12);
        }
        assert_eq!(x[0], 1e-3);
        assert_eq!(x[49], 10.0);
    }

    #[test]
    fn weight_line_symmetric() {
        let l = WeightLine::reference(0.5);
        let t = l.tau_nodes();
        assert_eq!(t.len(), l.n_nodes());
        for (a, b) in t.iter().zip(t.iter().rev()) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(LogGrid::new(0.0, 1.0, 10).is_err());
        assert!(MellinQuadrature::from_nodes(&[1.0, 0.5]).is_err());
    }
}
