//! Fourier machinery on the periodic `y` grid (period `2 pi`).
//!
//! With `d = 0` the grid degenerates to a single point; every operation is
//! then the identity (or zero, for derivatives).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Uniform periodic grid on `[0, 2 pi)` with cached FFT plans.
#[derive(Clone)]
pub struct PeriodicGrid {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("len", &self.len).finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len
    }
}

impl PeriodicGrid {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "periodic grid needs at least one node");
        let mut planner = FftPlanner::new();
        Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    /// Single-point grid used for `d = 0`.
    pub fn point() -> Self {
        Self::new(1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_point(&self) -> bool {
        self.len == 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len)
            .map(|j| if self.len == 1 { 0.0 } else { 2.0 * PI * j as f64 / self.len as f64 })
            .collect()
    }

    /// Quadrature weight of one node: `2 pi / J`, or 1 for the point grid.
    pub fn weight(&self) -> f64 {
        if self.len == 1 {
            1.0
        } else {
            2.0 * PI / self.len as f64
        }
    }

    /// Integer wavenumber of FFT index `idx`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let n = self.len as i64;
        let i = idx as i64;
        if i <= (n - 1) / 2 {
            i
        } else {
            i - n
        }
    }

    /// True for the unpaired Nyquist mode of an even grid.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        self.len > 1 && self.len % 2 == 0 && idx == self.len / 2
    }

    /// Fourier coefficients `c_eta` with `w(y_j) = sum_eta c_eta e^{i eta y_j}`.
    pub fn coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len);
        let mut buf = values.to_vec();
        if self.len > 1 {
            self.forward.process(&mut buf);
            let scale = 1.0 / self.len as f64;
            for v in &mut buf {
                *v *= scale;
            }
        }
        buf
    }

    /// Inverse of [`coefficients`](Self::coefficients).
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(coeffs.len(), self.len);
        let mut buf = coeffs.to_vec();
        if self.len > 1 {
            self.inverse.process(&mut buf);
        }
        buf
    }

    /// Spectral `d/dy` of one periodic row, written into `out`.
    pub fn derivative_into(&self, values: &[Complex64], out: &mut [Complex64]) {
        if self.len == 1 {
            out[0] = Complex64::new(0.0, 0.0);
            return;
        }
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        for (idx, v) in buf.iter_mut().enumerate() {
            if self.is_nyquist(idx) {
                *v = Complex64::new(0.0, 0.0);
            } else {
                let k = self.wavenumber(idx) as f64;
                *v *= Complex64::new(0.0, k * scale);
            }
        }
        self.inverse.process(&mut buf);
        out.copy_from_slice(&buf);
    }

    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len];
        self.derivative_into(values, &mut out);
        out
    }

    /// Largest resolved wavenumber (0 for the point grid).
    pub fn max_wavenumber(&self) -> f64 {
        if self.len == 1 {
            0.0
        } else {
            ((self.len - 1) / 2) as f64
        }
    }
}

/// Japanese bracket `<eta> = (4 + |eta|^2)^{1/2}`.
pub fn bracket(eta: f64) -> f64 {
    (4.0 + eta * eta).sqrt()
}
