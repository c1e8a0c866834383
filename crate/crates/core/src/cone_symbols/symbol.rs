//! Conormal symbols `sigma_c^{-j}(z) = sum C_{a,b}(t, y) z^a d_y^b` and their calculus.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::diffop::binom;
use super::matrix::CoefMatrix;
use super::operator::ConeOperator;
use super::SymbolError;
use crate::spectral::PeriodicGrid;

/// Matrix polynomial in `z` with `y`-differential-operator coefficients, Taylor order `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConormalSymbol {
    pub n: usize,
    pub j: u32,
    /// `(z power, d_y order) -> coefficient`.
    pub terms: BTreeMap<(u32, u32), CoefMatrix>,
}

impl ConormalSymbol {
    pub fn zero(n: usize, j: u32) -> Self {
        Self { n, j, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, zp: u32, yo: u32, c: CoefMatrix) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&(zp, yo)) {
            Some(e) => {
                *e = e.add(&c);
                if e.is_zero() {
                    self.terms.remove(&(zp, yo));
                }
            }
            None => {
                self.terms.insert((zp, yo), c);
            }
        }
    }

    pub fn coefficient(&self, zp: u32, yo: u32) -> CoefMatrix {
        self.terms.get(&(zp, yo)).cloned().unwrap_or_else(|| CoefMatrix::zeros(self.n))
    }

    pub fn z_degree(&self) -> u32 {
        self.terms.keys().map(|&(a, _)| a).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &ConormalSymbol) -> ConormalSymbol {
        let mut out = self.clone();
        for (&(a, b), c) in &o.terms {
            out.add_term(a, b, c.clone());
        }
        out
    }

    /// `z -> z - k`.
    pub fn shift(&self, k: f64) -> ConormalSymbol {
        let mut out = Self::zero(self.n, self.j);
        for (&(a, b), c) in &self.terms {
            for i in 0..=a {
                let w = binom(a, i) * (-k).powi((a - i) as i32);
                if w != 0.0 {
                    out.add_term(i, b, c.scale(Complex64::new(w, 0.0)));
                }
            }
        }
        out
    }

    /// Product as `y`-operators at equal `z` (Leibniz in `y`).
    pub fn compose_pointwise(&self, o: &ConormalSymbol, j: u32) -> ConormalSymbol {
        let mut out = Self::zero(self.n, j);
        for (&(a, b), c) in &self.terms {
            for (&(cc, e), d) in &o.terms {
                for l in 0..=b {
                    let w = binom(b, l);
                    out.add_term(a + cc, b - l + e, c.mul(&d.dy_n(l)).scale(Complex64::new(w, 0.0)));
                }
            }
        }
        out
    }

    /// `d/dz`.
    pub fn dz(&self) -> ConormalSymbol {
        let mut out = Self::zero(self.n, self.j);
        for (&(a, b), c) in &self.terms {
            if a > 0 {
                out.add_term(a - 1, b, c.scale(Complex64::new(a as f64, 0.0)));
            }
        }
        out
    }

    /// `d^r/dz^r / r!`.
    pub fn dz_scaled(&self, r: u32) -> ConormalSymbol {
        let mut s = self.clone();
        let mut f = 1.0;
        for i in 1..=r {
            s = s.dz();
            f *= i as f64;
        }
        s.scale(Complex64::new(1.0 / f, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> ConormalSymbol {
        let mut out = Self::zero(self.n, self.j);
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, c.scale(s));
        }
        out
    }

    /// Coefficient matrices of `d_y^b` after substituting `z`, frozen at `t`.
    pub fn at(&self, z: Complex64, t: f64) -> Vec<CoefMatrix> {
        let maxb = self.terms.keys().map(|&(_, b)| b).max().unwrap_or(0);
        let mut out = vec![CoefMatrix::zeros(self.n); maxb as usize + 1];
        for (&(a, b), c) in &self.terms {
            out[b as usize] = out[b as usize].add(&c.at_time(t).scale(z.powu(a)));
        }
        out
    }

    /// Applies the symbol at `(z, t)` to a field on the periodic grid, layout `[j * n + comp]`.
    pub fn apply_on_grid(&self, z: Complex64, t: f64, w: &[Complex64], grid: &PeriodicGrid) -> Vec<Complex64> {
        let n = self.n;
        let ny = grid.len();
        let mut out = vec![Complex64::new(0.0, 0.0); ny * n];
        if self.terms.is_empty() {
            return out;
        }
        let coeffs = self.at(z, t);
        // d_y^b w per component
        let mut deriv: Vec<Complex64> = w.to_vec();
        let y = grid.nodes();
        for (b, c) in coeffs.iter().enumerate() {
            if b > 0 {
                let mut next = vec![Complex64::new(0.0, 0.0); ny * n];
                for comp in 0..n {
                    let row: Vec<Complex64> = (0..ny).map(|j| deriv[j * n + comp]).collect();
                    let d = grid.derivative(&row);
                    for j in 0..ny {
                        next[j * n + comp] = d[j];
                    }
                }
                deriv = next;
            }
            if c.is_zero() {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                let m = c.eval(t, yj);
                for r in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s in 0..n {
                        acc += m[(r, s)] * deriv[j * n + s];
                    }
                    out[j * n + r] += acc;
                }
            }
        }
        out
    }

    /// Action on the single mode `v e^{i eta y}` at a point: returns the matrix multiplying `v`.
    pub fn eval_mode(&self, z: Complex64, t: f64, y: f64, eta: f64) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (&(a, b), c) in &self.terms {
            out += c.eval(t, y) * (z.powu(a) * Complex64::new(0.0, eta).powu(b));
        }
        out
    }

    /// Largest coefficient distance to another symbol.
    pub fn distance(&self, o: &ConormalSymbol) -> f64 {
        let keys: std::collections::BTreeSet<_> = self.terms.keys().chain(o.terms.keys()).copied().collect();
        keys.into_iter()
            .map(|(a, b)| self.coefficient(a, b).distance(&o.coefficient(a, b)))
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(CoefMatrix::max_abs).fold(0.0, f64::max)
    }

    pub fn dump(&self) -> SymbolDump {
        SymbolDump {
            j: self.j,
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| SymbolTermDump { z_power: a, y_order: b, coefficient: c.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymbolTermDump {
    pub z_power: u32,
    pub y_order: u32,
    pub coefficient: CoefMatrix,
}

/// JSON layout of a conormal symbol.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolDump {
    pub j: u32,
    pub terms: Vec<SymbolTermDump>,
}

/// `sigma_c^{-j}(z) = -A^(j) z + A_1^(j) d_y + B^(j)`.
pub fn mellin_symbol(op: &ConeOperator, j: usize) -> Result<ConormalSymbol, SymbolError> {
    let m = op.taylor_order();
    if j > m {
        return Err(SymbolError::TruncationExceeded { j, order: m });
    }
    let mut s = ConormalSymbol::zero(op.n, j as u32);
    s.add_term(1, 0, op.a_coef(j).scale(Complex64::new(-1.0, 0.0)));
    s.add_term(0, 1, op.a1_coef(j));
    s.add_term(0, 0, op.b_coef(j));
    Ok(s)
}

/// All symbols `sigma_c^{-j}`, `j = 0..=M`.
pub fn mellin_symbols(op: &ConeOperator) -> Vec<ConormalSymbol> {
    (0..=op.taylor_order()).map(|j| mellin_symbol(op, j).expect("j within order")).collect()
}

/// `sigma_c^{-l}(A o B)(z) = sum_{j+k=l} sigma_c^{-j}(A)(z - k) sigma_c^{-k}(B)(z)`.
pub fn compose_symbols(
    a: &[ConormalSymbol],
    b: &[ConormalSymbol],
    ell: usize,
) -> Result<ConormalSymbol, SymbolError> {
    if a.len() <= ell {
        return Err(SymbolError::MissingSymbol(a.len()));
    }
    if b.len() <= ell {
        return Err(SymbolError::MissingSymbol(b.len()));
    }
    let n = a[0].n;
    let mut out = ConormalSymbol::zero(n, ell as u32);
    for j in 0..=ell {
        let k = ell - j;
        out = out.add(&a[j].shift(k as f64).compose_pointwise(&b[k], ell as u32));
    }
    Ok(out)
}

/// `sigma_c^0(A^*)(z) = sigma_c^0(A)(1 - 2 delta - conj z)^*`, with the formal `y`-adjoint.
pub fn adjoint_symbol(s: &ConormalSymbol, delta: f64) -> ConormalSymbol {
    let kappa = 1.0 - 2.0 * delta;
    let mut out = ConormalSymbol::zero(s.n, s.j);
    for (&(a, b), c) in &s.terms {
        // (C w^a d^b)^* = conj(w)^a (-1)^b sum_l C(b,l) (d^l C^H) d^(b-l), conj(w) = kappa - z
        let ch = c.adjoint();
        let sb = if b % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..=a {
            let wi = binom(a, i) * (-1f64).powi(i as i32) * kappa.powi((a - i) as i32);
            if wi == 0.0 {
                continue;
            }
            for l in 0..=b {
                out.add_term(i, b - l, ch.dy_n(l).scale(Complex64::new(wi * sb * binom(b, l), 0.0)));
            }
        }
    }
    out
}
