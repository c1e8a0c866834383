//! General cone differential operators `sum x^m C(t, y) (x d_x)^a d_y^b`.
//!
//! Composition and formal adjoints are computed directly on operators
//! (commuting `x d_x` past powers of `x`, Leibniz in `y`), independently of
//! the conormal symbol calculus.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::matrix::CoefMatrix;
use super::operator::ConeOperator;
use super::symbol::ConormalSymbol;

pub(crate) fn binom(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Terms keyed by `(m, a, b)`: `x^m C (x d_x)^a d_y^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeDiffOp {
    pub n: usize,
    pub terms: BTreeMap<(u32, u32, u32), CoefMatrix>,
}

impl ConeDiffOp {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    fn add_term(&mut self, key: (u32, u32, u32), c: CoefMatrix) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(e) => {
                *e = e.add(&c);
                if e.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    /// `x A d_x + A_1 d_y + B` with all Taylor terms.
    pub fn from_operator(op: &ConeOperator) -> Self {
        let mut out = Self::zero(op.n);
        for (m, c) in op.a.iter().enumerate() {
            out.add_term((m as u32, 1, 0), c.clone());
        }
        for (m, c) in op.a1.iter().enumerate() {
            out.add_term((m as u32, 0, 1), c.clone());
        }
        for (m, c) in op.b.iter().enumerate() {
            out.add_term((m as u32, 0, 0), c.clone());
        }
        out
    }

    /// `self o other`.
    pub fn compose(&self, other: &ConeDiffOp) -> ConeDiffOp {
        let mut out = Self::zero(self.n);
        for (&(m, a, b), c) in &self.terms {
            for (&(n, cc, e), d) in &other.terms {
                // (x d_x)^a x^n = x^n (x d_x + n)^a
                for i in 0..=a {
                    let wi = binom(a, i) * (n as f64).powi((a - i) as i32);
                    if wi == 0.0 {
                        continue;
                    }
                    // d_y^b D = sum_l C(b, l) (d_y^l D) d_y^(b - l)
                    for l in 0..=b {
                        let w = wi * binom(b, l);
                        let coef = c.mul(&d.dy_n(l)).scale(Complex64::new(w, 0.0));
                        out.add_term((m + n, i + cc, b - l + e), coef);
                    }
                }
            }
        }
        out
    }

    /// Formal adjoint in `L^2(x^{-2 delta} dx dy)`, where `(x d_x)^* = -x d_x - (1 - 2 delta)`.
    pub fn adjoint(&self, delta: f64) -> ConeDiffOp {
        let kappa = 1.0 - 2.0 * delta;
        let mut out = Self::zero(self.n);
        for (&(m, a, b), c) in &self.terms {
            // (x^m C (x d_x)^a d^b)^* = x^m (-x d_x - m - kappa)^a (-1)^b sum_l C(b,l) (d^l C^H) d^(b-l)
            let shift = -(m as f64) - kappa;
            let ch = c.adjoint();
            let sb = if b % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..=a {
                // (-x d_x + shift)^a = sum_i C(a,i) (-1)^i (x d_x)^i shift^(a-i)
                let wi = binom(a, i) * (-1f64).powi(i as i32) * shift.powi((a - i) as i32);
                if wi == 0.0 {
                    continue;
                }
                for l in 0..=b {
                    let w = wi * sb * binom(b, l);
                    out.add_term((m, i, b - l), ch.dy_n(l).scale(Complex64::new(w, 0.0)));
                }
            }
        }
        out
    }

    /// Conormal symbol of Taylor order `j`, read off with `x d_x <-> -z`.
    pub fn conormal(&self, j: u32) -> ConormalSymbol {
        let mut s = ConormalSymbol::zero(self.n, j);
        for (&(m, a, b), c) in &self.terms {
            if m == j {
                let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
                s.add_term(a, b, c.scale(Complex64::new(sign, 0.0)));
            }
        }
        s
    }
}
