//! Coefficient data of `d_t u + x A d_x u + sum A_j d_j u + B u = f`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::CoefMatrix;
use super::SymbolError;

/// How the operator is expected to be symmetrized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Hyperbolicity {
    /// `A`, `A_j` Hermitian; `b = I`.
    Symmetric,
    /// Distinct real eigenvalues of the compressed symbol on the unit sphere.
    Strict,
    /// Not declared symmetrizable.
    #[default]
    None,
}

/// Cone operator with `x`-Taylor polynomial coefficients: `A = sum_m x^m A^(m)(t, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeOperator {
    pub n: usize,
    pub d: usize,
    #[serde(default)]
    pub delta: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Taylor coefficients of `A`, index `m` multiplies `x^m`.
    #[serde(rename = "A")]
    pub a: Vec<CoefMatrix>,
    /// Taylor coefficients of `A_1` (empty when `d = 0`).
    #[serde(rename = "A1", default)]
    pub a1: Vec<CoefMatrix>,
    #[serde(rename = "B", default)]
    pub b: Vec<CoefMatrix>,
    #[serde(default)]
    pub hyperbolicity: Hyperbolicity,
    /// Truncation order `M`; defaults to the longest coefficient list.
    #[serde(default)]
    pub taylor_order: Option<usize>,
}

fn eval_poly(poly: &[CoefMatrix], n: usize, t: f64, x: f64, y: f64) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(n, n);
    let mut xm = 1.0;
    for c in poly {
        if !c.is_zero() {
            out += c.eval(t, y) * Complex64::new(xm, 0.0);
        }
        xm *= x;
    }
    out
}

impl ConeOperator {
    pub fn new(
        n: usize,
        d: usize,
        delta: f64,
        t_final: f64,
        a: Vec<CoefMatrix>,
        a1: Vec<CoefMatrix>,
        b: Vec<CoefMatrix>,
    ) -> Result<Self, SymbolError> {
        let op = Self { n, d, delta, t_final, a, a1, b, hyperbolicity: Hyperbolicity::None, taylor_order: None };
        op.validate()?;
        Ok(op)
    }

    pub fn with_hyperbolicity(mut self, h: Hyperbolicity) -> Self {
        self.hyperbolicity = h;
        self
    }

    pub fn validate(&self) -> Result<(), SymbolError> {
        if self.n == 0 {
            return Err(SymbolError::InvalidOperator("system size must be positive".into()));
        }
        if self.d > 1 {
            return Err(SymbolError::InvalidOperator(format!("d = {} not supported (d in {{0, 1}})", self.d)));
        }
        if self.d == 0 && self.a1.iter().any(|m| !m.is_zero()) {
            return Err(SymbolError::InvalidOperator("A1 given with d = 0".into()));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(SymbolError::InvalidOperator("T must be positive".into()));
        }
        for (name, poly) in [("A", &self.a), ("A1", &self.a1), ("B", &self.b)] {
            for m in poly.iter() {
                if m.dim() != self.n {
                    return Err(SymbolError::DimensionMismatch(format!(
                        "{name} coefficient is {}x{}, expected {}",
                        m.dim(),
                        m.dim(),
                        self.n
                    )));
                }
                if self.d == 0 && m.depends_on_y() {
                    return Err(SymbolError::InvalidOperator(format!("{name} depends on y with d = 0")));
                }
            }
        }
        if let Some(mt) = self.taylor_order {
            let longest = self.a.len().max(self.a1.len()).max(self.b.len());
            if longest > mt + 1 {
                return Err(SymbolError::InvalidOperator(format!(
                    "coefficients of x-degree {} exceed taylor_order {mt}",
                    longest - 1
                )));
            }
        }
        Ok(())
    }

    /// Truncation order `M`.
    pub fn taylor_order(&self) -> usize {
        self.taylor_order
            .unwrap_or_else(|| self.a.len().max(self.a1.len()).max(self.b.len()).max(1) - 1)
    }

    /// `m`-th Taylor coefficient (zero past the stored list).
    pub fn a_coef(&self, m: usize) -> CoefMatrix {
        self.a.get(m).cloned().unwrap_or_else(|| CoefMatrix::zeros(self.n))
    }

    pub fn a1_coef(&self, m: usize) -> CoefMatrix {
        self.a1.get(m).cloned().unwrap_or_else(|| CoefMatrix::zeros(self.n))
    }

    pub fn b_coef(&self, m: usize) -> CoefMatrix {
        self.b.get(m).cloned().unwrap_or_else(|| CoefMatrix::zeros(self.n))
    }

    pub fn eval_a(&self, t: f64, x: f64, y: f64) -> DMatrix<Complex64> {
        eval_poly(&self.a, self.n, t, x, y)
    }

    pub fn eval_a1(&self, t: f64, x: f64, y: f64) -> DMatrix<Complex64> {
        eval_poly(&self.a1, self.n, t, x, y)
    }

    pub fn eval_b(&self, t: f64, x: f64, y: f64) -> DMatrix<Complex64> {
        eval_poly(&self.b, self.n, t, x, y)
    }

    pub fn depends_on_t(&self) -> bool {
        self.a.iter().chain(&self.a1).chain(&self.b).any(CoefMatrix::depends_on_t)
    }

    /// `A`, `A_1` symbolically Hermitian at every Taylor order.
    pub fn is_symmetric(&self) -> bool {
        self.a.iter().chain(&self.a1).all(|m| m.is_hermitian(1e-14))
    }

    /// `A(t, x, y)` is diagonal everywhere.
    pub fn a_is_diagonal(&self) -> bool {
        self.a.iter().all(CoefMatrix::is_diagonal)
    }

    pub fn has_transport(&self) -> bool {
        self.d == 1 && self.a1.iter().any(|m| !m.is_zero())
    }

    /// Copy with the zeroth-order term replaced by `-B` (negative-control operator).
    pub fn with_flipped_b(&self) -> Self {
        let mut o = self.clone();
        o.b = o.b.iter().map(|m| m.scale(Complex64::new(-1.0, 0.0))).collect();
        o
    }

    /// Largest `|y|`-frequency appearing in the coefficients.
    pub fn max_freq(&self) -> i32 {
        self.a.iter().chain(&self.a1).chain(&self.b).map(CoefMatrix::max_freq).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::super::coef::Coef;
    use super::*;

    #[test]
    fn taylor_evaluation() {
        let a0 = CoefMatrix::from_real(1, &[2.0]);
        let a1 = CoefMatrix::from_fn(1, |_, _| Coef::parse("cos(y)").unwrap());
        let op = ConeOperator::new(1, 1, 0.0, 1.0, vec![a0, a1], vec![], vec![]).unwrap();
        let v = op.eval_a(0.0, 0.5, 0.3)[(0, 0)];
        assert!((v.re - (2.0 + 0.5 * 0.3f64.cos())).abs() < 1e-15);
        assert_eq!(op.taylor_order(), 1);
        assert!(op.eval_b(0.0, 0.1, 0.0).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        let a0 = CoefMatrix::from_real(2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(ConeOperator::new(1, 0, 0.0, 1.0, vec![a0.clone()], vec![], vec![]).is_err());
        assert!(ConeOperator::new(2, 0, 0.0, 1.0, vec![a0.clone()], vec![a0.clone()], vec![]).is_err());
        assert!(ConeOperator::new(2, 2, 0.0, 1.0, vec![a0], vec![], vec![]).is_err());
    }
}
