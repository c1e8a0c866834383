//! Square matrices of exact coefficients.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::coef::Coef;
use super::SymbolError;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefMatrix {
    n: usize,
    data: Vec<Coef>,
}

impl CoefMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Coef::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Coef::real(1.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Coef) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Coef>>) -> Result<Self, SymbolError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(SymbolError::NotSquare);
        }
        Ok(Self { n, data: rows.into_iter().flatten().collect() })
    }

    /// Constant real matrix, row-major.
    pub fn from_real(n: usize, vals: &[f64]) -> Self {
        Self::from_fn(n, |i, j| Coef::real(vals[i * n + j]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Coef {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: Coef) {
        self.data[i * self.n + j] = c;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Coef::is_zero)
    }

    pub fn add(&self, o: &CoefMatrix) -> CoefMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j).add(o.get(i, j)))
    }

    pub fn sub(&self, o: &CoefMatrix) -> CoefMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j).sub(o.get(i, j)))
    }

    pub fn scale(&self, s: Complex64) -> CoefMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j).scale(s))
    }

    pub fn mul(&self, o: &CoefMatrix) -> CoefMatrix {
        Self::from_fn(self.n, |i, j| {
            (0..self.n).fold(Coef::zero(), |acc, k| acc.add(&self.get(i, k).mul(o.get(k, j))))
        })
    }

    /// Entrywise `d^k/dy^k`.
    pub fn dy_n(&self, k: u32) -> CoefMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j).dy_n(k))
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> CoefMatrix {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn eval(&self, t: f64, y: f64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).eval(t, y))
    }

    pub fn at_time(&self, t: f64) -> CoefMatrix {
        Self::from_fn(self.n, |i, j| self.get(i, j).at_time(t))
    }

    pub fn depends_on_t(&self) -> bool {
        self.data.iter().any(Coef::depends_on_t)
    }

    pub fn depends_on_y(&self) -> bool {
        self.data.iter().any(Coef::depends_on_y)
    }

    pub fn max_freq(&self) -> i32 {
        self.data.iter().map(Coef::max_freq).max().unwrap_or(0)
    }

    pub fn distance(&self, o: &CoefMatrix) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Coef::max_abs).fold(0.0, f64::max)
    }

    /// Symbolically Hermitian (`C = C^H` coefficient by coefficient).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.adjoint()) <= tol
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn rows(&self) -> Vec<Vec<Coef>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

impl Serialize for CoefMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoefMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Coef>>::deserialize(d)?;
        CoefMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
