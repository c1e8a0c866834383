//! Exact coefficient functions `c(t, y) = sum c_{n,m} t^n e^{i m y}`.
//!
//! The set is closed under sums, products, `d/dy`, conjugation and
//! evaluation in `t`, which keeps the symbol algebra exact up to rounding.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SymbolError;

/// Trigonometric-polynomial-in-`y`, polynomial-in-`t` coefficient.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Coef {
    terms: BTreeMap<(u32, i32), Complex64>,
}

impl Coef {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    /// `c t^n e^{i m y}`.
    pub fn monomial(t_pow: u32, freq: i32, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert((t_pow, freq), c);
        }
        Self { terms }
    }

    pub fn cos(m: i32) -> Self {
        let h = Complex64::new(0.5, 0.0);
        Self::monomial(0, m, h).add(&Self::monomial(0, -m, h))
    }

    pub fn sin(m: i32) -> Self {
        let h = Complex64::new(0.0, -0.5);
        Self::monomial(0, m, h).add(&Self::monomial(0, -m, -h))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, i32, Complex64)> + '_ {
        self.terms.iter().map(|(&(n, m), &c)| (n, m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert_add(&mut self, key: (u32, i32), c: Complex64) {
        let e = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Coef) -> Coef {
        let mut out = self.clone();
        for (&k, &c) in &other.terms {
            out.insert_add(k, c);
        }
        out
    }

    pub fn sub(&self, other: &Coef) -> Coef {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Coef {
        let mut out = Coef::zero();
        for (&k, &c) in &self.terms {
            out.insert_add(k, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Coef) -> Coef {
        let mut out = Coef::zero();
        for (&(n1, m1), &c1) in &self.terms {
            for (&(n2, m2), &c2) in &other.terms {
                out.insert_add((n1 + n2, m1 + m2), c1 * c2);
            }
        }
        out
    }

    /// `d/dy`.
    pub fn dy(&self) -> Coef {
        let mut out = Coef::zero();
        for (&(n, m), &c) in &self.terms {
            out.insert_add((n, m), c * Complex64::new(0.0, m as f64));
        }
        out
    }

    pub fn dy_n(&self, k: u32) -> Coef {
        (0..k).fold(self.clone(), |c, _| c.dy())
    }

    /// Pointwise complex conjugate as a function of `(t, y)`.
    pub fn conj(&self) -> Coef {
        let mut out = Coef::zero();
        for (&(n, m), &c) in &self.terms {
            out.insert_add((n, -m), c.conj());
        }
        out
    }

    pub fn eval(&self, t: f64, y: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(n, m), &c)| c * t.powi(n as i32) * Complex64::new(0.0, m as f64 * y).exp())
            .sum()
    }

    /// Freezes `t`, leaving a function of `y` only.
    pub fn at_time(&self, t: f64) -> Coef {
        let mut out = Coef::zero();
        for (&(n, m), &c) in &self.terms {
            out.insert_add((0, m), c * t.powi(n as i32));
        }
        out
    }

    pub fn depends_on_t(&self) -> bool {
        self.terms.keys().any(|&(n, _)| n > 0)
    }

    pub fn depends_on_y(&self) -> bool {
        self.terms.keys().any(|&(_, m)| m != 0)
    }

    pub fn max_freq(&self) -> i32 {
        self.terms.keys().map(|&(_, m)| m.abs()).max().unwrap_or(0)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn distance(&self, other: &Coef) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn parse(src: &str) -> Result<Coef, SymbolError> {
        let mut p = Parser { s: src.as_bytes(), pos: 0, src };
        let c = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(c)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(n, m), &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:e}{:+e}*i)", c.re, c.im)?;
            if n > 0 {
                write!(f, "*t^{n}")?;
            }
            if m != 0 {
                write!(f, "*exp({m}iy)")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Coef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coef {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Coef::real(v)),
            Raw::Text(s) => Coef::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Grammar:
/// `expr := term (('+'|'-') term)*`, `term := unary ('*' unary)*`,
/// `unary := '-' unary | atom ('^' int)?`,
/// `atom := number | 'i' | 't' | 'cos(' [int ['*']] 'y)' | 'sin(...)' | 'exp(' [sign][int]'iy)' | '(' expr ')'`.
struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> SymbolError {
        SymbolError::CoefParse(format!("{msg} at byte {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.s[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), SymbolError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {tok:?}")))
        }
    }

    fn expr(&mut self) -> Result<Coef, SymbolError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Coef, SymbolError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Coef, SymbolError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.scale(Complex64::new(-1.0, 0.0)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.uint()?;
            let mut out = Coef::real(1.0);
            for _ in 0..n {
                out = out.mul(&base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u32, SymbolError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        self.src[start..self.pos].parse().map_err(|_| self.err("bad integer"))
    }

    fn number(&mut self) -> Result<f64, SymbolError> {
        let start = self.pos;
        let s = self.s;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        self.src[start..self.pos].parse().map_err(|_| self.err("bad number"))
    }

    /// Optional integer multiplier before `y`, e.g. `2y`, `2*y`, `y`.
    fn freq_then(&mut self, tail: &str) -> Result<i32, SymbolError> {
        self.skip_ws();
        let mut sign = 1;
        if self.eat("-") {
            sign = -1;
        } else {
            self.eat("+");
        }
        let m = if self.peek().is_some_and(|c| c.is_ascii_digit()) { self.uint()? as i32 } else { 1 };
        self.eat("*");
        self.expect(tail)?;
        self.expect(")")?;
        Ok(sign * m)
    }

    fn atom(&mut self) -> Result<Coef, SymbolError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Coef::real(self.number()?)),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => {
                if self.eat("cos(") {
                    Ok(Coef::cos(self.freq_then("y")?))
                } else if self.eat("sin(") {
                    Ok(Coef::sin(self.freq_then("y")?))
                } else if self.eat("exp(") {
                    let m = self.freq_then("iy")?;
                    Ok(Coef::monomial(0, m, Complex64::new(1.0, 0.0)))
                } else if self.eat("i") {
                    Ok(Coef::constant(Complex64::new(0.0, 1.0)))
                } else if self.eat("t") {
                    Ok(Coef::monomial(1, 0, Complex64::new(1.0, 0.0)))
                } else {
                    Err(self.err("unexpected token"))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-13
    }

    #[test]
    fn parse_and_eval() {
        let c = Coef::parse("1.5 + 2*cos(y) - t^2*sin(3y) + i*0.5").unwrap();
        let (t, y): (f64, f64) = (0.7, 1.1);
        let want = Complex64::new(1.5 + 2.0 * y.cos() - t * t * (3.0 * y).sin(), 0.5);
        assert!(close(c.eval(t, y), want));
        let e = Coef::parse("exp(-2iy)*(1+t)").unwrap();
        assert!(close(e.eval(t, y), Complex64::new(0.0, -2.0 * y).exp() * (1.0 + t)));
        assert!(Coef::parse("cos(y").is_err());
        assert!(Coef::parse("2 q").is_err());
    }

    #[test]
    fn display_round_trips() {
        let c = Coef::parse("0.25 - 3*t*cos(2*y) + i*sin(y)").unwrap();
        let back = Coef::parse(&c.to_string()).unwrap();
        assert!(c.distance(&back) < 1e-15);
    }

    #[test]
    fn derivative_and_conjugate() {
        let c = Coef::parse("sin(2y) + i*cos(y)").unwrap();
        let (t, y): (f64, f64) = (0.0, 0.4);
        let want = Complex64::new(2.0 * (2.0 * y).cos(), -y.sin());
        assert!(close(c.dy().eval(t, y), want));
        assert!(close(c.conj().eval(t, y), c.eval(t, y).conj()));
    }
}
