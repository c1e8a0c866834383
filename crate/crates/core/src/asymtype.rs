//! Truncated discrete asymptotic types.
//!
//! An asymptotic type records which pairs `(p, k)` may appear in a conormal
//! expansion `sum (-1)^k/k! x^{-p} log^k x u_pk(y)` near `x = 0`. Only the
//! finite window `1/2 - delta - theta < Re p < 1/2 - delta` is stored; the
//! multiplicity `m_p` means that `(p, k)` is present for `0 <= k < m_p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used when comparing singular exponents.
pub const EXPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymTypeError {
    #[error("exponent {re}{im:+}i violates Re p < 1/2 - delta = {bound}")]
    ExponentTooLarge { re: f64, im: f64, bound: f64 },
    #[error("exponent {re}{im:+}i lies on the cutoff line Re p = {line}")]
    ExponentOnCutoffLine { re: f64, im: f64, line: f64 },
    #[error("exponent {re}{im:+}i lies below the truncation window Re p > {line}")]
    ExponentBelowWindow { re: f64, im: f64, line: f64 },
    #[error("closure violated at {re}{im:+}i: {reason}")]
    ClosureViolation { re: f64, im: f64, reason: String },
    #[error("cutoff theta must be finite and >= 0, got {0}")]
    NegativeCutoff(f64),
    #[error("multiplicity of {re}{im:+}i must be positive")]
    ZeroMultiplicity { re: f64, im: f64 },
    #[error("exponent {re}{im:+}i listed twice")]
    DuplicateExponent { re: f64, im: f64 },
    #[error("non-finite exponent or order")]
    NonFinite,
    #[error("real scenario requires conjugate-closed type; {re}{im:+}i has no conjugate partner of equal multiplicity")]
    NotConjugateClosed { re: f64, im: f64 },
}

/// One stored singular exponent with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub p: Complex64,
    pub mult: u32,
}

/// A pair `(p, k)` of the asymptotic type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub p: Complex64,
    pub k: u32,
}

impl Pair {
    pub fn new(p: Complex64, k: u32) -> Self {
        Self { p, k }
    }

    pub fn real(p: f64, k: u32) -> Self {
        Self { p: Complex64::new(p, 0.0), k }
    }

    pub fn same_exponent(&self, other: &Pair) -> bool {
        exponents_equal(self.p, other.p)
    }

    pub fn approx_eq(&self, other: &Pair) -> bool {
        self.k == other.k && self.same_exponent(other)
    }

    /// Human-readable label, e.g. `(-0.5+0i,1)`.
    pub fn label(&self) -> String {
        format!("({}{:+}i,{})", self.p.re, self.p.im, self.k)
    }
}

pub fn exponents_equal(a: Complex64, b: Complex64) -> bool {
    (a.re - b.re).abs() <= EXPONENT_TOL && (a.im - b.im).abs() <= EXPONENT_TOL
}

/// Validated truncated asymptotic type.
///
/// Equality compares `delta`, `theta` and the multiplicity maps with the
/// exponent tolerance [`EXPONENT_TOL`].
#[derive(Debug, Clone)]
pub struct AsymptoticType {
    delta: f64,
    cutoff: f64,
    entries: Vec<Entry>,
}

impl PartialEq for AsymptoticType {
    fn eq(&self, other: &Self) -> bool {
        if (self.delta - other.delta).abs() > EXPONENT_TOL
            || (self.cutoff - other.cutoff).abs() > EXPONENT_TOL
            || self.entries.len() != other.entries.len()
        {
            return false;
        }
        self.entries
            .iter()
            .all(|e| other.multiplicity(e.p) == e.mult)
    }
}

impl AsymptoticType {
    /// Validates a multiplicity map against the truncation window and closure rules.
    pub fn validate(
        entries: &[(Complex64, u32)],
        delta: f64,
        cutoff: f64,
    ) -> Result<Self, AsymTypeError> {
        if !delta.is_finite() {
            return Err(AsymTypeError::NonFinite);
        }
        if !cutoff.is_finite() || cutoff < 0.0 {
            return Err(AsymTypeError::NegativeCutoff(cutoff));
        }
        let upper = 0.5 - delta;
        let line = upper - cutoff;
        let mut stored: Vec<Entry> = Vec::with_capacity(entries.len());
        for &(p, mult) in entries {
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(AsymTypeError::NonFinite);
            }
            if mult == 0 {
                return Err(AsymTypeError::ZeroMultiplicity { re: p.re, im: p.im });
            }
            if p.re >= upper {
                return Err(AsymTypeError::ExponentTooLarge { re: p.re, im: p.im, bound: upper });
            }
            if (p.re - line).abs() <= EXPONENT_TOL {
                return Err(AsymTypeError::ExponentOnCutoffLine { re: p.re, im: p.im, line });
            }
            if p.re < line {
                return Err(AsymTypeError::ExponentBelowWindow { re: p.re, im: p.im, line });
            }
            if stored.iter().any(|e| exponents_equal(e.p, p)) {
                return Err(AsymTypeError::DuplicateExponent { re: p.re, im: p.im });
            }
            stored.push(Entry { p, mult });
        }
        // downward closure inside the window, with monotone multiplicities
        for e in &stored {
            let below = e.p - 1.0;
            if below.re > line + EXPONENT_TOL {
                match stored.iter().find(|o| exponents_equal(o.p, below)) {
                    None => {
                        return Err(AsymTypeError::ClosureViolation {
                            re: e.p.re,
                            im: e.p.im,
                            reason: format!("p-1 = {}{:+}i missing inside window", below.re, below.im),
                        })
                    }
                    Some(o) if o.mult < e.mult => {
                        return Err(AsymTypeError::ClosureViolation {
                            re: e.p.re,
                            im: e.p.im,
                            reason: format!("m_(p-1) = {} < m_p = {}", o.mult, e.mult),
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        sort_entries(&mut stored);
        Ok(Self { delta, cutoff, entries: stored })
    }

    /// The empty type with the given window.
    pub fn empty(delta: f64, cutoff: f64) -> Result<Self, AsymTypeError> {
        Self::validate(&[], delta, cutoff)
    }

    /// Truncated Taylor type `{(-l, 0)}` for all `l` inside the window.
    pub fn taylor(delta: f64, cutoff: f64) -> Result<Self, AsymTypeError> {
        let upper = 0.5 - delta;
        let line = upper - cutoff;
        let mut entries = Vec::new();
        let mut l = 0.0_f64;
        // Taylor exponents start at the largest admissible non-positive integer
        while -l >= upper {
            l += 1.0;
        }
        while -l > line + EXPONENT_TOL {
            entries.push((Complex64::new(-l, 0.0), 1));
            l += 1.0;
        }
        Self::validate(&entries, delta, cutoff)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Upper bound `1/2 - delta` of the admissible exponents.
    pub fn upper_bound(&self) -> f64 {
        0.5 - self.delta
    }

    /// Position of the truncation line `1/2 - delta - theta`.
    pub fn cutoff_line(&self) -> f64 {
        0.5 - self.delta - self.cutoff
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `m_p`, zero when `p` is not stored.
    pub fn multiplicity(&self, p: Complex64) -> u32 {
        self.entries
            .iter()
            .find(|e| exponents_equal(e.p, p))
            .map_or(0, |e| e.mult)
    }

    pub fn contains(&self, pair: &Pair) -> bool {
        pair.k < self.multiplicity(pair.p)
    }

    /// All stored pairs in storage order.
    pub fn pairs(&self) -> Vec<Pair> {
        self.entries
            .iter()
            .flat_map(|e| (0..e.mult).map(move |k| Pair::new(e.p, k)))
            .collect()
    }

    pub fn len_pairs(&self) -> usize {
        self.entries.iter().map(|e| e.mult as usize).sum()
    }

    /// `T^rho P`: `(p, k)` belongs to the result iff `(p + rho, k)` belongs to `P`.
    pub fn shift(&self, rho: f64) -> Self {
        let mut entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|e| Entry { p: e.p - rho, mult: e.mult })
            .collect();
        sort_entries(&mut entries);
        Self { delta: self.delta + rho, cutoff: self.cutoff, entries }
    }

    /// Pairs ordered so that each pair follows everything it depends on.
    ///
    /// Primary key `Re p` descending, then `Im p` ascending for distinct
    /// exponents on the same vertical line, then `k` descending.
    pub fn cascade_order(&self) -> Vec<Pair> {
        let mut pairs = self.pairs();
        pairs.sort_by(|a, b| {
            b.p.re
                .partial_cmp(&a.p.re)
                .unwrap()
                .then(a.p.im.partial_cmp(&b.p.im).unwrap())
                .then(b.k.cmp(&a.k))
        });
        pairs
    }

    /// Checks closure under conjugation with equal multiplicities.
    pub fn validate_real(&self) -> Result<(), AsymTypeError> {
        for e in &self.entries {
            if self.multiplicity(e.p.conj()) != e.mult {
                return Err(AsymTypeError::NotConjugateClosed { re: e.p.re, im: e.p.im });
            }
        }
        Ok(())
    }

    pub fn to_config(&self) -> AsymptoticsConfig {
        AsymptoticsConfig {
            delta: self.delta,
            theta: self.cutoff,
            entries: self
                .entries
                .iter()
                .map(|e| EntryConfig { re: e.p.re, im: e.p.im, mult: e.mult })
                .collect(),
        }
    }
}

fn sort_entries(entries: &mut [Entry]) {
    entries.sort_by(|a, b| {
        b.p.re
            .partial_cmp(&a.p.re)
            .unwrap()
            .then(a.p.im.partial_cmp(&b.p.im).unwrap())
    });
}

/// Config fragment `[asymptotics]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub delta: f64,
    pub theta: f64,
    #[serde(default)]
    pub entries: Vec<EntryConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub mult: u32,
}

impl AsymptoticsConfig {
    pub fn build(&self) -> Result<AsymptoticType, AsymTypeError> {
        let entries: Vec<(Complex64, u32)> = self
            .entries
            .iter()
            .map(|e| (Complex64::new(e.re, e.im), e.mult))
            .collect();
        AsymptoticType::validate(&entries, self.delta, self.theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn truncated_taylor_type_is_valid() {
        let entries: Vec<_> = (0..4).map(|l| (c(-(l as f64)), 1)).collect();
        let p = AsymptoticType::validate(&entries, 0.0, 4.2).unwrap();
        assert_eq!(p.len_pairs(), 4);
        assert_eq!(p, AsymptoticType::taylor(0.0, 4.2).unwrap());
    }

    #[test]
    fn empty_type_is_valid() {
        for (d, th) in [(0.0, 0.0), (-3.0, 7.5), (2.5, 1.0)] {
            let p = AsymptoticType::validate(&[], d, th).unwrap();
            assert!(p.is_empty());
            assert!(p.cascade_order().is_empty());
        }
    }

    #[test]
    fn too_large_exponent_rejected() {
        let err = AsymptoticType::validate(&[(c(0.6), 1)], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, AsymTypeError::ExponentTooLarge { .. }));
        let err = AsymptoticType::validate(&[(c(0.5), 1)], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, AsymTypeError::ExponentTooLarge { .. }));
    }

    #[test]
    fn multiplicity_monotonicity_enforced() {
        let err =
            AsymptoticType::validate(&[(c(0.2), 2), (c(-0.8), 1)], 0.0, 2.0).unwrap_err();
        assert!(matches!(err, AsymTypeError::ClosureViolation { .. }));
    }

    #[test]
    fn missing_shadow_rejected() {
        let err = AsymptoticType::validate(&[(c(0.2), 1)], 0.0, 2.0).unwrap_err();
        assert!(matches!(err, AsymTypeError::ClosureViolation { .. }));
        // p - 1 outside the window is fine
        AsymptoticType::validate(&[(c(0.2), 1)], 0.0, 1.0).unwrap();
    }

    #[test]
    fn cutoff_line_and_window() {
        let err = AsymptoticType::validate(&[(c(-0.5), 1)], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, AsymTypeError::ExponentOnCutoffLine { .. }));
        let err = AsymptoticType::validate(&[(c(-1.5), 1)], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, AsymTypeError::ExponentBelowWindow { .. }));
        let err = AsymptoticType::validate(&[], 0.0, -0.1).unwrap_err();
        assert!(matches!(err, AsymTypeError::NegativeCutoff(_)));
    }

    #[test]
    fn shift_examples() {
        let p0 = AsymptoticType::taylor(0.0, 4.2).unwrap();
        let t1 = p0.shift(1.0);
        assert_eq!(t1.delta(), 1.0);
        let expected: Vec<_> = (0..4).map(|l| (c(-(l as f64) - 1.0), 1)).collect();
        assert_eq!(t1, AsymptoticType::validate(&expected, 1.0, 4.2).unwrap());
        assert_eq!(p0.shift(0.0), p0);
        assert_eq!(p0.shift(0.37).shift(-0.37), p0);
    }

    #[test]
    fn cascade_order_examples() {
        let p0 = AsymptoticType::taylor(0.0, 3.0).unwrap();
        let order = p0.cascade_order();
        let expect = [Pair::real(0.0, 0), Pair::real(-1.0, 0), Pair::real(-2.0, 0)];
        assert_eq!(order.len(), 3);
        for (a, b) in order.iter().zip(expect.iter()) {
            assert!(a.approx_eq(b));
        }

        let log = AsymptoticType::validate(&[(c(-0.3), 2)], 0.0, 1.5).unwrap();
        let order = log.cascade_order();
        assert!(order[0].approx_eq(&Pair::real(-0.3, 1)));
        assert!(order[1].approx_eq(&Pair::real(-0.3, 0)));

        let two = AsymptoticType::validate(&[(c(-1.3), 1), (c(-0.3), 1)], 0.0, 2.5).unwrap();
        let order = two.cascade_order();
        assert!(order[0].approx_eq(&Pair::real(-0.3, 0)));
        assert!(order[1].approx_eq(&Pair::real(-1.3, 0)));
    }

    #[test]
    fn real_mode_conjugation() {
        let p = Complex64::new(-0.3, 0.7);
        let ok = AsymptoticType::validate(&[(p, 1), (p.conj(), 1)], 0.0, 1.0).unwrap();
        ok.validate_real().unwrap();
        let bad = AsymptoticType::validate(&[(p, 1)], 0.0, 1.0).unwrap();
        assert!(bad.validate_real().is_err());
    }

    #[test]
    fn config_round_trip_via_toml() {
        let text = "delta = 0.0\ntheta = 3.0\nentries = [{re=-0.5, im=0.0, mult=2}, {re=-1.5, mult=2}]\n";
        let cfg: AsymptoticsConfig = toml::from_str(text).unwrap();
        let p = cfg.build().unwrap();
        let back = toml::to_string(&p.to_config()).unwrap();
        let cfg2: AsymptoticsConfig = toml::from_str(&back).unwrap();
        assert_eq!(cfg2.build().unwrap(), p);
        assert_eq!(cfg2.entries[0].re.to_bits(), (-0.5f64).to_bits());
    }
}
