//! Initial data and forcing built from closed-form terms and potential generators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::asymtype::{exponents_equal, AsymptoticType, Pair};
use crate::cone_symbols::{Coef, ConeOperator};
use crate::interior::{Forcing, GridField, SpaceGrid};
use crate::mellin::{phi, potential_op};
use crate::spectral::PeriodicGrid;
use crate::trace_cascade::TraceData;

/// One summand of `u0` or `f`; `w` holds one `(t, y)`-expression per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataTerm {
    /// `Gamma_pk w`.
    Potential {
        p_re: f64,
        #[serde(default)]
        p_im: f64,
        #[serde(default)]
        k: u32,
        w: Vec<Coef>,
    },
    /// `phi(x) x^exponent w(t, y)`.
    Power { exponent: f64, w: Vec<Coef> },
}

impl DataTerm {
    pub fn w(&self) -> &[Coef] {
        match self {
            DataTerm::Potential { w, .. } | DataTerm::Power { w, .. } => w,
        }
    }

    /// The pair whose trace this term carries.
    pub fn pair(&self) -> Pair {
        match *self {
            DataTerm::Potential { p_re, p_im, k, .. } => Pair::new(Complex64::new(p_re, p_im), k),
            DataTerm::Power { exponent, .. } => Pair::real(-exponent, 0),
        }
    }

    fn sample_w(&self, n: usize, t: f64, y: &[f64]) -> Vec<Complex64> {
        y.iter().map(|&yy| self.w()[n].eval(t, yy)).collect()
    }

    /// Adds the term on the nodes `x` (any order, `x >= 0`) into `out[(i * J + j) * N + n]`.
    pub fn accumulate(&self, t: f64, x: &[f64], y: &PeriodicGrid, ncomp: usize, out: &mut [Complex64]) {
        let nodes = y.nodes();
        let ny = y.len();
        for n in 0..ncomp {
            let w = self.sample_w(n, t, &nodes);
            if w.iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            match *self {
                DataTerm::Potential { p_re, p_im, k, .. } => {
                    let field = potential_op(Complex64::new(p_re, p_im), k, &w, x, y).expect("w sampled on the grid");
                    for (idx, v) in field.values.iter().enumerate() {
                        out[idx * ncomp + n] += *v;
                    }
                }
                DataTerm::Power { exponent, .. } => {
                    for (i, &xi) in x.iter().enumerate() {
                        let s = if xi == 0.0 {
                            if exponent == 0.0 {
                                1.0
                            } else {
                                0.0
                            }
                        } else {
                            phi(xi) * xi.powf(exponent)
                        };
                        for j in 0..ny {
                            out[(i * ny + j) * ncomp + n] += w[j] * s;
                        }
                    }
                }
            }
        }
    }
}

/// `[data]`: `u0` and `f` as sums of [`DataTerm`]s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub u0: Vec<DataTerm>,
    pub f: Vec<DataTerm>,
}

fn check_term(term: &DataTerm, op: &ConeOperator, ptype: &AsymptoticType, forcing: bool) -> Result<(), HarnessError> {
    let v = |m: String| Err(HarnessError::Validation(m));
    let what = if forcing { "f" } else { "u0" };
    if term.w().len() != op.n {
        return v(format!("{what} term has {} components, expected {}", term.w().len(), op.n));
    }
    if !forcing && term.w().iter().any(Coef::depends_on_t) {
        return v("u0 term depends on t".into());
    }
    if op.d == 0 && term.w().iter().any(Coef::depends_on_y) {
        return v(format!("{what} term depends on y with d = 0"));
    }
    let pair = term.pair();
    let regular_at_zero = pair.p.re < 0.0 || (pair.p.norm() == 0.0 && pair.k == 0);
    if !regular_at_zero {
        return v(format!("{what} term {} is not finite at x = 0", pair.label()));
    }
    match term {
        DataTerm::Potential { .. } => {
            if !ptype.contains(&pair) {
                return v(format!("{what} pair {} is not in the asymptotic type", pair.label()));
            }
        }
        DataTerm::Power { exponent, .. } => {
            let flat = *exponent > ptype.delta() + ptype.cutoff() - 0.5;
            if !flat && !ptype.contains(&pair) {
                return v(format!(
                    "{what} power x^{exponent} is neither a pair of the type nor flat (needs exponent > {})",
                    ptype.delta() + ptype.cutoff() - 0.5
                ));
            }
        }
    }
    Ok(())
}

impl DataConfig {
    pub fn validate(&self, op: &ConeOperator, ptype: &AsymptoticType) -> Result<(), HarnessError> {
        for t in &self.u0 {
            check_term(t, op, ptype, false)?;
        }
        for t in &self.f {
            check_term(t, op, ptype, true)?;
        }
        Ok(())
    }

    pub fn initial_field(&self, grid: &SpaceGrid, ncomp: usize) -> GridField {
        let mut u = GridField::zeros(grid, ncomp, 0.0);
        for term in &self.u0 {
            term.accumulate(0.0, &grid.x, &grid.y, ncomp, &mut u.values);
        }
        u
    }

    pub fn forcing_field(&self, grid: &SpaceGrid, ncomp: usize, t: f64) -> GridField {
        let mut f = GridField::zeros(grid, ncomp, t);
        for term in &self.f {
            term.accumulate(t, &grid.x, &grid.y, ncomp, &mut f.values);
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.u0.iter().chain(&self.f).all(|t| t.w().iter().all(Coef::is_zero))
    }
}

/// [`Forcing`] evaluating the `f` terms row by row.
pub struct ScenarioForcing<'a> {
    terms: &'a [DataTerm],
    y: PeriodicGrid,
}

impl<'a> ScenarioForcing<'a> {
    pub fn new(data: &'a DataConfig, y: &PeriodicGrid) -> Self {
        Self { terms: &data.f, y: y.clone() }
    }
}

impl Forcing for ScenarioForcing<'_> {
    fn row(&self, t: f64, x: f64, _y: &[f64], ncomp: usize, out: &mut [Complex64]) {
        out.fill(Complex64::new(0.0, 0.0));
        for term in self.terms {
            term.accumulate(t, &[x], &self.y, ncomp, out);
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.w().iter().all(Coef::is_zero))
    }
}

/// [`TraceData`] of the scenario: the trace of a term is its `w` at its own pair and zero elsewhere.
pub struct ScenarioTraceData<'a> {
    data: &'a DataConfig,
}

impl<'a> ScenarioTraceData<'a> {
    pub fn new(data: &'a DataConfig) -> Self {
        Self { data }
    }
}

fn matches(term: &DataTerm, pair: &Pair) -> bool {
    let q = term.pair();
    q.k == pair.k && exponents_equal(q.p, pair.p)
}

fn trace_of(terms: &[DataTerm], pair: &Pair, t: f64, y: &[f64], ncomp: usize, out: &mut [Complex64]) {
    out.fill(Complex64::new(0.0, 0.0));
    for term in terms.iter().filter(|term| matches(term, pair)) {
        for (j, &yy) in y.iter().enumerate() {
            for n in 0..ncomp {
                out[j * ncomp + n] += term.w()[n].eval(t, yy);
            }
        }
    }
}

impl TraceData for ScenarioTraceData<'_> {
    fn initial(&self, pair: &Pair, y: &[f64], ncomp: usize, out: &mut [Complex64]) {
        trace_of(&self.data.u0, pair, 0.0, y, ncomp, out);
    }

    fn forcing(&self, pair: &Pair, t: f64, y: &[f64], ncomp: usize, out: &mut [Complex64]) {
        trace_of(&self.data.f, pair, t, y, ncomp, out);
    }

    fn forcing_is_zero(&self, pair: &Pair) -> bool {
        !self.data.f.iter().any(|term| matches(term, pair) && !term.w().iter().all(Coef::is_zero))
    }
}
