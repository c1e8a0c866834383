//! Seeded random cone operators with trigonometric/polynomial coefficients.

use num_complex::Complex64;
use rand::Rng;

use super::coef::Coef;
use super::matrix::CoefMatrix;
use super::operator::ConeOperator;

/// One to two terms from `{1, t, t^2, cos(my), sin(my), t cos(my)}` with random complex amplitudes.
pub fn random_coef<R: Rng>(rng: &mut R, d: usize) -> Coef {
    let nterms = rng.gen_range(1..=2);
    let mut c = Coef::zero();
    for _ in 0..nterms {
        let re = rng.gen_range(-1.0..1.0);
        let im = if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 };
        let amp = Complex64::new(re, im);
        let kinds = if d == 1 { 6 } else { 3 };
        let m = rng.gen_range(1..=2);
        let base = match rng.gen_range(0..kinds) {
            0 => Coef::real(1.0),
            1 => Coef::monomial(1, 0, Complex64::new(1.0, 0.0)),
            2 => Coef::monomial(2, 0, Complex64::new(1.0, 0.0)),
            3 => Coef::cos(m),
            4 => Coef::sin(m),
            _ => Coef::cos(m).mul(&Coef::monomial(1, 0, Complex64::new(1.0, 0.0))),
        };
        c = c.add(&base.scale(amp));
    }
    c
}

fn random_matrix<R: Rng>(rng: &mut R, n: usize, d: usize) -> CoefMatrix {
    let mut m = CoefMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(0.7) {
                m.set(i, j, random_coef(rng, d));
            }
        }
    }
    m
}

/// First-order cone operator of size `n`, dimension `d`, Taylor truncation `order`.
pub fn random_operator<R: Rng>(rng: &mut R, n: usize, d: usize, order: usize) -> ConeOperator {
    let poly = |rng: &mut R| (0..=order).map(|_| random_matrix(rng, n, d)).collect::<Vec<_>>();
    let a = poly(rng);
    let a1 = if d == 1 { poly(rng) } else { vec![] };
    let b = poly(rng);
    let delta = rng.gen_range(-0.5..0.5);
    let mut op = ConeOperator::new(n, d, delta, 1.0, a, a1, b).expect("consistent random operator");
    op.taylor_order = Some(order);
    op
}

/// Random operator pair sharing `n`, `d`, `delta`, with sizes drawn from `N <= 3`, `d <= 1`.
pub fn random_pair<R: Rng>(rng: &mut R, order: usize) -> (ConeOperator, ConeOperator) {
    let n = rng.gen_range(1..=3);
    let d = rng.gen_range(0..=1);
    let a = random_operator(rng, n, d, order);
    let mut b = random_operator(rng, n, d, order);
    b.delta = a.delta;
    (a, b)
}
