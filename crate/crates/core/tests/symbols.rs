mod common;

use charflow::cone_symbols::random::random_pair;
use charflow::cone_symbols::*;
use charflow::spectral::PeriodicGrid;
use common::symbol_oracle::{adjoint_residual, composition_residual, test_vector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid_for(op: &ConeOperator) -> PeriodicGrid {
    if op.d == 1 {
        PeriodicGrid::new(32)
    } else {
        PeriodicGrid::point()
    }
}

#[test]
fn composition_matches_numeric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..20 {
        let (a, b) = random_pair(&mut rng, 2);
        let sa = mellin_symbols(&a);
        let sb = mellin_symbols(&b);
        let composed: Vec<_> = (0..=2).map(|l| compose_symbols(&sa, &sb, l).unwrap()).collect();
        let grid = grid_for(&a);
        let g = test_vector(a.n, &grid, 0.1 * case as f64);
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0));
        let r = composition_residual(&a, &b, &composed, z, 0.37, &g, &grid);
        assert!(r <= 1e-10, "case {case}: {r}");
    }
}

#[test]
fn adjoint_matches_integration_by_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..20 {
        let (a, _) = random_pair(&mut rng, 1);
        let s0 = mellin_symbol(&a, 0).unwrap();
        let adj = adjoint_symbol(&s0, a.delta);
        let grid = grid_for(&a);
        let g = test_vector(a.n, &grid, 0.2 * case as f64);
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-2.0..2.0));
        let r = adjoint_residual(&a, &adj, z, 0.61, &g, &grid);
        assert!(r <= 1e-8, "case {case}: {r}");
    }
}

#[test]
fn suite_report_within_tolerances() {
    let r = symbol_suite(7, 50, 2);
    assert!(r.compose_residual <= 1e-10, "{r:?}");
    assert!(r.adjoint_residual <= 1e-8, "{r:?}");
    assert!(r.compatibility_residual <= 1e-13, "{r:?}");
    assert!(r.adjoint_negative_control > 1e-3, "{r:?}");
}

#[test]
fn composition_associative_on_rational_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (a, b) = random_pair(&mut rng, 2);
    let (mut c, _) = random_pair(&mut rng, 2);
    // align sizes
    let c = loop {
        if c.n == a.n && c.d == a.d {
            break c;
        }
        c = random_pair(&mut rng, 2).0;
    };
    let (sa, sb, sc) = (mellin_symbols(&a), mellin_symbols(&b), mellin_symbols(&c));
    let ab: Vec<_> = (0..=2).map(|l| compose_symbols(&sa, &sb, l).unwrap()).collect();
    let bc: Vec<_> = (0..=2).map(|l| compose_symbols(&sb, &sc, l).unwrap()).collect();
    for l in 0..=2 {
        let left = compose_symbols(&ab, &sc, l).unwrap();
        let right = compose_symbols(&sa, &bc, l).unwrap();
        assert!(left.distance(&right) <= 1e-12 * (1.0 + left.max_abs()));
    }
}

#[test]
fn adjoint_reverses_composition_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let (a, b) = random_pair(&mut rng, 0);
        let delta = a.delta;
        let s_ab = compose_symbols(&mellin_symbols(&a), &mellin_symbols(&b), 0).unwrap();
        let lhs = ConeDiffOp::from_operator(&a).compose(&ConeDiffOp::from_operator(&b)).adjoint(delta).conormal(0);
        assert!(adjoint_symbol(&s_ab, delta).distance(&lhs) <= 1e-12);
        let rhs = compose_symbols(
            &[adjoint_symbol(&mellin_symbol(&b, 0).unwrap(), delta)],
            &[adjoint_symbol(&mellin_symbol(&a, 0).unwrap(), delta)],
            0,
        )
        .unwrap();
        assert!(rhs.distance(&lhs) <= 1e-12);
    }
}

#[test]
fn boundary_family_symmetrized_by_restriction() {
    let a = CoefMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]);
    let a1 = CoefMatrix::from_real(2, &[0.0, 2.0, 0.5, 0.0]);
    let op = ConeOperator::new(2, 1, 0.0, 1.0, vec![a], vec![a1], vec![]).unwrap();
    let lat = SampleLattice::for_operator(&op, 4.0);
    let b = build_symmetrizer(&op, &lat).unwrap();
    let r = check_symmetrizer(&b, &op, &lat).unwrap();
    assert!(r.boundary_skew_residual <= 1e-10, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn adjoint_is_involution(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _) = random_pair(&mut rng, 0);
        let s = mellin_symbol(&a, 0).unwrap();
        let back = adjoint_symbol(&adjoint_symbol(&s, a.delta), a.delta);
        prop_assert!(back.distance(&s) <= 1e-14);
    }

    #[test]
    fn ell_zero_is_pointwise_product(seed in 0u64..10_000, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = random_pair(&mut rng, 0);
        let s = compose_symbols(&mellin_symbols(&a), &mellin_symbols(&b), 0).unwrap();
        // on a constant vector, d_y acts only through the coefficients
        if a.d == 0 {
            let z = Complex64::new(re, im);
            let lhs = s.eval_mode(z, 0.2, 0.0, 0.0);
            let rhs = mellin_symbol(&a, 0).unwrap().eval_mode(z, 0.2, 0.0, 0.0) * mellin_symbol(&b, 0).unwrap().eval_mode(z, 0.2, 0.0, 0.0);
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn compressed_symbol_homogeneous(seed in 0u64..10_000, lam in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _) = random_pair(&mut rng, 1);
        let cs = compressed_symbol(&a);
        let v1 = cs.eval(0.3, 0.2, 0.7, 0.6, -0.8) * Complex64::new(lam, 0.0);
        let v2 = cs.eval(0.3, 0.2, 0.7, 0.6 * lam, -0.8 * lam);
        prop_assert!((&v1 - &v2).norm() <= 1e-12 * (1.0 + v2.norm()));
    }
}
