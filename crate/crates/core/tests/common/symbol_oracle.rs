//! Independent oracles for the symbol identities: operators are applied
//! numerically to `x^{-z} g(y)` and the coefficient of `x^{l - z}` is read off.

use charflow::cone_symbols::{ConeOperator, ConormalSymbol};
use charflow::spectral::PeriodicGrid;
use num_complex::Complex64;

/// `sum_q x^{q - z} G_q(y)`, `G_q` sampled on the grid, layout `[j * n + comp]`.
pub type PowerSeries = Vec<Vec<Complex64>>;

fn matvec(m: &nalgebra::DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|s| m[(r, s)] * v[s]).sum()).collect()
}

fn dy(g: &[Complex64], n: usize, grid: &PeriodicGrid) -> Vec<Complex64> {
    let ny = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for c in 0..n {
        let row: Vec<Complex64> = (0..ny).map(|j| g[j * n + c]).collect();
        let d = grid.derivative(&row);
        for j in 0..ny {
            out[j * n + c] = d[j];
        }
    }
    out
}

/// `(x A d_x + A_1 d_y + B) F`, truncated at power `max_q`.
pub fn apply(op: &ConeOperator, f: &PowerSeries, z: Complex64, t: f64, grid: &PeriodicGrid, max_q: usize) -> PowerSeries {
    let n = op.n;
    let ny = grid.len();
    let y = grid.nodes();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ny * n]; max_q + 1];
    for (q, g) in f.iter().enumerate() {
        let e = Complex64::new(q as f64, 0.0) - z;
        let g_y = dy(g, n, grid);
        for m in 0..=op.taylor_order() {
            if q + m > max_q {
                break;
            }
            for (j, &yj) in y.iter().enumerate() {
                let gj = &g[j * n..(j + 1) * n];
                let gyj = &g_y[j * n..(j + 1) * n];
                let a = op.a_coef(m).eval(t, yj);
                let b = op.b_coef(m).eval(t, yj);
                let ta = matvec(&a, gj);
                let tb = matvec(&b, gj);
                let t1 = if op.d == 1 { matvec(&op.a1_coef(m).eval(t, yj), gyj) } else { vec![Complex64::new(0.0, 0.0); n] };
                for c in 0..n {
                    out[q + m][j * n + c] += e * ta[c] + t1[c] + tb[c];
                }
            }
        }
    }
    out
}

/// Max deviation between `compose_symbols(l)` applied to `g` and the numeric `A(B(x^{-z} g))`.
pub fn composition_residual(
    a: &ConeOperator,
    b: &ConeOperator,
    composed: &[ConormalSymbol],
    z: Complex64,
    t: f64,
    g: &[Complex64],
    grid: &PeriodicGrid,
) -> f64 {
    let max_q = composed.len() - 1;
    let f: PowerSeries = vec![g.to_vec()];
    let ab = apply(a, &apply(b, &f, z, t, grid, max_q), z, t, grid, max_q);
    let mut worst: f64 = 0.0;
    for (l, s) in composed.iter().enumerate() {
        let v = s.apply_on_grid(z, t, g, grid);
        for (p, q) in v.iter().zip(ab[l].iter()) {
            worst = worst.max((p - q).norm());
        }
    }
    worst
}

/// Integration by parts in `L^2(x^{-2 delta})`: `sigma_c^0(A^*)(z) g = (z - kappa) A^H g - d_y(A_1^H g) + B^H g`.
pub fn adjoint_residual(op: &ConeOperator, adj: &ConormalSymbol, z: Complex64, t: f64, g: &[Complex64], grid: &PeriodicGrid) -> f64 {
    let n = op.n;
    let kappa = 1.0 - 2.0 * op.delta;
    let y = grid.nodes();
    let ny = grid.len();
    let mut a1h_g = vec![Complex64::new(0.0, 0.0); ny * n];
    let mut want = vec![Complex64::new(0.0, 0.0); ny * n];
    for (j, &yj) in y.iter().enumerate() {
        let gj = &g[j * n..(j + 1) * n];
        let ah = op.a_coef(0).eval(t, yj).adjoint();
        let bh = op.b_coef(0).eval(t, yj).adjoint();
        let ta = matvec(&ah, gj);
        let tb = matvec(&bh, gj);
        if op.d == 1 {
            let v = matvec(&op.a1_coef(0).eval(t, yj).adjoint(), gj);
            a1h_g[j * n..(j + 1) * n].copy_from_slice(&v);
        }
        for c in 0..n {
            want[j * n + c] = (z - kappa) * ta[c] + tb[c];
        }
    }
    let d = dy(&a1h_g, n, grid);
    for (w, dv) in want.iter_mut().zip(d.iter()) {
        *w -= dv;
    }
    let got = adj.apply_on_grid(z, t, g, grid);
    got.iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

/// Band-limited test data `g_c(y) = sum_{|m| <= 3} c_{m,c} e^{i m y}` from a fixed recipe.
pub fn test_vector(n: usize, grid: &PeriodicGrid, salt: f64) -> Vec<Complex64> {
    let y = grid.nodes();
    let mut g = vec![Complex64::new(0.0, 0.0); y.len() * n];
    for (j, &yj) in y.iter().enumerate() {
        for c in 0..n {
            let mut v = Complex64::new(1.0 + 0.3 * c as f64, salt);
            if !grid.is_point() {
                for m in 1..=3 {
                    let w = Complex64::new((salt * m as f64 + c as f64).sin(), 0.2 * m as f64);
                    v += w * Complex64::new(0.0, m as f64 * yj).exp() / m as f64;
                }
            }
            g[j * n + c] = v;
        }
    }
    g
}
