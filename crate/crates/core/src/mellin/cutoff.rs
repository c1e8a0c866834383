//! Cutoff functions `phi`, `phi_0`, `phi_1` and the boundary-defining `psi`.
//!
//! `phi(x) = 1` for `x <= 1/2`, `phi(x) = 0` for `x >= 1`, and on the
//! transition `phi(x) = g(2-2x) / (g(2-2x) + g(2x-1))` with
//! `g(t) = exp(-1/t)` for `t > 0`.

fn g(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn dg(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        g(t) / (t * t)
    }
}

/// The reference cutoff `phi`.
pub fn phi(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let a = g(2.0 - 2.0 * x);
        let b = g(2.0 * x - 1.0);
        a / (a + b)
    }
}

/// `d phi / dx`.
pub fn phi_prime(x: f64) -> f64 {
    if x <= 0.5 || x >= 1.0 {
        0.0
    } else {
        let s = 2.0 * x - 1.0;
        let a = g(1.0 - s);
        let b = g(s);
        let den = a + b;
        // d/ds [a / (a + b)] with a = g(1-s), b = g(s)
        let dphi_ds = (-dg(1.0 - s) * b - a * dg(s)) / (den * den);
        2.0 * dphi_ds
    }
}

/// `phi_0(x) = phi(x/2)`; satisfies `phi * phi_0 = phi`.
pub fn phi0(x: f64) -> f64 {
    phi(0.5 * x)
}

/// `phi_1(x) = phi(2x)`; satisfies `phi * phi_1 = phi_1`.
pub fn phi1(x: f64) -> f64 {
    phi(2.0 * x)
}

/// Non-decreasing `psi` with `psi(x) = x` on `[0, 1/2]` and `psi = 1` on `[1, inf)`.
pub fn psi(x: f64) -> f64 {
    let c = phi(x);
    c * x + (1.0 - c)
}
