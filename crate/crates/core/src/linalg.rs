//! Small dense eigen-decompositions used by the symmetrizer, the flux splitting
//! and the characteristic tracer.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigError {
    #[error("eigenvalue {re}+{im}i is not real")]
    NonReal { re: f64, im: f64 },
    #[error("eigenvalues collide (gap {gap:e})")]
    Collision { gap: f64 },
    #[error("eigen-decomposition failed")]
    Failure,
}

/// Imaginary-part tolerance for "real" eigenvalues, relative to the matrix scale.
pub const REAL_TOL: f64 = 1e-8;

fn scale_of(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0)
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let (_, t) = m.clone().schur().unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    (m - m.adjoint()).iter().all(|c| c.norm() <= tol * scale_of(m))
}

pub fn is_diagonal(m: &CMat) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == Complex64::new(0.0, 0.0)))
}

/// Unit vector with its first non-negligible component real and positive.
pub fn phase_fix(v: &mut DVector<Complex64>) {
    let nrm = v.norm();
    if nrm > 0.0 {
        *v /= Complex64::new(nrm, 0.0);
    }
    if let Some(c) = v.iter().find(|c| c.norm() > 1e-10).copied() {
        let ph = c / c.norm();
        *v /= ph;
    }
}

/// Null vector of `m - lambda I` (right singular vector of the smallest singular value).
fn null_vector(m: &CMat, lambda: f64) -> Result<DVector<Complex64>, EigError> {
    let n = m.nrows();
    let shifted = m - CMat::identity(n, n) * Complex64::new(lambda, 0.0);
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.ok_or(EigError::Failure)?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let mut v = DVector::from_fn(n, |k, _| vt[(idx, k)].conj());
    phase_fix(&mut v);
    Ok(v)
}

/// Real, pairwise distinct eigenvalues (ascending) with phase-fixed unit eigenvectors.
pub fn strict_real_eigen(m: &CMat, gap_tol: f64) -> Result<(Vec<f64>, CMat), EigError> {
    let n = m.nrows();
    let sc = scale_of(m);
    let mut lam = Vec::with_capacity(n);
    for e in eigenvalues(m) {
        if e.im.abs() > REAL_TOL * sc {
            return Err(EigError::NonReal { re: e.re, im: e.im });
        }
        lam.push(e.re);
    }
    lam.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in lam.windows(2) {
        if w[1] - w[0] < gap_tol {
            return Err(EigError::Collision { gap: w[1] - w[0] });
        }
    }
    let mut r = CMat::zeros(n, n);
    for (k, &l) in lam.iter().enumerate() {
        let v = null_vector(m, l)?;
        r.set_column(k, &v);
    }
    Ok((lam, r))
}

/// Hermitian eigen-decomposition, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let se = SymmetricEigen::new(h);
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let lam = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut r = CMat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        let mut v = se.eigenvectors.column(i).into_owned();
        phase_fix(&mut v);
        r.set_column(k, &v);
    }
    (lam, r)
}

/// Real eigenvalues, ascending: diagonal, Hermitian or strictly hyperbolic paths.
pub fn real_eigenvalues(m: &CMat) -> Result<Vec<f64>, EigError> {
    if is_diagonal(m) {
        let sc = scale_of(m);
        let mut v = Vec::new();
        for i in 0..m.nrows() {
            let e = m[(i, i)];
            if e.im.abs() > REAL_TOL * sc {
                return Err(EigError::NonReal { re: e.re, im: e.im });
            }
            v.push(e.re);
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        return Ok(v);
    }
    if is_hermitian(m, 1e-13) {
        return Ok(hermitian_eigen(m).0);
    }
    let sc = scale_of(m);
    let mut v = Vec::new();
    for e in eigenvalues(m) {
        if e.im.abs() > REAL_TOL * sc {
            return Err(EigError::NonReal { re: e.re, im: e.im });
        }
        v.push(e.re);
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(v)
}

/// `M = M^+ + M^-` with `M^+` carrying the non-negative characteristic speeds.
#[derive(Debug, Clone)]
pub struct FluxSplit {
    pub plus: CMat,
    pub minus: CMat,
    pub max_speed: f64,
}

/// Characteristic splitting, `None` when `M` is not diagonalizable with real spectrum.
pub fn flux_split(m: &CMat) -> Option<FluxSplit> {
    let n = m.nrows();
    if is_diagonal(m) {
        let mut plus = CMat::zeros(n, n);
        let mut minus = CMat::zeros(n, n);
        let mut ms: f64 = 0.0;
        for i in 0..n {
            let e = m[(i, i)];
            if e.im != 0.0 {
                return None;
            }
            ms = ms.max(e.re.abs());
            if e.re > 0.0 {
                plus[(i, i)] = e;
            } else {
                minus[(i, i)] = e;
            }
        }
        return Some(FluxSplit { plus, minus, max_speed: ms });
    }
    let (lam, r, rinv) = if is_hermitian(m, 1e-13) {
        let (lam, r) = hermitian_eigen(m);
        let rinv = r.adjoint();
        (lam, r, rinv)
    } else {
        let (lam, r) = strict_real_eigen(m, 1e-8).ok()?;
        let rinv = r.clone().try_inverse()?;
        (lam, r, rinv)
    };
    let dp = CMat::from_fn(n, n, |i, j| if i == j && lam[i] > 0.0 { Complex64::new(lam[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let dm = CMat::from_fn(n, n, |i, j| if i == j && lam[i] <= 0.0 { Complex64::new(lam[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    let ms = lam.iter().fold(0.0_f64, |a, l| a.max(l.abs()));
    Some(FluxSplit { plus: &r * dp * &rinv, minus: &r * dm * &rinv, max_speed: ms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn strict_eigen_reconstructs() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0), c(2.0), c(0.5), c(0.0)]);
        let (lam, r) = strict_real_eigen(&m, 1e-8).unwrap();
        assert!((lam[0] + 1.0).abs() < 1e-12 && (lam[1] - 1.0).abs() < 1e-12);
        let d = CMat::from_diagonal(&DVector::from_iterator(2, lam.iter().map(|&l| c(l))));
        let back = &r * d * r.clone().try_inverse().unwrap();
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn jordan_block_rejected() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(strict_real_eigen(&m, 1e-8), Err(EigError::Collision { .. })));
        let rot = CMat::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(1.0), c(0.0)]);
        assert!(matches!(strict_real_eigen(&rot, 1e-8), Err(EigError::NonReal { .. })));
    }

    #[test]
    fn split_sums_back() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(0.3), c(0.3), c(-2.0)]);
        let s = flux_split(&m).unwrap();
        assert!((&s.plus + &s.minus - &m).norm() < 1e-13);
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(-1.0)]);
        let s = flux_split(&m).unwrap();
        assert!((&s.plus + &s.minus - &m).norm() < 1e-13);
        assert!((s.max_speed - 1.0).abs() < 1e-12);
    }
}
