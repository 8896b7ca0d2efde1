//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
#[cfg(test)]
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 2-norm condition number; infinite for singular or empty matrices.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 && s.len() == m.nrows().min(m.ncols()) => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Numerical rank with relative cutoff `sigma > rel_tol * sigma_max`.
pub fn rank(m: &CMat, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let Some(&hi) = s.first() else { return 0 };
    if hi == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * hi).count()
}

/// True when the columns of `m` are linearly independent at the given cutoff.
pub fn has_full_column_rank(m: &CMat, rel_tol: f64) -> bool {
    m.ncols() <= m.nrows() && rank(m, rel_tol) == m.ncols()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `(m + m^H) / 2`, or `None` when `m` is further than `tol` from Hermitian.
pub fn symmetrize(m: &CMat, tol: f64) -> Option<CMat> {
    if m.nrows() != m.ncols() {
        return None;
    }
    let adj = m.adjoint();
    let dev = max_abs_diff(m, &adj);
    let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    if dev > tol * scale {
        return None;
    }
    Some((m + adj).map(|z| z * 0.5))
}

/// Moore-Penrose pseudo-inverse via SVD with relative cutoff.
pub fn pseudo_inverse(m: &CMat, rel_tol: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let hi = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let eps = (rel_tol * hi).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps).unwrap_or_else(|_| CMat::zeros(m.ncols(), m.nrows()))
}

/// Residual `v - P v` of projecting the columns of `v` onto the range of `basis`.
pub fn projection_residual(basis: &CMat, v: &CMat, rel_tol: f64) -> CMat {
    if basis.ncols() == 0 {
        return v.clone();
    }
    let coeffs = pseudo_inverse(basis, rel_tol) * v;
    v - basis * coeffs
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Submatrix made of the listed columns, in order.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

/// Elementwise complex conjugate (not transposed).
pub fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}
