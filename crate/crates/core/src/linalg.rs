//! Dense linear-algebra helpers shared by the analysis modules.
//!
//! All rank decisions go through [`rank_tol`], which uses the singular-value
//! threshold `max(rows, cols) * eps * sigma_max` unless a caller overrides it.

use crate::svd;
use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type Vector = DVector<f64>;
pub type CVector = DVector<Complex64>;

/// Default scale-aware rank threshold.
pub fn rank_tol(rows: usize, cols: usize, smax: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * smax
}

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    svd::svd(m).s
}

pub fn csingular_values(m: &CMat) -> Vec<f64> {
    svd::svd(m).s
}

pub fn spectral_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number; infinite for singular or empty-rank matrices.
pub fn cond(m: &Mat) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

fn count_above(sv: &[f64], rows: usize, cols: usize, tol: Option<f64>) -> usize {
    let smax = sv.first().copied().unwrap_or(0.0);
    let t = tol.unwrap_or_else(|| rank_tol(rows, cols, smax));
    sv.iter().filter(|&&s| s > t).count()
}

pub fn rank(m: &Mat, tol: Option<f64>) -> usize {
    let sv = singular_values(m);
    count_above(&sv, m.nrows(), m.ncols(), tol)
}

pub fn crank(m: &CMat, tol: Option<f64>) -> usize {
    let sv = csingular_values(m);
    count_above(&sv, m.nrows(), m.ncols(), tol)
}

fn left_full_generic<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>) {
    let d = svd::svd(m);
    (svd::complete_basis(&d.u, m.nrows()), d.s)
}

fn right_full_generic<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> (DMatrix<T>, Vec<f64>) {
    let d = svd::svd(m);
    (svd::complete_basis(&d.v, m.ncols()), d.s)
}

/// Full orthogonal left factor `U` (rows x rows) and singular values.
pub fn left_full(m: &Mat) -> (Mat, Vec<f64>) {
    left_full_generic(m)
}

/// Full orthogonal right factor `V` (cols x cols) and singular values.
pub fn right_full(m: &Mat) -> (Mat, Vec<f64>) {
    right_full_generic(m)
}

/// Orthonormal basis of the right null space.
pub fn null_space(m: &Mat, tol: Option<f64>) -> Mat {
    let (v, sv) = right_full(m);
    let r = count_above(&sv, m.nrows(), m.ncols(), tol);
    let c = m.ncols();
    v.columns(r, c - r).into_owned()
}

/// Orthonormal basis of the left null space, as columns.
pub fn left_null_space(m: &Mat, tol: Option<f64>) -> Mat {
    null_space(&m.transpose(), tol)
}

/// Orthonormal basis of the column space.
pub fn orth(m: &Mat, tol: Option<f64>) -> Mat {
    let d = svd::svd(m);
    let r = count_above(&d.s, m.nrows(), m.ncols(), tol);
    d.u.columns(0, r).into_owned()
}

/// Moore-Penrose pseudo-inverse with the default rank threshold.
pub fn pinv(m: &Mat) -> Mat {
    let (r, c) = m.shape();
    let d = svd::svd(m);
    let k = count_above(&d.s, r, c, None);
    let mut out = Mat::zeros(c, r);
    for i in 0..k {
        out += d.v.column(i) * d.u.column(i).transpose() / d.s[i];
    }
    out
}

/// Full unitary right factor of a complex matrix and its singular values.
pub fn cright_full(m: &CMat) -> (CMat, Vec<f64>) {
    right_full_generic(m)
}

pub fn cnull_space(m: &CMat, tol: Option<f64>) -> CMat {
    let (v, sv) = cright_full(m);
    let r = count_above(&sv, m.nrows(), m.ncols(), tol);
    let c = m.ncols();
    v.columns(r, c - r).into_owned()
}

/// Smallest singular value with its left and right singular vectors. For a
/// wide matrix the value is zero, `v` spans part of the null space and `u`
/// is zero.
pub fn min_singular_triplet(m: &CMat) -> (f64, CVector, CVector) {
    let (r, c) = m.shape();
    if c == 0 {
        return (0.0, CVector::zeros(r), CVector::zeros(0));
    }
    if c > r {
        let (v, _) = cright_full(m);
        return (0.0, CVector::zeros(r), v.column(c - 1).into_owned());
    }
    let d = svd::svd(m);
    (d.s[c - 1], d.u.column(c - 1).into_owned(), d.v.column(c - 1).into_owned())
}

pub fn to_complex(m: &Mat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn cvec(v: &Vector) -> CVector {
    v.map(|x| Complex64::new(x, 0.0))
}

pub fn select_columns(m: &Mat, idx: &[usize]) -> Mat {
    Mat::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

pub fn select_rows(m: &Mat, idx: &[usize]) -> Mat {
    Mat::from_fn(idx.len(), m.ncols(), |i, j| m[(idx[i], j)])
}

pub fn select_block(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn blkdiag(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// `[a b; c d]` with shape checks left to nalgebra.
pub fn block2x2(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    let rows = a.nrows() + c.nrows();
    let cols = a.ncols() + b.ncols();
    let mut out = Mat::zeros(rows, cols);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    out.view_mut((a.nrows(), 0), c.shape()).copy_from(c);
    out.view_mut((a.nrows(), a.ncols()), d.shape()).copy_from(d);
    out
}

pub fn vstack(a: &Mat, b: &Mat) -> Mat {
    let cols = if a.nrows() == 0 { b.ncols() } else { a.ncols() };
    let mut out = Mat::zeros(a.nrows() + b.nrows(), cols);
    if a.nrows() > 0 {
        out.view_mut((0, 0), a.shape()).copy_from(a);
    }
    if b.nrows() > 0 {
        out.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    }
    out
}

pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    let rows = if a.ncols() == 0 { b.nrows() } else { a.nrows() };
    let mut out = Mat::zeros(rows, a.ncols() + b.ncols());
    if a.ncols() > 0 {
        out.view_mut((0, 0), a.shape()).copy_from(a);
    }
    if b.ncols() > 0 {
        out.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    }
    out
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues(m: &Mat) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.clone().complex_eigenvalues().iter().copied().collect()
}

/// Determinant of a complex square matrix (empty matrix has determinant one).
pub fn cdet(m: &CMat) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Bottleneck matching distance between two multisets of complex numbers:
/// the smallest `d` such that a one-to-one pairing has every pair within `d`.
/// Infinite when the sizes differ.
pub fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let n = a.len();
    let cost: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| (x - y).norm()).collect()).collect();
    let assignment = crate::util::min_bottleneck_assignment(&cost);
    (0..n).map(|i| cost[i][assignment[i]]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = null_space(&m, None);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-14);
        assert!((n.transpose() * &n - Mat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn left_full_tall_is_orthogonal() {
        let m = Mat::from_row_slice(3, 1, &[1.0, 2.0, 2.0]);
        let (u, sv) = left_full(&m);
        assert_eq!(u.shape(), (3, 3));
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((u.transpose() * &u - Mat::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn rank_and_pinv() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(rank(&m, None), 1);
        let p = pinv(&m);
        assert!((&m * &p * &m - &m).norm() < 1e-12);
    }

    #[test]
    fn min_triplet_finds_null_vector() {
        let m = to_complex(&Mat::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 1.0, 2.0, 2.0]));
        let (s, _u, v) = min_singular_triplet(&m);
        assert!(s < 1e-12);
        assert!((&m * &v).norm() < 1e-12);
    }

    #[test]
    fn set_distance_handles_conjugate_order() {
        let a = [Complex64::new(-1.0, 2.0), Complex64::new(-1.0, -2.0)];
        let b = [Complex64::new(-1.0, -2.0), Complex64::new(-1.0, 2.0)];
        assert!(set_distance(&a, &b) < 1e-15);
        assert!(set_distance(&a, &b[..1]).is_infinite());
    }
}
