//! One-sided Jacobi singular value decomposition for real and complex
//! dense matrices.
//!
//! Columns of a working copy of `A` are rotated pairwise until they are
//! mutually orthogonal; the column norms are then the singular values. The
//! method is slow compared with bidiagonalization but accurate to working
//! precision for every singular value, including exact zeros.

use nalgebra::{ComplexField, DMatrix};

/// Thin SVD `A = U diag(s) Vᴴ` with `k = min(m, n)` columns in `U` and `V`,
/// singular values sorted in decreasing order.
pub struct Svd<T: ComplexField<RealField = f64>> {
    pub u: DMatrix<T>,
    pub s: Vec<f64>,
    pub v: DMatrix<T>,
}

fn jacobi_tall<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dotc(&w.column(j));
                let g = gamma.clone().modulus();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.unscale(g).conjugate();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..m {
                    let wi = w[(r, i)].clone();
                    let wj = w[(r, j)].clone() * phase.clone();
                    w[(r, i)] = wi.clone().scale(c) - wj.clone().scale(s);
                    w[(r, j)] = wi.scale(s) + wj.scale(c);
                }
                for r in 0..n {
                    let vi = v[(r, i)].clone();
                    let vj = v[(r, j)].clone() * phase.clone();
                    v[(r, i)] = vi.clone().scale(c) - vj.clone().scale(s);
                    v[(r, j)] = vi.scale(s) + vj.scale(c);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let smax = norms.iter().copied().fold(0.0, f64::max);
    let reliable = m.max(n) as f64 * eps * smax;
    let mut u = DMatrix::<T>::zeros(m, n);
    let mut vs = DMatrix::<T>::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut good = 0;
    for (dst, &src) in order.iter().enumerate() {
        s.push(norms[src]);
        vs.set_column(dst, &v.column(src));
        if norms[src] > reliable && norms[src] > 0.0 {
            u.set_column(dst, &w.column(src).unscale(norms[src]));
            good = dst + 1;
        }
    }
    let head = u.columns(0, good).into_owned();
    let completed = complete_basis(&head, n);
    Svd { u: completed, s, v: vs }
}

/// Extends orthonormal columns `q` to `cols` orthonormal columns by
/// Gram-Schmidt against standard basis vectors.
pub fn complete_basis<T: ComplexField<RealField = f64>>(q: &DMatrix<T>, cols: usize) -> DMatrix<T> {
    let m = q.nrows();
    let mut out = DMatrix::<T>::zeros(m, cols);
    let mut have = 0;
    for j in 0..q.ncols().min(cols) {
        let mut col = q.column(j).into_owned();
        for _ in 0..2 {
            for k in 0..have {
                let proj = out.column(k).dotc(&col);
                col -= out.column(k) * proj;
            }
        }
        let nrm = col.norm();
        if nrm > 0.5 {
            out.set_column(have, &col.unscale(nrm));
            have += 1;
        }
    }
    let mut e = 0;
    while have < cols && e < m {
        let mut col = nalgebra::DVector::<T>::zeros(m);
        col[e] = T::one();
        e += 1;
        for _ in 0..2 {
            for k in 0..have {
                let proj = out.column(k).dotc(&col);
                col -= out.column(k) * proj;
            }
        }
        let nrm = col.norm();
        if nrm > 1e-3 {
            out.set_column(have, &col.unscale(nrm));
            have += 1;
        }
    }
    out
}

/// Thin SVD of any matrix.
pub fn svd<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> Svd<T> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Svd { u: DMatrix::zeros(m, 0), s: Vec::new(), v: DMatrix::zeros(n, 0) };
    }
    if m >= n {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.adjoint());
        Svd { u: t.v, s: t.s, v: t.u }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn check<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) {
        let d = svd(a);
        let k = d.s.len();
        let sig = DMatrix::<T>::from_fn(k, k, |i, j| if i == j { T::from_real(d.s[i]) } else { T::zero() });
        let rec = &d.u * sig * d.v.adjoint();
        assert!((rec - a).norm() <= 1e-13 * (1.0 + a.norm()));
        let eye = DMatrix::<T>::identity(k, k);
        assert!((d.u.adjoint() * &d.u - &eye).norm() < 1e-12);
        assert!((d.v.adjoint() * &d.v - &eye).norm() < 1e-12);
        assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rank_one_tall_matrix() {
        let a = DMatrix::from_row_slice(
            3,
            2,
            &[0.005074197672643142, 0.039532398860971915, -0.015222593017929423, -0.11859719658291572, 0.010148395345285818, 0.0790647977219413],
        );
        check(&a);
        let d = svd(&a);
        let dir = d.u.column(0).into_owned() * d.u[(0, 0)].signum();
        let expect = nalgebra::DVector::from_vec(vec![1.0, -3.0, 2.0]) / 14f64.sqrt();
        assert!((dir - expect).norm() < 1e-12);
    }

    #[test]
    fn wide_and_zero_matrices() {
        check(&DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]));
        check(&DMatrix::<f64>::zeros(3, 2));
        check(&DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn complex_matrix() {
        let a = DMatrix::from_fn(4, 3, |i, j| Complex64::new((i + 2 * j) as f64 - 1.5, (i * j) as f64 * 0.3 - 0.2));
        check(&a);
        let b = DMatrix::from_fn(3, 3, |i, _| Complex64::new(i as f64, 1.0));
        check(&b);
    }
}
