//! Elimination of algebraic states of index-one systems.
//!
//! With the partition `QEZ = blkdiag(E11, 0)` the algebraic equation
//! `0 = A21 x1 + A22 x2 + B2 u` is solved for `x2`, giving the reduced model
//!
//! ```text
//! x1' = Ã x1 + B̃ u,   y = C̃ x1 + D̃ u
//! Ã = E11⁻¹(A11 − A12 A22⁻¹ A21)    B̃ = E11⁻¹(B1 − A12 A22⁻¹ B2)
//! C̃ = C1 − C2 A22⁻¹ A21             D̃ = D − C2 A22⁻¹ B2
//! ```

use crate::descriptor::{partition_index_one, AttackSignature, DescriptorSystem, StatePartition};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat, Vector};
use num_complex::Complex64;

/// A standard state-space quadruple `x' = Ax + Bu`, `y = Cx + Du`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl StateSpace {
    /// `D + C (sI − A)⁻¹ B`.
    pub fn transfer_at(&self, s: Complex64) -> Result<CMat> {
        let n = self.a.nrows();
        let m = CMat::identity(n, n) * s - linalg::to_complex(&self.a);
        let sol = solve_complex(&m, &linalg::to_complex(&self.b), s)?;
        Ok(linalg::to_complex(&self.d) + linalg::to_complex(&self.c) * sol)
    }
}

pub(crate) fn solve_complex(m: &CMat, rhs: &CMat, s: Complex64) -> Result<CMat> {
    let n = m.nrows();
    if n == 0 {
        return Ok(CMat::zeros(0, rhs.ncols()));
    }
    let sv = linalg::csingular_values(m);
    if sv[n - 1] <= 1e3 * linalg::rank_tol(n, n, sv[0]) {
        return Err(Error::SingularAtS { re: s.re, im: s.im });
    }
    Ok(m.clone().lu().solve(rhs).expect("nonsingular by singular-value check"))
}

/// Kron-reduced system with the maps recovering the algebraic states.
#[derive(Clone, Debug)]
pub struct KronReducedSystem {
    pub a_til: Mat,
    pub b_til: Mat,
    pub c_til: Mat,
    pub d_til: Mat,
    /// `−A22⁻¹ A21`
    pub recovery_state: Mat,
    /// `−A22⁻¹ B2`
    pub recovery_input: Mat,
    pub partition: StatePartition,
    /// Set when `cond(A22) > 1e12`.
    pub warning: Option<String>,
}

impl KronReducedSystem {
    pub fn state_space(&self) -> StateSpace {
        StateSpace { a: self.a_til.clone(), b: self.b_til.clone(), c: self.c_til.clone(), d: self.d_til.clone() }
    }

    pub fn transfer_at(&self, s: Complex64) -> Result<CMat> {
        self.state_space().transfer_at(s)
    }

    /// Full state in original coordinates from `x1` and the input.
    pub fn recover_full(&self, x1: &Vector, u: &Vector) -> Vector {
        let x2 = recover_algebraic(self, x1, u);
        self.partition.to_original(x1, &x2)
    }
}

/// Reduces a system with signature `sig`.
pub fn kron_reduce(sys: &DescriptorSystem, sig: &AttackSignature) -> Result<KronReducedSystem> {
    let part = partition_index_one(sys)?;
    kron_reduce_with(sys, &part, &sig.b_k, &sig.d_k)
}

/// Reduces a system for an arbitrary input pair `(b, d)` using a
/// precomputed partition.
pub fn kron_reduce_with(sys: &DescriptorSystem, part: &StatePartition, b: &Mat, d: &Mat) -> Result<KronReducedSystem> {
    if b.nrows() != sys.n() || d.nrows() != sys.p() || b.ncols() != d.ncols() {
        return Err(Error::DimensionMismatch("input matrices do not match the system".into()));
    }
    let blk = part.blocks(&sys.e, &sys.a, b, &sys.c);
    let (n1, n2, k) = (part.n1(), part.n2(), b.ncols());
    let mut warning = None;
    let (rs, ri) = if n2 > 0 {
        let c = linalg::cond(&blk.a22);
        if c > 1e12 {
            warning = Some(format!("A22 is ill-conditioned (cond = {c:.3e})"));
        }
        let lu = blk.a22.clone().lu();
        let rhs = linalg::hstack(&blk.a21, &blk.b2);
        let sol = lu.solve(&rhs).ok_or_else(|| Error::NotIndexOne("A22 is singular".into()))?;
        let sol = -sol;
        (sol.columns(0, n1).into_owned(), sol.columns(n1, k).into_owned())
    } else {
        (Mat::zeros(0, n1), Mat::zeros(0, k))
    };
    let e11_lu = blk.e11.clone().lu();
    let a_inner = &blk.a11 + &blk.a12 * &rs;
    let b_inner = &blk.b1 + &blk.a12 * &ri;
    let a_til = if n1 > 0 { e11_lu.solve(&a_inner).ok_or_else(|| Error::NotIndexOne("E11 is singular".into()))? } else { a_inner };
    let b_til = if n1 > 0 { e11_lu.solve(&b_inner).expect("E11 checked above") } else { b_inner };
    let c_til = &blk.c1 + &blk.c2 * &rs;
    let d_til = d + &blk.c2 * &ri;
    Ok(KronReducedSystem {
        a_til,
        b_til,
        c_til,
        d_til,
        recovery_state: rs,
        recovery_input: ri,
        partition: part.clone(),
        warning,
    })
}

/// `x2 = −A22⁻¹(A21 x1 + B2 u)` in partition coordinates.
pub fn recover_algebraic(kron: &KronReducedSystem, x1: &Vector, u: &Vector) -> Vector {
    &kron.recovery_state * x1 + &kron.recovery_input * u
}

/// `D_K + C (sE − A)⁻¹ B_K` for the descriptor system.
pub fn transfer_at(sys: &DescriptorSystem, sig: &AttackSignature, s: Complex64) -> Result<CMat> {
    let m = linalg::to_complex(&sys.e) * s - linalg::to_complex(&sys.a);
    let sol = solve_complex(&m, &linalg::to_complex(&sig.b_k), s)?;
    Ok(linalg::to_complex(&sig.d_k) + linalg::to_complex(&sys.c) * sol)
}

/// Nonsingular system obtained by treating `x2` as an extra input and the
/// algebraic equations as extra outputs:
///
/// ```text
/// x1' = E11⁻¹A11 x1 + E11⁻¹[A12 B1] [x2; u]
/// [0; y] = [A21; C1] x1 + [A22 B2; C2 D] [x2; u]
/// ```
///
/// Its invariant zeros coincide with those of the descriptor system.
pub fn associated_nonsingular(sys: &DescriptorSystem, sig: &AttackSignature) -> Result<StateSpace> {
    let part = partition_index_one(sys)?;
    let blk = part.blocks(&sys.e, &sys.a, &sig.b_k, &sys.c);
    let n1 = part.n1();
    let lu = blk.e11.clone().lu();
    let inv = |m: &Mat| if n1 > 0 { lu.solve(m).expect("E11 nonsingular") } else { m.clone() };
    let a = inv(&blk.a11);
    let b = inv(&linalg::hstack(&blk.a12, &blk.b1));
    let c = linalg::vstack(&blk.a21, &blk.c1);
    let d = linalg::block2x2(&blk.a22, &blk.b2, &blk.c2, &sig.d_k);
    Ok(StateSpace { a, b, c, d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::{canonical_attack_form, signature, AttackSet};

    #[test]
    fn nonsingular_e_reduces_to_inverse() {
        let e = Mat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let a = Mat::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -2.0]);
        let sys = canonical_attack_form(e.clone(), a.clone(), Mat::identity(1, 2)).unwrap();
        let sig = signature(&sys, &AttackSet::new(vec![1]).unwrap()).unwrap();
        let kr = kron_reduce(&sys, &sig).unwrap();
        let expect = e.try_inverse().unwrap() * a;
        assert!((kr.a_til - expect).norm() < 1e-14);
        assert_eq!(kr.recovery_state.nrows(), 0);
    }

    #[test]
    fn scalar_transfer() {
        let sys = canonical_attack_form(Mat::identity(1, 1), Mat::from_element(1, 1, -1.0), Mat::identity(1, 1)).unwrap();
        let sig = signature(&sys, &AttackSet::new(vec![1]).unwrap()).unwrap();
        let g = transfer_at(&sys, &sig, Complex64::new(0.0, 0.0)).unwrap();
        assert!((g[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(transfer_at(&sys, &sig, Complex64::new(-1.0, 0.0)), Err(Error::SingularAtS { .. })));
    }

    #[test]
    fn recovery_is_linear() {
        let e = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a = Mat::from_row_slice(2, 2, &[-1.0, 0.5, 2.0, -1.0]);
        let sys = canonical_attack_form(e, a, Mat::identity(1, 2)).unwrap();
        let sig = signature(&sys, &AttackSet::new(vec![2]).unwrap()).unwrap();
        let kr = kron_reduce(&sys, &sig).unwrap();
        assert_eq!(recover_algebraic(&kr, &Vector::zeros(1), &Vector::zeros(1)), Vector::zeros(1));
        let x2 = recover_algebraic(&kr, &Vector::zeros(1), &Vector::from_element(1, 1.0));
        assert!((x2[0] - kr.recovery_input[(0, 0)]).abs() < 1e-15);
        assert!((kr.recovery_input[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((kr.a_til[(0, 0)] - 0.0).abs() < 1e-15);
    }
}
