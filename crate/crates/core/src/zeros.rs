//! Invariant zeros of Rosenbrock pencils.
//!
//! The pencil `P(s) = s·P1 + P0` with `P1 = blkdiag(E, 0)` and
//! `P0 = [−A −B_K; C D_K]` loses column rank exactly at the invariant zeros.
//! Non-square pencils are compressed by a random orthonormal left factor;
//! the square pencil is shift-inverted at a real shift, its infinite
//! structure is deflated by iterating on the range of the shift-inverted
//! operator, and every candidate is refined by Newton steps on the smallest
//! singular value and then certified by a rank-drop test on the original
//! pencil. Candidates introduced by the compression fail the certificate.

use crate::descriptor::{pencil_scale, AttackSignature, DescriptorSystem};
use crate::error::{Error, Result};
use crate::kron::StateSpace;
use crate::linalg::{self, CMat, CVector, Mat};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `P(s) = s·P1 + P0` with `n` state columns and `k` input columns.
#[derive(Clone, Debug)]
pub struct RosenbrockPencil {
    pub p0: Mat,
    pub p1: Mat,
    pub n: usize,
    pub k: usize,
    pub p: usize,
}

impl RosenbrockPencil {
    pub fn new(sys: &DescriptorSystem, sig: &AttackSignature) -> Self {
        Self::from_parts(&sys.e, &sys.a, &sig.b_k, &sys.c, &sig.d_k)
    }

    pub fn from_parts(e: &Mat, a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Self {
        let (n, k, p) = (a.nrows(), b.ncols(), c.nrows());
        let p0 = linalg::block2x2(&(-a), &(-b), c, d);
        let p1 = linalg::blkdiag(e, &Mat::zeros(p, k));
        Self { p0, p1, n, k, p }
    }

    /// The pencil `sE − A` alone (no inputs, no outputs).
    pub fn eigen_pencil(e: &Mat, a: &Mat) -> Self {
        let n = a.nrows();
        Self::from_parts(e, a, &Mat::zeros(n, 0), &Mat::zeros(0, n), &Mat::zeros(0, 0))
    }

    pub fn rows(&self) -> usize {
        self.p0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.p0.ncols()
    }

    pub fn at(&self, s: Complex64) -> CMat {
        linalg::to_complex(&self.p1) * s + linalg::to_complex(&self.p0)
    }

    pub fn at_real(&self, s: f64) -> Mat {
        &self.p1 * s + &self.p0
    }

    /// Natural scale of `s` at which `s·P1` and `P0` balance.
    pub fn scale(&self) -> f64 {
        pencil_scale(&self.p1, &self.p0)
    }

    /// Normal rank: the largest rank observed at three random complex points.
    pub fn normal_rank(&self, seed: u64) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e72);
        let scale = self.scale();
        (0..3)
            .map(|_| {
                let s = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
                let m = self.at(s);
                let sv = linalg::csingular_values(&m);
                let smax = sv.first().copied().unwrap_or(0.0);
                let tol = 1e3 * linalg::rank_tol(m.nrows(), m.ncols(), smax);
                sv.iter().filter(|&&x| x > tol).count()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn is_left_invertible(&self, seed: u64) -> bool {
        self.normal_rank(seed) == self.cols()
    }

    /// `‖P(s)·v‖ / ‖v‖`.
    pub fn residual(&self, s: Complex64, v: &CVector) -> f64 {
        let nv = v.norm();
        if nv == 0.0 {
            return f64::INFINITY;
        }
        (self.at(s) * v).norm() / nv
    }
}

/// A finite invariant zero with state and input zero directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ZeroRecord", from = "ZeroRecord")]
pub struct InvariantZero {
    pub s: Complex64,
    pub x: CVector,
    pub g: CVector,
    pub residual: f64,
}

impl InvariantZero {
    pub fn is_real(&self) -> bool {
        self.s.im == 0.0
    }
}

/// JSON form of an [`InvariantZero`]: complex numbers as `[re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub s: [f64; 2],
    pub x: Vec<[f64; 2]>,
    pub g: Vec<[f64; 2]>,
    pub residual: f64,
}

fn pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn unpairs(v: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|p| Complex64::new(p[0], p[1])))
}

impl From<InvariantZero> for ZeroRecord {
    fn from(z: InvariantZero) -> Self {
        Self { s: [z.s.re, z.s.im], x: pairs(&z.x), g: pairs(&z.g), residual: z.residual }
    }
}

impl From<ZeroRecord> for InvariantZero {
    fn from(r: ZeroRecord) -> Self {
        Self { s: Complex64::new(r.s[0], r.s[1]), x: unpairs(&r.x), g: unpairs(&r.g), residual: r.residual }
    }
}

/// Tuning knobs for the zero solver.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZeroOptions {
    pub seed: u64,
    /// Relative rank-drop threshold used to certify candidates.
    pub cert_rtol: f64,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        Self { seed: 0x5eed, cert_rtol: 1e-8 }
    }
}

/// Finite eigenvalues of the square pencil `det(s·P1 + P0) = 0`, unrefined.
pub fn finite_pencil_eigenvalues(p1: &Mat, p0: &Mat, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let n = p1.nrows();
    if n == 0 {
        return Vec::new();
    }
    let n1 = linalg::spectral_norm(p1);
    if n1 == 0.0 {
        return Vec::new();
    }
    let n0 = linalg::spectral_norm(p0);
    let base = if n0 > 0.0 { n0 / n1 } else { 1.0 };
    for attempt in 0..12 {
        let sign = if attempt % 2 == 0 { 1.0 } else { -1.0 };
        let sigma = sign * base * rng.gen_range(0.7..1.3);
        let ps = p1 * sigma + p0;
        let sv = linalg::singular_values(&ps);
        if sv[n - 1] <= 1e-9 * sv[0] {
            continue;
        }
        let m = -ps.lu().solve(p1).expect("shifted pencil is nonsingular");
        let mnorm = linalg::spectral_norm(&m);
        let tol = 10.0 * linalg::rank_tol(n, n, mnorm);
        let mut q = linalg::orth(&m, Some(tol));
        loop {
            if q.ncols() == 0 {
                return Vec::new();
            }
            let q2 = linalg::orth(&(&m * &q), Some(tol));
            if q2.ncols() == q.ncols() {
                break;
            }
            q = q2;
        }
        let t = q.transpose() * &m * &q;
        return linalg::eigenvalues(&t)
            .into_iter()
            .filter(|l| l.norm() > 1e-12 * mnorm)
            .map(|l| Complex64::new(sigma, 0.0) + l.inv())
            .collect();
    }
    Vec::new()
}

fn newton_refine(p1: &CMat, p0: &CMat, s0: Complex64) -> Complex64 {
    let sigma_at = |s: Complex64| linalg::min_singular_triplet(&(p1 * s + p0));
    let mut s = s0;
    let (mut best_sigma, mut best_s) = (f64::INFINITY, s0);
    for _ in 0..12 {
        let (sig, u, v) = sigma_at(s);
        if sig < best_sigma {
            best_sigma = sig;
            best_s = s;
        }
        if sig == 0.0 {
            break;
        }
        let den = (u.adjoint() * p1 * &v)[(0, 0)];
        if den.norm() == 0.0 {
            break;
        }
        let num = (u.adjoint() * (p1 * s + p0) * &v)[(0, 0)];
        let step = -num / den;
        s += step;
        if step.norm() <= 1e-15 * (1.0 + s.norm()) {
            let (sig, _, _) = sigma_at(s);
            if sig < best_sigma {
                best_s = s;
            }
            break;
        }
    }
    if (best_s - s0).norm() > 1e-3 * (1.0 + s0.norm()) {
        s0
    } else {
        best_s
    }
}

fn random_orthonormal_rows(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    let g = Mat::from_fn(cols, rows, |_, _| rng.gen_range(-1.0..1.0));
    g.qr().q().transpose()
}

/// Certified finite zeros of a pencil with full normal column rank.
pub fn pencil_zeros(pencil: &RosenbrockPencil, opts: &ZeroOptions) -> Result<Vec<InvariantZero>> {
    let (r, c) = (pencil.rows(), pencil.cols());
    if c == 0 {
        return Ok(Vec::new());
    }
    if r < c || !pencil.is_left_invertible(opts.seed) {
        return Err(Error::NotLeftInvertible);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (p1s, p0s) = if r > c {
        let w = random_orthonormal_rows(c, r, &mut rng);
        (&w * &pencil.p1, &w * &pencil.p0)
    } else {
        (pencil.p1.clone(), pencil.p0.clone())
    };
    let candidates = finite_pencil_eigenvalues(&p1s, &p0s, &mut rng);
    let (p1c, p0c) = (linalg::to_complex(&p1s), linalg::to_complex(&p0s));
    let n1 = linalg::spectral_norm(&pencil.p1);
    let n0 = linalg::spectral_norm(&pencil.p0);
    let scale = pencil.scale();

    let mut kept: Vec<InvariantZero> = Vec::new();
    for cand in candidates {
        if cand.im < 0.0 {
            continue;
        }
        let mut s = newton_refine(&p1c, &p0c, cand);
        if s.norm() > 1e8 * scale {
            continue;
        }
        if s.im.abs() <= 1e-9 * (1.0 + s.norm()) {
            s.im = 0.0;
        } else if s.im < 0.0 {
            s = s.conj();
        }
        let Some(z) = certify(pencil, s, opts.cert_rtol * (n0 + s.norm() * n1)) else {
            continue;
        };
        if z.s.im > 0.0 {
            let conj = InvariantZero { s: z.s.conj(), x: z.x.conjugate(), g: z.g.conjugate(), residual: z.residual };
            kept.push(z);
            kept.push(conj);
        } else {
            kept.push(z);
        }
    }
    kept.sort_by(|a, b| a.s.re.total_cmp(&b.s.re).then(a.s.im.total_cmp(&b.s.im)));
    Ok(kept)
}

/// Packages `s` with a null direction of the original pencil if the rank
/// drop is within `tol` and the state direction is nonzero.
fn certify(pencil: &RosenbrockPencil, s: Complex64, tol: f64) -> Option<InvariantZero> {
    let n = pencil.n;
    let v: CVector = if s.im == 0.0 {
        let m = pencil.at_real(s.re);
        let (vv, sv) = linalg::right_full(&m);
        let smin = if m.nrows() >= m.ncols() { *sv.last().unwrap() } else { 0.0 };
        if smin > tol {
            return None;
        }
        linalg::cvec(&vv.column(vv.ncols() - 1).into_owned())
    } else {
        let (smin, _, v) = linalg::min_singular_triplet(&pencil.at(s));
        if smin > tol {
            return None;
        }
        v
    };
    let v = normalize_phase(v);
    let x = v.rows(0, n).into_owned();
    let g = v.rows(n, v.len() - n).into_owned();
    if x.norm() <= 1e-8 * v.norm() {
        return None;
    }
    let residual = pencil.residual(s, &v);
    Some(InvariantZero { s, x, g, residual })
}

/// Rotates a vector so its largest entry is real and positive.
pub(crate) fn normalize_phase(v: CVector) -> CVector {
    let Some((i, _)) = v.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())) else {
        return v;
    };
    let piv = v[i];
    if piv.norm() == 0.0 {
        return v;
    }
    let rot = piv.conj() / piv.norm();
    let nv = v.norm();
    v.map(|z| z * rot / nv)
}

/// Finite invariant zeros of `(E, A, B_K, C, D_K)`.
pub fn invariant_zeros(sys: &DescriptorSystem, sig: &AttackSignature) -> Result<Vec<InvariantZero>> {
    invariant_zeros_with(sys, sig, &ZeroOptions::default())
}

pub fn invariant_zeros_with(sys: &DescriptorSystem, sig: &AttackSignature, opts: &ZeroOptions) -> Result<Vec<InvariantZero>> {
    if !crate::descriptor::check_regular(sys, 5, opts.seed) {
        return Err(Error::NotRegular);
    }
    pencil_zeros(&RosenbrockPencil::new(sys, sig), opts)
}

/// Finite generalized eigenpairs `(s, x)` of `sE − A`, refined and certified.
pub fn generalized_eigenpairs(e: &Mat, a: &Mat, opts: &ZeroOptions) -> Result<Vec<InvariantZero>> {
    pencil_zeros(&RosenbrockPencil::eigen_pencil(e, a), opts).map_err(|_| Error::NotRegular)
}

/// Invariant zeros of a standard state-space system via a rank-reducing
/// staircase: the feedthrough is row-compressed, the zero-feedthrough output
/// rows are column-compressed, the corresponding state directions are
/// eliminated, and the process repeats until the feedthrough has full row
/// rank. For a square invertible remainder the zeros are the eigenvalues of
/// `A − B D⁻¹ C`.
pub fn statespace_zeros(ss: &StateSpace) -> Result<Vec<Complex64>> {
    let (mut a, mut b, mut c, mut d) = (ss.a.clone(), ss.b.clone(), ss.c.clone(), ss.d.clone());
    let m = b.ncols();
    let full = linalg::block2x2(&a, &b, &c, &d);
    let scale = linalg::spectral_norm(&full).max(f64::MIN_POSITIVE);
    let tol = 1e3 * linalg::rank_tol(full.nrows(), full.ncols(), scale);
    loop {
        let p = d.nrows();
        let n = a.nrows();
        let (u, sv) = linalg::left_full(&d);
        let tau = sv.iter().filter(|&&x| x > tol).count();
        if tau == p {
            break;
        }
        let ut = u.transpose();
        let dt = &ut * &d;
        let ct = &ut * &c;
        let d2 = dt.rows(0, tau).into_owned();
        let c2 = ct.rows(0, tau).into_owned();
        let c1 = ct.rows(tau, p - tau).into_owned();
        if n == 0 {
            d = d2;
            c = c2;
            break;
        }
        let (v, sv1) = linalg::right_full(&c1);
        let rho = sv1.iter().filter(|&&x| x > tol).count();
        if rho == 0 {
            d = d2;
            c = c2;
            continue;
        }
        let vb = v.columns(0, rho).into_owned();
        let va = v.columns(rho, n - rho).into_owned();
        let a_aa = va.transpose() * &a * &va;
        let a_ba = vb.transpose() * &a * &va;
        let b_a = va.transpose() * &b;
        let b_b = vb.transpose() * &b;
        let c2a = &c2 * &va;
        a = a_aa;
        b = b_a;
        c = linalg::vstack(&a_ba, &c2a);
        d = linalg::vstack(&b_b, &d2);
    }
    if d.nrows() < m {
        return Err(Error::NotLeftInvertible);
    }
    if d.nrows() > m {
        let (u, _) = linalg::left_full(&d);
        let w = u.columns(0, m).transpose();
        let dd = &w * &d;
        let cc = &w * &c;
        return Ok(square_zeros(&a, &b, &cc, &dd));
    }
    Ok(square_zeros(&a, &b, &c, &d))
}

fn square_zeros(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let dinv_c = d.clone().lu().solve(c).expect("full-rank feedthrough");
    let mut z = linalg::eigenvalues(&(a - b * dinv_c));
    z.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    z
}
