//! Descriptor-system data model, attack sets and the validity checks that
//! gate every other analysis.
//!
//! A [`DescriptorSystem`] describes
//!
//! ```text
//! E x'(t) = A x(t) + B u(t)
//!   y(t)  = C x(t) + D u(t)
//! ```
//!
//! with a possibly singular `E`. In canonical attack form every state
//! equation and every output can be corrupted independently: `B = [I_n 0]`,
//! `D = [0 I_p]`, so attack channel `i` (1-based) targets state `i` when
//! `i <= n` and output `i - n` otherwise.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Optional human-readable names for states and outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

/// The quintuple `(E, A, B, C, D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescriptorSystem {
    pub e: Mat,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub labels: Option<Labels>,
}

impl DescriptorSystem {
    pub fn new(e: Mat, a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || e.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "E is {:?} and A is {:?}; both must be n x n",
                e.shape(),
                a.shape()
            )));
        }
        if b.nrows() != n {
            return Err(Error::DimensionMismatch(format!("B has {} rows, expected {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::DimensionMismatch(format!("C has {} columns, expected {n}", c.ncols())));
        }
        if d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "D is {:?}, expected {:?}",
                d.shape(),
                (c.nrows(), b.ncols())
            )));
        }
        Ok(Self { e, a, b, c, d, labels: None })
    }

    pub fn with_labels(mut self, labels: Labels) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// True when `B = [I_n 0]` and `D = [0 I_p]` exactly.
    pub fn is_canonical(&self) -> bool {
        let (n, p) = (self.n(), self.p());
        if self.m() != n + p {
            return false;
        }
        let b_ok = (0..n).all(|i| (0..n + p).all(|j| self.b[(i, j)] == if i == j { 1.0 } else { 0.0 }));
        let d_ok = (0..p).all(|i| (0..n + p).all(|j| self.d[(i, j)] == if j == n + i { 1.0 } else { 0.0 }));
        b_ok && d_ok
    }

    /// Replaces `C` (and the output block of `D` in canonical form).
    pub fn with_outputs(&self, c: Mat) -> Result<Self> {
        let mut out = canonical_attack_form(self.e.clone(), self.a.clone(), c)?;
        if let Some(l) = &self.labels {
            out.labels = Some(Labels { states: l.states.clone(), outputs: Vec::new() });
        }
        Ok(out)
    }
}

/// Builds the canonical attack form `B = [I_n 0]`, `D = [0 I_p]`.
pub fn canonical_attack_form(e: Mat, a: Mat, c: Mat) -> Result<DescriptorSystem> {
    let n = a.nrows();
    let p = c.nrows();
    if c.ncols() != n {
        return Err(Error::DimensionMismatch(format!("C has {} columns, expected {n}", c.ncols())));
    }
    let mut b = Mat::zeros(n, n + p);
    let mut d = Mat::zeros(p, n + p);
    for i in 0..n {
        b[(i, i)] = 1.0;
    }
    for i in 0..p {
        d[(i, n + i)] = 1.0;
    }
    DescriptorSystem::new(e, a, b, c, d)
}

/// Pencil scale used to place random sample points where `sE` and `A` are
/// comparable in size.
pub(crate) fn pencil_scale(e: &Mat, a: &Mat) -> f64 {
    let ne = e.norm();
    let na = a.norm();
    if ne > 0.0 && na > 0.0 {
        (na / ne).clamp(1e-6, 1e6)
    } else {
        1.0
    }
}

/// Randomized regularity test: `det(sE - A)` is sampled at `trials` random
/// complex points and the pencil is declared regular if any sample is
/// numerically nonsingular.
pub fn check_regular(sys: &DescriptorSystem, trials: usize, rng_seed: u64) -> bool {
    let n = sys.n();
    if n == 0 {
        return true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = pencil_scale(&sys.e, &sys.a);
    let ec = linalg::to_complex(&sys.e);
    let ac = linalg::to_complex(&sys.a);
    for _ in 0..trials.max(1) {
        let s = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
        let m = &ec * s - &ac;
        let sv = linalg::csingular_values(&m);
        let smax = sv[0];
        let smin = sv[n - 1];
        if smax > 0.0 && smin > 1e3 * linalg::rank_tol(n, n, smax) {
            return true;
        }
    }
    false
}

/// Block partition `QEZ = blkdiag(E11, 0)` of an index-one descriptor system.
///
/// For a permutation-block `E` the matrices `Q` and `Z` are permutations
/// and `dynamic`/`algebraic` are original state indices (0-based). Otherwise
/// `Q = U^T`, `Z = V` from an SVD `E = U S V^T`, and the indices refer to the
/// transformed coordinates `x = Z xt`.
#[derive(Clone, Debug)]
pub struct StatePartition {
    pub dynamic: Vec<usize>,
    pub algebraic: Vec<usize>,
    /// Equation rows kept as differential equations (permutation case).
    pub dynamic_rows: Vec<usize>,
    pub algebraic_rows: Vec<usize>,
    pub e11: Mat,
    pub q: Mat,
    pub z: Mat,
    pub transformed: bool,
    pub certified_index_one: bool,
}

/// The blocks of a partitioned system in the coordinates of its partition.
#[derive(Clone, Debug)]
pub struct PartitionBlocks {
    pub e11: Mat,
    pub a11: Mat,
    pub a12: Mat,
    pub a21: Mat,
    pub a22: Mat,
    pub b1: Mat,
    pub b2: Mat,
    pub c1: Mat,
    pub c2: Mat,
}

impl StatePartition {
    pub fn n1(&self) -> usize {
        self.dynamic.len()
    }

    pub fn n2(&self) -> usize {
        self.algebraic.len()
    }

    /// Splits `(Q A Z, Q B, C Z)` into the index-one blocks; `b` may be any
    /// input matrix with n rows.
    pub fn blocks(&self, e: &Mat, a: &Mat, b: &Mat, c: &Mat) -> PartitionBlocks {
        let n1 = self.n1();
        let n = n1 + self.n2();
        let at = &self.q * a * &self.z;
        let bt = &self.q * b;
        let ct = c * &self.z;
        let et = &self.q * e * &self.z;
        let n2 = n - n1;
        PartitionBlocks {
            e11: et.view((0, 0), (n1, n1)).into_owned(),
            a11: at.view((0, 0), (n1, n1)).into_owned(),
            a12: at.view((0, n1), (n1, n2)).into_owned(),
            a21: at.view((n1, 0), (n2, n1)).into_owned(),
            a22: at.view((n1, n1), (n2, n2)).into_owned(),
            b1: bt.rows(0, n1).into_owned(),
            b2: bt.rows(n1, n2).into_owned(),
            c1: ct.columns(0, n1).into_owned(),
            c2: ct.columns(n1, n2).into_owned(),
        }
    }

    /// Maps partition coordinates `[x1; x2]` back to original states.
    pub fn to_original(&self, x1: &Vector, x2: &Vector) -> Vector {
        let mut xt = Vector::zeros(x1.len() + x2.len());
        xt.rows_mut(0, x1.len()).copy_from(x1);
        xt.rows_mut(x1.len(), x2.len()).copy_from(x2);
        &self.z * xt
    }

    /// Maps an original state to partition coordinates `(x1, x2)`.
    pub fn split(&self, x: &Vector) -> (Vector, Vector) {
        let xt = self.z.transpose() * x;
        let n1 = self.n1();
        (xt.rows(0, n1).into_owned(), xt.rows(n1, xt.len() - n1).into_owned())
    }

    /// Reassembles `E` from the stored blocks and transformations.
    pub fn reassemble_e(&self) -> Mat {
        let n = self.n1() + self.n2();
        let mut blk = Mat::zeros(n, n);
        blk.view_mut((0, 0), self.e11.shape()).copy_from(&self.e11);
        self.q.transpose() * blk * self.z.transpose()
    }
}

fn permutation(order: &[usize]) -> Mat {
    let n = order.len();
    let mut p = Mat::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        p[(new, old)] = 1.0;
    }
    p
}

/// Computes the index-one partition of a regular descriptor system.
pub fn partition_index_one(sys: &DescriptorSystem) -> Result<StatePartition> {
    if !check_regular(sys, 5, 0x5eed) {
        return Err(Error::NotRegular);
    }
    let n = sys.n();
    let e = &sys.e;
    let r = linalg::rank(e, None);
    let rows: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| e[(i, j)] != 0.0)).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| (0..n).any(|i| e[(i, j)] != 0.0)).collect();

    let mut part = if rows.len() == r && cols.len() == r {
        let alg_rows: Vec<usize> = (0..n).filter(|i| !rows.contains(i)).collect();
        let alg_cols: Vec<usize> = (0..n).filter(|j| !cols.contains(j)).collect();
        let row_order: Vec<usize> = rows.iter().chain(&alg_rows).copied().collect();
        let col_order: Vec<usize> = cols.iter().chain(&alg_cols).copied().collect();
        let q = permutation(&row_order);
        let z = permutation(&col_order).transpose();
        StatePartition {
            e11: linalg::select_block(e, &rows, &cols),
            dynamic: cols,
            algebraic: alg_cols,
            dynamic_rows: rows,
            algebraic_rows: alg_rows,
            q,
            z,
            transformed: false,
            certified_index_one: false,
        }
    } else {
        let (u, _) = linalg::left_full(e);
        let (v, _) = linalg::right_full(e);
        let q = u.transpose();
        let qez = &q * e * &v;
        let mut e11 = qez.view((0, 0), (r, r)).into_owned();
        for i in 0..r {
            for j in 0..r {
                if i != j {
                    e11[(i, j)] = 0.0;
                }
            }
        }
        StatePartition {
            e11,
            dynamic: (0..r).collect(),
            algebraic: (r..n).collect(),
            dynamic_rows: (0..r).collect(),
            algebraic_rows: (r..n).collect(),
            q,
            z: v,
            transformed: true,
            certified_index_one: false,
        }
    };
    let blocks = part.blocks(&sys.e, &sys.a, &sys.b, &sys.c);
    if part.n2() > 0 {
        let a22 = &blocks.a22;
        let scale = linalg::spectral_norm(&sys.a).max(f64::MIN_POSITIVE);
        let sv = linalg::singular_values(a22);
        let smin = *sv.last().unwrap();
        if smin <= linalg::rank_tol(n, n, scale) * 10.0 {
            return Err(Error::NotIndexOne(format!("A22 is numerically singular (sigma_min = {smin:.3e})")));
        }
    }
    if part.n1() > 0 && linalg::rank(&part.e11, None) < part.n1() {
        return Err(Error::NotIndexOne("E11 is singular".into()));
    }
    part.certified_index_one = true;
    Ok(part)
}

/// Tests `Nᵀ(A x0 + B u0) = 0` for a basis `N` of `Ker(Eᵀ)`.
pub fn check_consistent_initial(sys: &DescriptorSystem, x0: &Vector, u0: &Vector) -> bool {
    let n_left = linalg::left_null_space(&sys.e, None);
    if n_left.ncols() == 0 {
        return true;
    }
    let rhs = &sys.a * x0 + &sys.b * u0;
    let res = n_left.transpose() * &rhs;
    let scale = 1.0 + sys.a.norm() * x0.norm() + sys.b.norm() * u0.norm();
    res.norm() <= 1e-8 * scale
}

/// An attack set `K`, stored as strictly increasing 1-based channel indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttackSet {
    indices: Vec<usize>,
}

impl AttackSet {
    /// Sorts the indices; rejects zero and duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.first() == Some(&0) {
            return Err(Error::IndexOutOfRange { index: 0, max: usize::MAX });
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("attack set contains duplicate indices".into()));
        }
        Ok(Self { indices })
    }

    pub fn empty() -> Self {
        Self { indices: Vec::new() }
    }

    /// Builds from 0-based channel indices.
    pub fn from_zero_based(idx: &[usize]) -> Self {
        let mut indices: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i - 1).collect()
    }

    pub fn union(&self, other: &AttackSet) -> AttackSet {
        let mut v: Vec<usize> = self.indices.iter().chain(&other.indices).copied().collect();
        v.sort_unstable();
        v.dedup();
        AttackSet { indices: v }
    }

    pub fn state_indices(&self, n: usize) -> Vec<usize> {
        self.indices.iter().copied().filter(|&i| i <= n).collect()
    }

    pub fn output_indices(&self, n: usize) -> Vec<usize> {
        self.indices.iter().copied().filter(|&i| i > n).collect()
    }

    pub fn check_range(&self, max: usize) -> Result<()> {
        match self.indices.last() {
            Some(&i) if i > max => Err(Error::IndexOutOfRange { index: i, max }),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for AttackSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Whether a channel corrupts a state equation or a measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// 1-based state index.
    State(usize),
    /// 1-based output index.
    Output(usize),
}

/// Column selections `(B_K, D_K)` of an attack set.
#[derive(Clone, Debug)]
pub struct AttackSignature {
    pub b_k: Mat,
    pub d_k: Mat,
    pub origin: AttackSet,
    pub kinds: Vec<ChannelKind>,
}

impl AttackSignature {
    pub fn k(&self) -> usize {
        self.b_k.ncols()
    }

    pub fn has_state_attack(&self) -> bool {
        self.kinds.iter().any(|k| matches!(k, ChannelKind::State(_)))
    }

    pub fn is_output_only(&self) -> bool {
        self.kinds.iter().all(|k| matches!(k, ChannelKind::Output(_)))
    }
}

/// Selects the attack-set columns of `B` and `D`.
pub fn signature(sys: &DescriptorSystem, k: &AttackSet) -> Result<AttackSignature> {
    k.check_range(sys.m())?;
    let idx = k.zero_based();
    let n = sys.n();
    let kinds = k
        .indices()
        .iter()
        .map(|&i| if i <= n { ChannelKind::State(i) } else { ChannelKind::Output(i - n) })
        .collect();
    Ok(AttackSignature {
        b_k: linalg::select_columns(&sys.b, &idx),
        d_k: linalg::select_columns(&sys.d, &idx),
        origin: k.clone(),
        kinds,
    })
}

/// JSON system file: matrices as row-major arrays of rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemFile {
    pub n: usize,
    pub p: usize,
    #[serde(rename = "E")]
    pub e: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Labels>,
}

pub fn mat_from_rows(rows: &[Vec<f64>], nrows: usize, ncols: usize, name: &str) -> Result<Mat> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!("{name} must be {nrows} x {ncols}")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} contains non-finite entries")));
    }
    Ok(Mat::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl SystemFile {
    pub fn into_system(self) -> Result<DescriptorSystem> {
        let (n, p) = (self.n, self.p);
        let e = mat_from_rows(&self.e, n, n, "E")?;
        let a = mat_from_rows(&self.a, n, n, "A")?;
        let c = mat_from_rows(&self.c, p, n, "C")?;
        let mut sys = match (self.b, self.d) {
            (None, None) => canonical_attack_form(e, a, c)?,
            (Some(b), d) => {
                let m = b.first().map(|r| r.len()).unwrap_or(0);
                let b = mat_from_rows(&b, n, m, "B")?;
                let d = match d {
                    Some(d) => mat_from_rows(&d, p, m, "D")?,
                    None => Mat::zeros(p, m),
                };
                DescriptorSystem::new(e, a, b, c, d)?
            }
            (None, Some(_)) => return Err(Error::InvalidInput("D given without B".into())),
        };
        sys.labels = self.labels;
        Ok(sys)
    }

    pub fn from_system(sys: &DescriptorSystem) -> Self {
        let canonical = sys.is_canonical();
        SystemFile {
            n: sys.n(),
            p: sys.p(),
            e: mat_to_rows(&sys.e),
            a: mat_to_rows(&sys.a),
            c: mat_to_rows(&sys.c),
            b: (!canonical).then(|| mat_to_rows(&sys.b)),
            d: (!canonical).then(|| mat_to_rows(&sys.d)),
            labels: sys.labels.clone(),
        }
    }
}

impl DescriptorSystem {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: SystemFile = serde_json::from_str(s)?;
        f.into_system()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&SystemFile::from_system(self)).expect("plain data serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar() -> DescriptorSystem {
        canonical_attack_form(Mat::identity(1, 1), Mat::from_element(1, 1, -1.0), Mat::identity(1, 1)).unwrap()
    }

    #[test]
    fn canonical_scalar() {
        let s = scalar();
        assert_eq!(s.b, Mat::from_row_slice(1, 2, &[1.0, 0.0]));
        assert_eq!(s.d, Mat::from_row_slice(1, 2, &[0.0, 1.0]));
        assert!(s.is_canonical());
    }

    #[test]
    fn canonical_rejects_bad_c() {
        let r = canonical_attack_form(Mat::identity(2, 2), Mat::identity(2, 2), Mat::zeros(1, 3));
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn zero_pencil_is_accepted_but_singular() {
        let s = canonical_attack_form(Mat::zeros(1, 1), Mat::zeros(1, 1), Mat::zeros(1, 1)).unwrap();
        assert!(!check_regular(&s, 5, 1));
        let s2 = canonical_attack_form(Mat::zeros(2, 2), Mat::identity(2, 2), Mat::zeros(0, 2)).unwrap();
        assert!(check_regular(&s2, 5, 1));
    }

    #[test]
    fn identity_e_partition() {
        let s = canonical_attack_form(Mat::identity(3, 3), Mat::identity(3, 3) * -2.0, Mat::identity(1, 3)).unwrap();
        let p = partition_index_one(&s).unwrap();
        assert_eq!(p.dynamic, vec![0, 1, 2]);
        assert!(p.algebraic.is_empty());
        assert_eq!(p.e11, Mat::identity(3, 3));
    }

    #[test]
    fn rank_factorized_partition() {
        let e = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let s = canonical_attack_form(e.clone(), Mat::identity(2, 2), Mat::identity(1, 2)).unwrap();
        let p = partition_index_one(&s).unwrap();
        assert!(p.transformed);
        assert_eq!((p.n1(), p.n2()), (1, 1));
        assert!((p.reassemble_e() - e).norm() < 1e-12);
    }

    #[test]
    fn singular_a22_is_not_index_one() {
        let e = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let s = canonical_attack_form(e, a, Mat::identity(1, 2)).unwrap();
        assert!(matches!(partition_index_one(&s), Err(Error::NotIndexOne(_))));
    }

    #[test]
    fn consistency_of_initial_state() {
        let e = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a = Mat::from_row_slice(2, 2, &[-1.0, 0.5, 2.0, -1.0]);
        let s = canonical_attack_form(e, a, Mat::identity(1, 2)).unwrap();
        let u0 = Vector::zeros(3);
        let x1 = 0.7;
        let x2 = 2.0 * x1;
        assert!(check_consistent_initial(&s, &Vector::from_vec(vec![x1, x2]), &u0));
        assert!(!check_consistent_initial(&s, &Vector::from_vec(vec![x1, x2 + 1.0]), &u0));
        let ns = scalar();
        assert!(check_consistent_initial(&ns, &Vector::from_vec(vec![3.0]), &Vector::from_vec(vec![1.0, -2.0])));
    }

    #[test]
    fn signature_classification() {
        let s = scalar();
        let sig = signature(&s, &AttackSet::new(vec![2]).unwrap()).unwrap();
        assert_eq!(sig.kinds, vec![ChannelKind::Output(1)]);
        assert_eq!(sig.b_k, Mat::zeros(1, 1));
        assert_eq!(sig.d_k, Mat::identity(1, 1));
        let empty = signature(&s, &AttackSet::empty()).unwrap();
        assert_eq!(empty.k(), 0);
        assert!(matches!(
            signature(&s, &AttackSet::new(vec![3]).unwrap()),
            Err(Error::IndexOutOfRange { index: 3, max: 2 })
        ));
    }

    #[test]
    fn attack_set_normalizes() {
        let k = AttackSet::new(vec![9, 8]).unwrap();
        assert_eq!(k.indices(), &[8, 9]);
        assert!(AttackSet::new(vec![1, 1]).is_err());
        assert!(AttackSet::new(vec![0]).is_err());
        assert_eq!(k.to_string(), "{8,9}");
    }

    #[test]
    fn json_round_trip() {
        let s = scalar();
        let text = s.to_json_string();
        let back = DescriptorSystem::from_json_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
