//! Detectability and identifiability of attack sets.
//!
//! Static monitors see single output snapshots, so an attack is invisible to
//! them iff `D_K u_K ∈ Im(C)`. Dynamic monitors see full trajectories and
//! are fooled iff the Rosenbrock pencil of the attack signature has a null
//! vector `[x; g]` with `x ≠ 0`, either at an invariant zero or at every `s`
//! when the pencil is not left-invertible. Active monitors inherit the
//! dynamic verdict since their probe signal enters the plant linearly.

use crate::descriptor::{check_regular, signature, AttackSet, AttackSignature, DescriptorSystem};
use crate::error::{Error, Result};
use crate::kron::{associated_nonsingular, kron_reduce};
use crate::linalg::{self, CVector, Mat, Vector};
use crate::util;
use crate::zeros::{self, normalize_phase, InvariantZero, RosenbrockPencil, ZeroOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default cap on subset evaluations for combinatorial searches.
pub const DEFAULT_BUDGET: usize = 100_000;

/// Subsets evaluated per parallel batch.
const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorClass {
    Static,
    Dynamic,
    Active,
}

/// How a dynamic witness was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Finite invariant zero of a left-invertible pencil.
    FiniteZero,
    /// Null vector of a pencil without full normal column rank, taken at a
    /// sample point; such null vectors exist at every `s`.
    RankDeficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicWitness {
    #[serde(flatten)]
    pub zero: InvariantZero,
    pub kind: WitnessKind,
}

/// `C x + D_K u = 0` with `u ≠ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticWitness {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    Dynamic(DynamicWitness),
    Static(StaticWitness),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectabilityVerdict {
    pub undetectable: bool,
    pub witness: Option<Witness>,
    pub monitor_class: MonitorClass,
    pub budget_exhausted: bool,
}

impl DetectabilityVerdict {
    fn detectable(class: MonitorClass) -> Self {
        Self { undetectable: false, witness: None, monitor_class: class, budget_exhausted: false }
    }

    /// The dynamic witness, if any.
    pub fn zero(&self) -> Option<&InvariantZero> {
        match &self.witness {
            Some(Witness::Dynamic(w)) => Some(&w.zero),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("verdict serializes")
    }
}

/// Budget and seed for randomized and combinatorial procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub budget: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, seed: 0x5eed }
    }
}

impl SearchOptions {
    fn zero_options(&self) -> ZeroOptions {
        ZeroOptions { seed: self.seed, ..ZeroOptions::default() }
    }
}

/// Static detectability: `K` is undetectable iff some `u ≠ 0` has
/// `D_K u ∈ Im(C)`. Pure and mixed state attacks are always undetectable.
pub fn static_undetectable(sys: &DescriptorSystem, k: &AttackSet) -> Result<DetectabilityVerdict> {
    let sig = signature(sys, k)?;
    if k.is_empty() {
        return Ok(DetectabilityVerdict::detectable(MonitorClass::Static));
    }
    let n = sys.n();
    let m = linalg::hstack(&sys.c, &sig.d_k);
    let nb = linalg::null_space(&m, None);
    if nb.ncols() == 0 {
        return Ok(DetectabilityVerdict::detectable(MonitorClass::Static));
    }
    let ub = nb.rows(n, sig.k()).into_owned();
    let d = crate::svd::svd(&ub);
    if d.s.first().copied().unwrap_or(0.0) <= 1e-10 {
        return Ok(DetectabilityVerdict::detectable(MonitorClass::Static));
    }
    let mut v = &nb * d.v.column(0);
    let piv = v.rows(n, sig.k()).iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
    v /= piv.abs() * piv.signum();
    let x = v.rows(0, n).into_owned();
    let u = v.rows(n, sig.k()).into_owned();
    let residual = (&sys.c * &x + &sig.d_k * &u).norm();
    Ok(DetectabilityVerdict {
        undetectable: true,
        witness: Some(Witness::Static(StaticWitness { x: x.iter().copied().collect(), u: u.iter().copied().collect(), residual })),
        monitor_class: MonitorClass::Static,
        budget_exhausted: false,
    })
}

/// An output attack set with a state `x` whose output `Cx` is supported
/// exactly on the attacked measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticSearchHit {
    pub attack_set: AttackSet,
    pub x: Vector,
}

/// Searches an output attack set of cardinality `k`, avoiding `protected`
/// outputs (1-based output indices), that is the support of some `Cx`.
///
/// Column subsets `J` of `C` are enumerated by size with full column rank;
/// for each, rows to keep nonzero are chosen among the rows touched by `J`
/// and the remaining touched rows are annihilated.
pub fn static_exists_undetectable_of_cardinality(
    sys: &DescriptorSystem,
    k: usize,
    protected: &[usize],
    opts: &SearchOptions,
) -> Result<Option<StaticSearchHit>> {
    let (n, p) = (sys.n(), sys.p());
    for &j in protected {
        if j == 0 || j > p {
            return Err(Error::IndexOutOfRange { index: j, max: p });
        }
    }
    if k == 0 {
        return Ok(Some(StaticSearchHit { attack_set: AttackSet::empty(), x: Vector::zeros(n) }));
    }
    let c = &sys.c;
    let cnorm = linalg::spectral_norm(c);
    if cnorm == 0.0 {
        return Ok(None);
    }
    let ztol = 1e-12 * cnorm;
    let cols: Vec<usize> = (0..n).filter(|&j| c.column(j).iter().any(|v| v.abs() > ztol)).collect();
    let r = linalg::rank(c, None);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x57a7);
    let mut spent = 0usize;
    let mut exhausted = false;
    let mut hit = None;
    for size in 1..=r {
        util::for_each_subset(cols.len(), size, |sub| {
            let jset: Vec<usize> = sub.iter().map(|&i| cols[i]).collect();
            let cj = linalg::select_columns(c, &jset);
            if linalg::rank(&cj, None) < size {
                return true;
            }
            let touched: Vec<usize> = (0..p).filter(|&i| cj.row(i).iter().any(|v| v.abs() > ztol)).collect();
            let free: Vec<usize> = touched.iter().copied().filter(|i| !protected.contains(&(i + 1))).collect();
            if free.len() < k {
                return true;
            }
            util::for_each_subset(free.len(), k, |tsub| {
                spent += 1;
                if spent > opts.budget {
                    exhausted = true;
                    return false;
                }
                let t: Vec<usize> = tsub.iter().map(|&i| free[i]).collect();
                let s: Vec<usize> = touched.iter().copied().filter(|i| !t.contains(i)).collect();
                let nb = if s.is_empty() { Mat::identity(size, size) } else { linalg::null_space(&linalg::select_rows(&cj, &s), None) };
                if nb.ncols() == 0 {
                    return true;
                }
                let coef = Vector::from_fn(nb.ncols(), |_, _| rng.gen_range(0.5..1.5));
                let xj = &nb * coef;
                let yt = linalg::select_rows(&cj, &t) * &xj;
                let scale = xj.norm() * cnorm;
                if yt.iter().all(|v| v.abs() > 1e-9 * scale) {
                    let mut x = Vector::zeros(n);
                    for (a, &j) in jset.iter().enumerate() {
                        x[j] = xj[a];
                    }
                    let idx = t.iter().map(|i| n + i + 1).collect();
                    hit = Some(StaticSearchHit { attack_set: AttackSet::new(idx).expect("distinct indices"), x });
                    return false;
                }
                true
            });
            hit.is_none() && !exhausted
        });
        if hit.is_some() {
            return Ok(hit);
        }
        if exhausted {
            return Err(Error::BudgetExceeded(opts.budget));
        }
    }
    Ok(None)
}

/// Static identification verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentifiabilityVerdict {
    pub unidentifiable: bool,
    /// Alternative attack set explaining the same measurements.
    pub r: Option<AttackSet>,
    pub witness: Option<Witness>,
    pub monitor_class: MonitorClass,
    pub budget_exhausted: bool,
}

/// `K` is statically unidentifiable iff some output set `R ≠ K` with
/// `|R| ≤ |K|` admits `C x + D_K u_K + D_R u_R = 0` with `u_K` supported on
/// all of `K`. `R = ∅` reproduces static undetectability.
pub fn static_unidentifiable(sys: &DescriptorSystem, k: &AttackSet, opts: &SearchOptions) -> Result<IdentifiabilityVerdict> {
    let sig = signature(sys, k)?;
    let (n, p, kk) = (sys.n(), sys.p(), k.k());
    let none = IdentifiabilityVerdict { unidentifiable: false, r: None, witness: None, monitor_class: MonitorClass::Static, budget_exhausted: false };
    if k.is_empty() {
        return Ok(none);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x1d);
    let mut spent = 0usize;
    let mut exhausted = false;
    let mut found: Option<(AttackSet, StaticWitness)> = None;
    for size in 0..=kk.min(p) {
        util::for_each_subset(p, size, |sub| {
            let r_idx: Vec<usize> = sub.iter().map(|&i| n + i + 1).collect();
            if r_idx.as_slice() == k.indices() {
                return true;
            }
            spent += 1;
            if spent > opts.budget {
                exhausted = true;
                return false;
            }
            let d_r = linalg::select_columns(&sys.d, &r_idx.iter().map(|i| i - 1).collect::<Vec<_>>());
            let m = linalg::hstack(&sys.c, &d_r);
            let l = linalg::left_null_space(&m, None);
            let g_basis = if l.ncols() == 0 { Mat::identity(kk, kk) } else { linalg::null_space(&(l.transpose() * &sig.d_k), None) };
            if g_basis.ncols() == 0 || g_basis.row_iter().any(|row| row.norm() <= 1e-10) {
                return true;
            }
            let coef = Vector::from_fn(g_basis.ncols(), |_, _| rng.gen_range(0.5..1.5));
            let g = &g_basis * coef;
            if g.iter().any(|v| v.abs() <= 1e-10 * g.norm()) {
                return true;
            }
            let sol = linalg::pinv(&m) * (-(&sig.d_k * &g));
            let x = sol.rows(0, n).into_owned();
            let u_r = sol.rows(n, size).into_owned();
            let residual = (&sys.c * &x + &sig.d_k * &g + &d_r * &u_r).norm();
            let mut u: Vec<f64> = g.iter().copied().collect();
            u.extend(u_r.iter());
            found = Some((AttackSet::new(r_idx).expect("distinct"), StaticWitness { x: x.iter().copied().collect(), u, residual }));
            false
        });
        if found.is_some() || exhausted {
            break;
        }
    }
    Ok(match found {
        Some((r, w)) => IdentifiabilityVerdict { unidentifiable: true, r: Some(r), witness: Some(Witness::Static(w)), ..none },
        None => IdentifiabilityVerdict { budget_exhausted: exhausted, ..none },
    })
}

/// Pencil with the attack channels replaced by an orthonormal basis of
/// their joint range, so `g` maps back through `map`.
struct ReducedChannels {
    pencil: RosenbrockPencil,
    map: Mat,
}

fn reduce_channels(sys: &DescriptorSystem, sig: &AttackSignature) -> ReducedChannels {
    let n = sys.n();
    let stacked = linalg::vstack(&(-&sig.b_k), &sig.d_k);
    let w = linalg::orth(&stacked, None);
    let r = w.ncols();
    let coords = w.transpose() * &stacked;
    let map = linalg::pinv(&coords);
    let b = -w.rows(0, n).into_owned();
    let d = w.rows(n, sys.p()).into_owned();
    debug_assert_eq!(map.ncols(), r);
    ReducedChannels { pencil: RosenbrockPencil::from_parts(&sys.e, &sys.a, &b, &sys.c, &d), map }
}

/// `‖(sE − A)x − B_K g‖ + ‖Cx + D_K g‖` relative to `‖[x; g]‖`, evaluated
/// directly from the system matrices.
pub fn witness_residual(sys: &DescriptorSystem, sig: &AttackSignature, s: Complex64, x: &CVector, g: &CVector) -> f64 {
    let cx = |m: &Mat| linalg::to_complex(m);
    let top = (cx(&sys.e) * s - cx(&sys.a)) * x - cx(&sig.b_k) * g;
    let bottom = cx(&sys.c) * x + cx(&sig.d_k) * g;
    let den = (x.norm_squared() + g.norm_squared()).sqrt();
    if den == 0.0 {
        return f64::INFINITY;
    }
    (top.norm_squared() + bottom.norm_squared()).sqrt() / den
}

fn expand(sys: &DescriptorSystem, sig: &AttackSignature, red: &ReducedChannels, s: Complex64, v: &CVector) -> InvariantZero {
    let n = sys.n();
    let x = v.rows(0, n).into_owned();
    let gw = v.rows(n, v.len() - n).into_owned();
    let g = linalg::to_complex(&red.map) * gw;
    let residual = witness_residual(sys, sig, s, &x, &g);
    InvariantZero { s, x, g, residual }
}

fn rank_deficient_witness(sys: &DescriptorSystem, sig: &AttackSignature, red: &ReducedChannels, seed: u64) -> InvariantZero {
    let p = &red.pencil;
    let n = sys.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7264);
    let s = -p.scale() * rng.gen_range(0.5..1.5);
    let nr = p.normal_rank(seed);
    let (v, _) = linalg::right_full(&p.at_real(s));
    let null = v.columns(nr, p.cols() - nr).into_owned();
    let xb = null.rows(0, n).into_owned();
    let dir = crate::svd::svd(&xb).v.column(0).into_owned();
    let vec = normalize_phase(linalg::cvec(&(&null * dir)));
    expand(sys, sig, red, Complex64::new(s, 0.0), &vec)
}

/// Dynamic detectability of `K`; the witness `(s, x, g)` satisfies
/// `(sE − A)x = B_K g` and `Cx + D_K g = 0` with `x ≠ 0`.
pub fn dynamic_undetectable(sys: &DescriptorSystem, k: &AttackSet) -> Result<DetectabilityVerdict> {
    dynamic_undetectable_with(sys, k, &SearchOptions::default())
}

pub fn dynamic_undetectable_with(sys: &DescriptorSystem, k: &AttackSet, opts: &SearchOptions) -> Result<DetectabilityVerdict> {
    let sig = signature(sys, k)?;
    if !check_regular(sys, 5, opts.seed) {
        return Err(Error::NotRegular);
    }
    Ok(dynamic_verdict(sys, &sig, opts))
}

fn dynamic_verdict(sys: &DescriptorSystem, sig: &AttackSignature, opts: &SearchOptions) -> DetectabilityVerdict {
    if sig.k() == 0 {
        return DetectabilityVerdict::detectable(MonitorClass::Dynamic);
    }
    let red = reduce_channels(sys, sig);
    let found = if !red.pencil.is_left_invertible(opts.seed) {
        Some((rank_deficient_witness(sys, sig, &red, opts.seed), WitnessKind::RankDeficient))
    } else {
        let zs = zeros::pencil_zeros(&red.pencil, &opts.zero_options()).unwrap_or_default();
        let n = sys.n();
        let pick = zs
            .iter()
            .position(|z| z.x.norm() > 0.0 && z.g.norm() > 1e-8 * (z.x.norm() + z.g.norm()))
            .or(if zs.is_empty() { None } else { Some(0) });
        pick.map(|i| {
            let z = &zs[i];
            let mut v = CVector::zeros(n + z.g.len());
            v.rows_mut(0, n).copy_from(&z.x);
            v.rows_mut(n, z.g.len()).copy_from(&z.g);
            (expand(sys, sig, &red, z.s, &v), WitnessKind::FiniteZero)
        })
    };
    match found {
        Some((zero, kind)) => DetectabilityVerdict {
            undetectable: true,
            witness: Some(Witness::Dynamic(DynamicWitness { zero, kind })),
            monitor_class: MonitorClass::Dynamic,
            budget_exhausted: false,
        },
        None => DetectabilityVerdict::detectable(MonitorClass::Dynamic),
    }
}

/// Active monitors cannot detect anything a dynamic monitor misses, nor
/// miss anything it detects: the verdict is the dynamic one.
pub fn active_undetectable(sys: &DescriptorSystem, k: &AttackSet) -> Result<DetectabilityVerdict> {
    let mut v = dynamic_undetectable(sys, k)?;
    v.monitor_class = MonitorClass::Active;
    Ok(v)
}

/// Lexicographic scan of all `size`-subsets of `0..n` in parallel batches,
/// returning the first subset (in order) for which `test` yields a value.
fn first_subset<T: Send>(
    n: usize,
    sizes: impl IntoIterator<Item = usize>,
    budget: usize,
    test: impl Fn(&[usize]) -> Option<T> + Sync,
) -> Result<Option<(Vec<usize>, T)>> {
    let mut spent = 0usize;
    for size in sizes {
        let mut batch: Vec<Vec<usize>> = Vec::with_capacity(CHUNK);
        let mut result: Option<(Vec<usize>, T)> = None;
        let mut over = false;
        let flush = |batch: &mut Vec<Vec<usize>>| -> Option<(Vec<usize>, T)> {
            let hit = batch.par_iter().map(|s| test(s)).enumerate().find_first(|(_, r)| r.is_some());
            let out = hit.map(|(i, r)| (batch[i].clone(), r.expect("found")));
            batch.clear();
            out
        };
        util::for_each_subset(n, size, |s| {
            if spent >= budget {
                over = true;
                return false;
            }
            spent += 1;
            batch.push(s.to_vec());
            if batch.len() == CHUNK {
                result = flush(&mut batch);
                return result.is_none();
            }
            true
        });
        if result.is_none() && !batch.is_empty() {
            result = flush(&mut batch);
        }
        if result.is_some() {
            return Ok(result);
        }
        if over {
            return Err(Error::BudgetExceeded(budget));
        }
    }
    Ok(None)
}

/// Searches an attack set of cardinality `k` that is dynamically
/// undetectable. Generalized eigenvectors with sparse output are tried
/// first (pure output attacks hiding a mode); then all `k`-subsets of the
/// `n + p` channels are scanned lexicographically within the budget.
pub fn dynamic_exists_undetectable_of_cardinality(
    sys: &DescriptorSystem,
    k: usize,
    opts: &SearchOptions,
) -> Result<Option<(AttackSet, InvariantZero)>> {
    let (n, m) = (sys.n(), sys.m());
    if k == 0 || k > m {
        return Ok(None);
    }
    if !check_regular(sys, 5, opts.seed) {
        return Err(Error::NotRegular);
    }
    let cnorm = linalg::spectral_norm(&sys.c);
    if let Ok(pairs) = zeros::generalized_eigenpairs(&sys.e, &sys.a, &opts.zero_options()) {
        for z in pairs {
            let cx = linalg::to_complex(&sys.c) * &z.x;
            let tol = 1e-9 * (cnorm * z.x.norm()).max(f64::MIN_POSITIVE);
            let support: Vec<usize> = (0..cx.len()).filter(|&i| cx[i].norm() > tol).collect();
            if support.len() > k {
                continue;
            }
            let mut idx: Vec<usize> = support.iter().map(|i| n + i + 1).collect();
            let mut next = 1;
            while idx.len() < k {
                if !idx.contains(&next) {
                    idx.push(next);
                }
                next += 1;
            }
            let set = AttackSet::new(idx).expect("distinct");
            let sig = signature(sys, &set)?;
            let g = CVector::from_iterator(
                k,
                set.indices().iter().map(|&i| if i > n && support.contains(&(i - n - 1)) { -cx[i - n - 1] } else { Complex64::new(0.0, 0.0) }),
            );
            let residual = witness_residual(sys, &sig, z.s, &z.x, &g);
            return Ok(Some((set, InvariantZero { s: z.s, x: z.x.clone(), g, residual })));
        }
    }
    let hit = first_subset(m, [k], opts.budget, |sub| {
        let set = AttackSet::from_zero_based(sub);
        let sig = signature(sys, &set).ok()?;
        let v = dynamic_verdict(sys, &sig, opts);
        v.zero().cloned()
    })?;
    Ok(hit.map(|(sub, z)| (AttackSet::from_zero_based(&sub), z)))
}

/// Dynamic identifiability: `K` is unidentifiable iff it is undetectable
/// (reported with `R = ∅`) or some `R ≠ K` with `|R| ≤ |K|` makes the
/// combined signature `K ∪ R` undetectable. Returns `None` when `K` is
/// identifiable.
pub fn dynamic_unidentifiable(
    sys: &DescriptorSystem,
    k: &AttackSet,
    opts: &SearchOptions,
) -> Result<Option<(AttackSet, InvariantZero)>> {
    let sig = signature(sys, k)?;
    if k.is_empty() {
        return Ok(None);
    }
    if !check_regular(sys, 5, opts.seed) {
        return Err(Error::NotRegular);
    }
    if let Some(z) = dynamic_verdict(sys, &sig, opts).zero() {
        return Ok(Some((AttackSet::empty(), z.clone())));
    }
    let m = sys.m();
    let hit = first_subset(m, 1..=k.k(), opts.budget, |sub| {
        let r = AttackSet::from_zero_based(sub);
        if r.indices().iter().all(|i| k.indices().contains(i)) {
            return None;
        }
        let union = k.union(&r);
        let usig = signature(sys, &union).ok()?;
        dynamic_verdict(sys, &usig, opts).zero().cloned()
    })?;
    Ok(hit.map(|(sub, z)| (AttackSet::from_zero_based(&sub), z)))
}

/// Immunity of a system to output attacks when the outputs in `protected`
/// (1-based output indices) cannot be corrupted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImmunityVerdict {
    pub immune: bool,
    /// Generalized eigenpair invisible on the protected outputs.
    pub witness: Option<InvariantZero>,
}

/// No output-only attack avoiding `protected` is dynamically undetectable
/// iff every generalized eigenvector of `(E, A)` is seen by a protected
/// output, i.e. `[sE − A; C_prot]` has no finite zero.
pub fn output_attack_immunity(sys: &DescriptorSystem, protected: &[usize]) -> Result<ImmunityVerdict> {
    let (n, p) = (sys.n(), sys.p());
    for &j in protected {
        if j == 0 || j > p {
            return Err(Error::IndexOutOfRange { index: j, max: p });
        }
    }
    if !check_regular(sys, 5, 0x5eed) {
        return Err(Error::NotRegular);
    }
    let rows: Vec<usize> = protected.iter().map(|j| j - 1).collect();
    let cp = linalg::select_rows(&sys.c, &rows);
    let q = cp.nrows();
    let pencil = RosenbrockPencil::from_parts(&sys.e, &sys.a, &Mat::zeros(n, 0), &cp, &Mat::zeros(q, 0));
    let zs = zeros::pencil_zeros(&pencil, &ZeroOptions::default()).map_err(|_| Error::NotRegular)?;
    Ok(ImmunityVerdict { immune: zs.is_empty(), witness: zs.into_iter().next() })
}

/// Zero sets of a descriptor system, its Kron reduction and its associated
/// nonsingular system, with bottleneck distances between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroComparison {
    pub descriptor: Vec<[f64; 2]>,
    pub kron: Vec<[f64; 2]>,
    pub associated: Vec<[f64; 2]>,
    pub kron_mismatch: f64,
    pub associated_mismatch: f64,
}

pub fn descriptor_vs_nonsingular_zeros(sys: &DescriptorSystem, sig: &AttackSignature) -> Result<ZeroComparison> {
    let desc: Vec<Complex64> = zeros::invariant_zeros(sys, sig)?.into_iter().map(|z| z.s).collect();
    let kron = zeros::statespace_zeros(&kron_reduce(sys, sig)?.state_space())?;
    let assoc = zeros::statespace_zeros(&associated_nonsingular(sys, sig)?)?;
    let pair = |v: &[Complex64]| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    Ok(ZeroComparison {
        kron_mismatch: linalg::set_distance(&desc, &kron),
        associated_mismatch: linalg::set_distance(&desc, &assoc),
        descriptor: pair(&desc),
        kron: pair(&kron),
        associated: pair(&assoc),
    })
}
