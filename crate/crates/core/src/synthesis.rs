//! Construction of concrete attack signals: zero-dynamics modes, static
//! stealth biases, transfer null-space filters, the prototypical attack
//! classes and the reservoir theft strategy.

use crate::descriptor::{partition_index_one, signature, AttackSet, DescriptorSystem};
use crate::detect::{dynamic_undetectable, static_undetectable, Witness};
use crate::error::{Error, Result};
use crate::kron::{kron_reduce, kron_reduce_with, StateSpace};
use crate::linalg::{self, CMat, CVector, Mat, Vector};
use crate::models::water::WaterModel;
use crate::signal::{scale_wave, AttackSignal, Feedback, LinearFilter, Mode, StateBlock, Waveform};
use crate::simulate::ReplayWindow;
use crate::zeros::InvariantZero;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

/// Initial state and input realizing a zero-dynamics witness. Complex
/// zeros use the conjugate-pair sum, so `x0 = 2 Re(x)`.
pub fn zero_dynamics_attack_from(k: &AttackSet, zero: &InvariantZero) -> (Vector, AttackSignal) {
    let factor = if zero.is_real() { 1.0 } else { 2.0 };
    let x0 = Vector::from_iterator(zero.x.len(), zero.x.iter().map(|z| factor * z.re));
    let mut sig = AttackSignal::new(k.clone());
    sig.modes.push(Mode { s: zero.s, g: zero.g.clone() });
    (x0, sig)
}

/// Output-nulling attack from the witness reported by the dynamic test.
pub fn synth_zero_dynamics_attack(sys: &DescriptorSystem, k: &AttackSet) -> Result<(Vector, AttackSignal)> {
    let v = dynamic_undetectable(sys, k)?;
    match (v.undetectable, v.witness) {
        (true, Some(Witness::Dynamic(w))) => Ok(zero_dynamics_attack_from(k, &w.zero)),
        _ => Err(Error::NoWitness(format!("attack set {:?} is dynamically detectable", k.indices()))),
    }
}

/// Constant output attack with `D_K u ∈ Im(C)`.
pub fn synth_static_stealth_attack(sys: &DescriptorSystem, k: &AttackSet) -> Result<AttackSignal> {
    let u = static_direction(sys, k)?;
    let mut sig = AttackSignal::new(k.clone());
    sig.constant = u;
    Ok(sig)
}

/// Static stealth direction modulated by `profile`.
pub fn synth_static_stealth_attack_with_profile(sys: &DescriptorSystem, k: &AttackSet, profile: &Waveform) -> Result<AttackSignal> {
    let u = static_direction(sys, k)?;
    let mut sig = AttackSignal::new(k.clone());
    sig.waveforms = u.iter().map(|&c| scale_wave(profile.clone(), c)).collect();
    Ok(sig)
}

fn static_direction(sys: &DescriptorSystem, k: &AttackSet) -> Result<Vec<f64>> {
    if k.indices().iter().any(|&c| c <= sys.n()) {
        return Err(Error::PreconditionUnmet("static stealth attacks use output channels only".into()));
    }
    let v = static_undetectable(sys, k)?;
    match (v.undetectable, v.witness) {
        (true, Some(Witness::Static(w))) => Ok(w.u),
        _ => Err(Error::NoWitness(format!("Im(D_K) meets Im(C) only at zero for {:?}", k.indices()))),
    }
}

/// Real rational function with descending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RationalFunction {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly_eval_desc(&self.num, s) / poly_eval_desc(&self.den, s)
    }
}

/// Right null vector `𝒩(s)` of the attack transfer matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalNullVector {
    pub entries: Vec<RationalFunction>,
}

impl RationalNullVector {
    pub fn eval(&self, s: Complex64) -> CVector {
        CVector::from_iterator(self.entries.len(), self.entries.iter().map(|e| e.eval(s)))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NullSpaceAttack {
    pub signal: AttackSignal,
    pub null_vector: RationalNullVector,
    /// Largest `‖G(s)𝒩(s)‖ / (‖G(s)‖ ‖𝒩(s)‖)` over the sample points.
    pub residual: f64,
    pub normal_rank: usize,
}

/// Number of sample points in the null-vector verification.
const NULL_CHECK_POINTS: usize = 20;

/// Realizes `u = 𝒩(d/dt) ū` as a filter driven by `ubar`.
///
/// A null vector is assembled from signed maximal minors of the polynomial
/// matrix `det(sI − Ã) G(s)` (interpolated on a circle), common roots are
/// cancelled, and the last nonzero entry is normalized to one.
pub fn synth_transfer_nullspace_attack(sys: &DescriptorSystem, k: &AttackSet, ubar: Waveform) -> Result<NullSpaceAttack> {
    let sig = signature(sys, k)?;
    let ss = kron_reduce(sys, &sig)?.state_space();
    let kk = k.k();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6e75);
    let mut probe = || Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
    let points: Vec<Complex64> = (0..3).map(|_| probe()).collect();
    let mut rank = 0;
    let mut at = points[0];
    for &s in &points {
        let r = transfer_rank(&ss.transfer_at(s)?);
        if r > rank {
            rank = r;
            at = s;
        }
    }
    if kk == 0 || rank >= kk {
        return Err(Error::TrivialNullSpace);
    }
    let g = ss.transfer_at(at)?;
    let rows = independent(&g.transpose(), rank);
    let mut cols = independent(&g, rank);
    let extra = (0..kk).find(|j| !cols.contains(j)).expect("rank below column count");
    cols.push(extra);
    cols.sort_unstable();

    let n1 = ss.a.nrows();
    let degree = rank * n1;
    let mut polys: Vec<Vec<f64>> = vec![Vec::new(); kk];
    for (pos, &l) in cols.iter().enumerate() {
        let others: Vec<usize> = cols.iter().copied().filter(|&c| c != l).collect();
        let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
        let minor = |s: Complex64| -> Result<Complex64> {
            let den = char_poly_at(&ss.a, s);
            let gs = ss.transfer_at(s)? * den;
            let sub = CMat::from_fn(rank, rank, |i, j| gs[(rows[i], others[j])]);
            Ok(linalg::cdet(&sub) * sign)
        };
        polys[l] = interpolate(minor, degree)?;
    }
    let polys = cancel_common_roots(polys);
    let d = polys.iter().map(|p| p.len()).max().unwrap_or(0).checked_sub(1).ok_or(Error::TrivialNullSpace)?;
    // normalize by the last entry of full degree with stable roots, else by (s + 1)^d
    let norm_idx = (0..kk).rev().find(|&i| polys[i].len() == d + 1 && roots(&polys[i]).iter().all(|z| z.re < 0.0));
    let (q, lead) = match norm_idx {
        Some(i) => {
            let lead = *polys[i].last().expect("nonempty");
            (polys[i].iter().map(|c| c / lead).collect::<Vec<f64>>(), lead)
        }
        None => {
            let lead = polys.iter().flatten().fold(0.0f64, |a, c| a.max(c.abs()));
            (from_roots(1.0, &vec![Complex64::new(-1.0, 0.0); d]), lead)
        }
    };
    let nums: Vec<Vec<f64>> = polys.iter().map(|p| p.iter().map(|c| c / lead).collect()).collect();

    let entries = nums
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if Some(i) == norm_idx {
                RationalFunction { num: vec![1.0], den: vec![1.0] }
            } else if p.is_empty() {
                RationalFunction { num: vec![0.0], den: vec![1.0] }
            } else {
                RationalFunction { num: p.iter().rev().copied().collect(), den: q.iter().rev().copied().collect() }
            }
        })
        .collect();
    let null_vector = RationalNullVector { entries };

    // Controllable canonical realization of P(s)/Q(s) with monic Q.
    let mut fa = Mat::zeros(d, d);
    for i in 0..d.saturating_sub(1) {
        fa[(i, i + 1)] = 1.0;
    }
    if d > 0 {
        for j in 0..d {
            fa[(d - 1, j)] = -q[j];
        }
    }
    let mut fb = Mat::zeros(d, 1);
    if d > 0 {
        fb[(d - 1, 0)] = 1.0;
    }
    let mut fc = Mat::zeros(kk, d);
    let mut fd = Mat::zeros(kk, 1);
    for (l, p) in nums.iter().enumerate() {
        let pd = p.get(d).copied().unwrap_or(0.0);
        fd[(l, 0)] = pd;
        for j in 0..d {
            fc[(l, j)] = p.get(j).copied().unwrap_or(0.0) - pd * q[j];
        }
    }
    let mut signal = AttackSignal::new(k.clone());
    signal.filter = Some(LinearFilter { a: fa, b: fb, c: fc, d: fd, input: ubar });

    let residual = null_residual(&ss, &null_vector)?;
    Ok(NullSpaceAttack { signal, null_vector, residual, normal_rank: rank })
}

fn null_residual(ss: &StateSpace, nv: &RationalNullVector) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..NULL_CHECK_POINTS {
        let w = 10f64.powf(-1.0 + 2.0 * i as f64 / (NULL_CHECK_POINTS - 1) as f64);
        let s = Complex64::new(0.05, w);
        let g = ss.transfer_at(s)?;
        let nv = nv.eval(s);
        let scale = g.norm() * nv.norm();
        if scale > 0.0 {
            worst = worst.max((&g * &nv).norm() / scale);
        }
    }
    Ok(worst)
}

/// Rank of a sampled transfer matrix, which carries the rounding of a
/// resolvent solve rather than of a stored matrix.
fn transfer_rank(g: &CMat) -> usize {
    let smax = linalg::csingular_values(g).first().copied().unwrap_or(0.0);
    linalg::crank(g, Some(1e-9 * smax))
}

/// First `r` indices whose columns are linearly independent.
fn independent(m: &CMat, r: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for j in 0..m.ncols() {
        if chosen.len() == r {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(j);
        let sub = CMat::from_fn(m.nrows(), trial.len(), |i, c| m[(i, trial[c])]);
        if transfer_rank(&sub) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

fn char_poly_at(a: &Mat, s: Complex64) -> Complex64 {
    let n = a.nrows();
    linalg::cdet(&(CMat::identity(n, n) * s - linalg::to_complex(a)))
}

/// Ascending real coefficients of a polynomial of degree at most `degree`
/// from samples on a rotated unit circle; negligible leading terms are
/// dropped and an identically small polynomial comes back empty.
fn interpolate(f: impl Fn(Complex64) -> Result<Complex64>, degree: usize) -> Result<Vec<f64>> {
    let np = degree + 1;
    let phase = 0.3137;
    let mut vals = Vec::with_capacity(np);
    let mut nodes = Vec::with_capacity(np);
    for q in 0..np {
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU * q as f64 / np as f64 + phase);
        nodes.push(w);
        vals.push(f(w)?);
    }
    let coef: Vec<f64> = (0..np)
        .map(|m| {
            let acc: Complex64 = vals.iter().zip(&nodes).map(|(v, w)| v * w.powi(-(m as i32))).sum();
            (acc / np as f64).re
        })
        .collect();
    let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(trim(coef, scale))
}

fn trim(mut c: Vec<f64>, scale: f64) -> Vec<f64> {
    let tol = 1e-9 * scale.max(c.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    while c.last().is_some_and(|v| v.abs() <= tol) {
        c.pop();
    }
    c
}

fn poly_eval_desc(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().fold(Complex64::new(0.0, 0.0), |acc, v| acc * s + v)
}

/// Roots of an ascending-coefficient polynomial.
fn roots(p: &[f64]) -> Vec<Complex64> {
    let d = p.len().saturating_sub(1);
    if d == 0 {
        return Vec::new();
    }
    let lead = p[d];
    let mut comp = Mat::zeros(d, d);
    for i in 1..d {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        comp[(i, d - 1)] = -p[i] / lead;
    }
    linalg::eigenvalues(&comp)
}

/// Ascending coefficients of `lead · Π (s − rᵢ)`.
fn from_roots(lead: f64, rs: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(lead, 0.0)];
    for r in rs {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i + 1] += v;
            next[i] -= v * r;
        }
        c = next;
    }
    c.iter().map(|z| z.re).collect()
}

/// Removes the roots shared by every nonzero polynomial.
fn cancel_common_roots(polys: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let live: Vec<usize> = (0..polys.len()).filter(|&i| !polys[i].is_empty()).collect();
    if live.len() < 2 {
        return polys;
    }
    let mut rts: Vec<Vec<Complex64>> = polys.iter().map(|p| if p.is_empty() { Vec::new() } else { roots(p) }).collect();
    let base = rts[live[0]].clone();
    for r in base {
        let tol = 1e-5 * (1.0 + r.norm());
        let hits: Vec<Option<usize>> = live
            .iter()
            .map(|&i| {
                rts[i]
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| (*z - r).norm() < tol)
                    .min_by(|a, b| (a.1 - r).norm().total_cmp(&(b.1 - r).norm()))
                    .map(|(j, _)| j)
            })
            .collect();
        if hits.iter().all(|h| h.is_some()) {
            for (&i, h) in live.iter().zip(&hits) {
                rts[i].remove(h.expect("checked"));
            }
        }
    }
    polys
        .iter()
        .enumerate()
        .map(|(i, p)| if p.is_empty() { Vec::new() } else { from_roots(*p.last().expect("nonempty"), &rts[i]) })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrototypeKind {
    Stealth,
    Replay,
    Covert,
    FalseData,
}

impl std::str::FromStr for PrototypeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stealth" => Ok(Self::Stealth),
            "replay" => Ok(Self::Replay),
            "covert" => Ok(Self::Covert),
            "false_data" | "false-data" => Ok(Self::FalseData),
            other => Err(Error::InvalidInput(format!("unknown attack kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PrototypeParams {
    /// Stealth: output channels. Covert: state channels.
    #[serde(default)]
    pub attack_set: Option<AttackSet>,
    /// Replay: the state attack run behind the replayed measurements.
    #[serde(default)]
    pub state_attack: Option<AttackSignal>,
    #[serde(default)]
    pub window: Option<ReplayWindow>,
    /// Covert: input direction on the state channels (default all ones).
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
    /// Covert: scalar profile of the state attack (default unit step).
    #[serde(default)]
    pub input: Option<Waveform>,
}

/// How the simulator runs a synthesized attack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scenario {
    Direct,
    Replay { window: ReplayWindow },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Prototype {
    pub kind: PrototypeKind,
    pub signal: AttackSignal,
    pub scenario: Scenario,
}

pub fn synth_prototype(sys: &DescriptorSystem, kind: PrototypeKind, params: &PrototypeParams) -> Result<Prototype> {
    let (n, p) = (sys.n(), sys.p());
    let direct = |signal| Ok(Prototype { kind, signal, scenario: Scenario::Direct });
    match kind {
        PrototypeKind::Stealth => {
            let k = params.attack_set.clone().ok_or_else(|| Error::PreconditionUnmet("stealth needs an output attack set".into()))?;
            direct(synth_static_stealth_attack(sys, &k)?)
        }
        PrototypeKind::Replay => {
            let window = params.window.ok_or_else(|| Error::PreconditionUnmet("replay needs a recording window".into()))?;
            if !(window.length > 0.0) {
                return Err(Error::PreconditionUnmet("replay needs a recording window of positive length".into()));
            }
            let signal = params.state_attack.clone().unwrap_or_else(|| AttackSignal::new(AttackSet::empty()));
            if signal.attack_set.indices().iter().any(|&c| c > n) {
                return Err(Error::PreconditionUnmet("the replay state attack must use state channels only".into()));
            }
            Ok(Prototype { kind, signal, scenario: Scenario::Replay { window } })
        }
        PrototypeKind::Covert => {
            let kx = params.attack_set.clone().ok_or_else(|| Error::PreconditionUnmet("covert needs state attack channels".into()))?;
            if kx.is_empty() || kx.indices().iter().any(|&c| c > n) {
                return Err(Error::PreconditionUnmet("covert needs a nonempty set of state channels".into()));
            }
            let v = match &params.direction {
                Some(v) if v.len() == kx.k() => Vector::from_column_slice(v),
                Some(_) => return Err(Error::DimensionMismatch("covert direction must match the state channels".into())),
                None => Vector::from_element(kx.k(), 1.0),
            };
            let input = params.input.clone().unwrap_or(Waveform::Step { value: 1.0, at: 0.0 });
            direct(covert_attack(sys, &kx, &v, input)?)
        }
        PrototypeKind::FalseData => direct(false_data_attack(sys, n, p)?),
    }
}

/// State attack `v ū(t)` on `kx` plus the output correction `−y_a`, where
/// `y_a` is the attacker model's response to the state attack.
fn covert_attack(sys: &DescriptorSystem, kx: &AttackSet, v: &Vector, input: Waveform) -> Result<AttackSignal> {
    let (n, p) = (sys.n(), sys.p());
    let ss = kron_reduce(sys, &signature(sys, kx)?)?.state_space();
    let kxk = kx.k();
    let outputs = AttackSet::new((n + 1..=n + p).collect())?;
    let set = kx.union(&outputs);
    let q = ss.a.nrows();
    let mut c = Mat::zeros(kxk + p, q);
    c.rows_mut(kxk, p).copy_from(&(-&ss.c));
    let mut d = Mat::zeros(kxk + p, 1);
    d.rows_mut(0, kxk).copy_from(v);
    d.rows_mut(kxk, p).copy_from(&(-(&ss.d * v)));
    let mut sig = AttackSignal::new(set);
    sig.filter = Some(LinearFilter { a: ss.a.clone(), b: Mat::from_column_slice(q, 1, (&ss.b * v).as_slice()), c, d, input });
    Ok(sig)
}

/// Output feedback removing the unstable modes from every measurement.
fn false_data_attack(sys: &DescriptorSystem, n: usize, p: usize) -> Result<AttackSignal> {
    let part = partition_index_one(sys)?;
    let kr = kron_reduce_with(sys, &part, &Mat::zeros(n, 0), &Mat::zeros(p, 0))?;
    let a = &kr.a_til;
    let n1 = a.nrows();
    let shift = 1e-6 * (1.0 + a.norm());
    let proj = unstable_projector(&(a - Mat::identity(n1, n1) * shift))?;
    if proj.trace().round() < 1.0 {
        return Err(Error::PreconditionUnmet("false-data injection needs an unstable eigenvalue".into()));
    }
    // full state from x1: Z [I; −A22⁻¹A21]
    let lift = &part.z * linalg::vstack(&Mat::identity(n1, n1), &kr.recovery_state);
    let gain = -(&sys.c * lift * proj);
    let mut sig = AttackSignal::new(AttackSet::new((n + 1..=n + p).collect())?);
    sig.feedback.push(Feedback { gain, block: StateBlock::Dynamic });
    Ok(sig)
}

/// `(I + sign(A)) / 2` by the scaled Newton iteration.
fn unstable_projector(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let mut x = a.clone();
    for _ in 0..100 {
        let inv = x.clone().try_inverse().ok_or_else(|| Error::PreconditionUnmet("eigenvalue on the stability boundary".into()))?;
        let det = x.clone().lu().determinant().abs();
        let mu = if n > 0 && det > 0.0 { det.powf(-1.0 / n as f64) } else { 1.0 };
        let next = (&x * mu + inv / mu) * 0.5;
        let diff = (&next - &x).norm();
        x = next;
        if diff <= 1e-13 * x.norm() {
            break;
        }
    }
    Ok((Mat::identity(n, n) + x) * 0.5)
}

/// The three components of the reservoir theft.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WaterTheftAttack {
    pub signal: AttackSignal,
    /// Coupling of the reservoir head into the pump junction balance.
    pub a31: f64,
    /// Channels of `u1`, `u2`, `u3` (1-based).
    pub channels: [usize; 3],
}

/// `u1 = −1` drains the reservoir, `u2 = −A31 x1` cancels its coupling into
/// the pump junction and `u3 = −x1` hides it from its pressure sensor.
pub fn synth_water_theft_attack(model: &WaterModel) -> Result<WaterTheftAttack> {
    let sites = model.theft.ok_or_else(|| Error::ModelShapeMismatch("model has no theft sites".into()))?;
    let sys = &model.system;
    let (n, p) = (sys.n(), sys.p());
    let (r, j, s) = (sites.reservoir, sites.pump_junction, sites.sensor);
    if r == 0 || r > n || j == 0 || j > n || r == j || s == 0 || s > p {
        return Err(Error::ModelShapeMismatch("theft sites out of range".into()));
    }
    let (ri, ji) = (r - 1, j - 1);
    if sys.e[(ri, ri)] == 0.0 || sys.a.row(ri).iter().any(|&v| v != 0.0) {
        return Err(Error::ModelShapeMismatch("the reservoir must be a dynamic state with a zero row".into()));
    }
    if sys.e[(ji, ji)] != 0.0 {
        return Err(Error::ModelShapeMismatch("the pump junction must be algebraic".into()));
    }
    if (0..n).any(|i| i != ri && i != ji && sys.a[(i, ri)] != 0.0) {
        return Err(Error::ModelShapeMismatch("the reservoir may couple only into the pump junction".into()));
    }
    let a31 = sys.a[(ji, ri)];
    let c_s = sys.c[(s - 1, ri)];
    let set = AttackSet::new(vec![r, j, n + s])?;
    let pos = |c: usize| set.indices().iter().position(|&v| v == c).expect("member");
    let (p1, p2, p3) = (pos(r), pos(j), pos(n + s));
    let mut sig = AttackSignal::new(set);
    sig.constant = vec![0.0; 3];
    sig.constant[p1] = -1.0 * sys.e[(ri, ri)];
    let mut gain = Mat::zeros(3, 1);
    gain[(p2, 0)] = -a31;
    gain[(p3, 0)] = -c_s;
    sig.feedback.push(Feedback { gain, block: StateBlock::Indices(vec![r]) });
    Ok(WaterTheftAttack { signal: sig, a31, channels: [r, j, n + s] })
}
