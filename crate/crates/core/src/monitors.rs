//! Oracle monitors acting on simulated traces.
//!
//! The static monitor projects each sample onto the complement of `Im(C)`.
//! The dynamic and active monitors search for an attack-free trajectory that
//! explains the record: the free responses from a basis of the consistent
//! initial states are simulated on the trace grid and fitted by least
//! squares. The identification oracle extends the regressors with responses
//! to a polynomial input basis on each candidate channel.

use crate::descriptor::{partition_index_one, AttackSet, DescriptorSystem};
use crate::detect::SearchOptions;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::signal::{AttackSignal, ProbeSignal, Waveform};
use crate::simulate::{simulate_grid, SimulationTrace};
use crate::util::for_each_subset;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Number of grid samples used to assemble the least-squares fit.
const FIT_SAMPLES: usize = 400;
/// Highest polynomial degree of the identification input basis.
pub const IDENTIFICATION_DEGREE: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorVerdict {
    /// An attack is present.
    pub psi1: bool,
    /// Identified attack channels (1-based).
    pub psi2: Vec<usize>,
    pub residual_norm: f64,
    pub threshold: f64,
    /// Candidate sets that explain the trace equally well.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ambiguity: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_x0: Option<Vec<f64>>,
    /// `psi2` is a best-effort attribution rather than a guarantee.
    #[serde(default)]
    pub heuristic_attribution: bool,
}

impl MonitorVerdict {
    fn flag(residual_norm: f64, threshold: f64) -> Self {
        Self {
            psi1: residual_norm > threshold,
            psi2: Vec::new(),
            residual_norm,
            threshold,
            ambiguity: Vec::new(),
            estimated_x0: None,
            heuristic_attribution: false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

/// `1e-6 (1 + max_t ‖y(t)‖)`.
pub fn default_threshold(trace: &SimulationTrace) -> f64 {
    1e-6 * (1.0 + trace.max_output_norm())
}

/// Flags when `max_t ‖(I − C C†) y(t)‖` exceeds the threshold. Attribution
/// marks the output channels whose residual component exceeds it.
pub fn static_monitor(trace: &SimulationTrace, c: &Mat, threshold: Option<f64>) -> MonitorVerdict {
    let thr = threshold.unwrap_or_else(|| default_threshold(trace));
    let (p, n) = c.shape();
    let proj = Mat::identity(p, p) - c * linalg::pinv(c);
    let mut norm: f64 = 0.0;
    let mut hot = vec![false; p];
    for y in &trace.y {
        let r = &proj * Vector::from_column_slice(y);
        norm = norm.max(r.norm());
        for (i, v) in r.iter().enumerate() {
            hot[i] |= v.abs() > thr;
        }
    }
    let mut v = MonitorVerdict::flag(norm, thr);
    if v.psi1 {
        v.psi2 = (0..p).filter(|&i| hot[i]).map(|i| n + i + 1).collect();
        v.heuristic_attribution = true;
    }
    v
}

/// Flags when no attack-free trajectory of `sys` reproduces the outputs.
pub fn dynamic_monitor_oracle(sys: &DescriptorSystem, trace: &SimulationTrace, threshold: Option<f64>) -> Result<MonitorVerdict> {
    let thr = threshold.unwrap_or_else(|| default_threshold(trace));
    fit_free(sys, trace, &trace.y, thr)
}

/// Dynamic oracle after removing the response to the monitor's own input.
pub fn active_monitor(sys: &DescriptorSystem, trace: &SimulationTrace, probe: &ProbeSignal, threshold: Option<f64>) -> Result<MonitorVerdict> {
    let thr = threshold.unwrap_or_else(|| default_threshold(trace));
    let steps = grid_steps(trace)?;
    let known = simulate_grid(sys, &Vector::zeros(sys.n()), None, Some(probe), trace.meta.dt, steps)?;
    let target: Vec<Vec<f64>> =
        trace.y.iter().zip(&known.y).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
    fit_free(sys, trace, &target, thr)
}

/// Searches candidate sets `R`, `|R| ≤ k_max`, in order of size and then
/// lexicographically, for an initial state and polynomial inputs on `R`
/// that reproduce the trace. The smallest size with a fit decides `psi2`;
/// every fitting set of that size is listed when there is more than one.
pub fn identification_oracle(
    sys: &DescriptorSystem,
    trace: &SimulationTrace,
    k_max: usize,
    opts: &SearchOptions,
    threshold: Option<f64>,
) -> Result<MonitorVerdict> {
    let thr = threshold.unwrap_or_else(|| default_threshold(trace));
    let steps = grid_steps(trace)?;
    let free = free_responses(sys, trace.meta.dt, steps)?;
    let rows = sample_rows(trace.len(), free.len() + k_max * (IDENTIFICATION_DEGREE + 1));
    let (res0, _) = fit(&free.iter().map(|r| &r.y).collect::<Vec<_>>(), &trace.y, &rows);
    if res0 <= thr {
        return Ok(MonitorVerdict::flag(res0, thr));
    }
    let horizon = trace.t.last().copied().unwrap_or(0.0);
    let mut cache: HashMap<usize, Vec<SimulationTrace>> = HashMap::new();
    let channels = sys.n() + sys.p();
    let mut tested = 0usize;
    let mut best: (f64, Vec<usize>) = (res0, Vec::new());
    for size in 1..=k_max.min(channels) {
        let mut fits: Vec<Vec<usize>> = Vec::new();
        let mut failure: Option<Error> = None;
        for_each_subset(channels, size, |idx| {
            tested += 1;
            if tested > opts.budget {
                failure = Some(Error::BudgetExceeded(opts.budget));
                return false;
            }
            let set: Vec<usize> = idx.iter().map(|i| i + 1).collect();
            for &c in &set {
                if !cache.contains_key(&c) {
                    match channel_responses(sys, c, horizon, trace.meta.dt, steps) {
                        Ok(r) => {
                            cache.insert(c, r);
                        }
                        Err(e) => {
                            failure = Some(e);
                            return false;
                        }
                    }
                }
            }
            let mut cols: Vec<&Vec<Vec<f64>>> = free.iter().map(|r| &r.y).collect();
            for c in &set {
                cols.extend(cache[c].iter().map(|r| &r.y));
            }
            let (res, _) = fit(&cols, &trace.y, &rows);
            if res <= thr {
                fits.push(set.clone());
            }
            if res < best.0 {
                best = (res, set);
            }
            true
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some(first) = fits.first().cloned() {
            let mut v = MonitorVerdict::flag(res0, thr);
            v.psi2 = first;
            if fits.len() > 1 {
                v.ambiguity = fits;
            }
            return Ok(v);
        }
    }
    let mut v = MonitorVerdict::flag(res0, thr);
    v.psi2 = best.1;
    v.heuristic_attribution = true;
    Ok(v)
}

/// `y(x_a + x_b, u, w) − y(x_b, 0, w)` sampled on a common grid.
pub fn attack_output_difference(
    sys: &DescriptorSystem,
    x_attack: &Vector,
    attack: &AttackSignal,
    x_base: &Vector,
    probe: Option<&ProbeSignal>,
    dt: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    let with = simulate_grid(sys, &(x_attack + x_base), Some(attack), probe, dt, steps)?;
    let without = simulate_grid(sys, x_base, None, probe, dt, steps)?;
    Ok(with.y.iter().zip(&without.y).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect())
}

/// Largest deviation, over the probes, of the attack's output footprint from
/// its footprint without a probe. Zero means the probe cannot reveal it.
pub fn active_equivalence_check(
    sys: &DescriptorSystem,
    x_attack: &Vector,
    attack: &AttackSignal,
    x_base: &Vector,
    probes: &[ProbeSignal],
    dt: f64,
    steps: usize,
) -> Result<f64> {
    let reference = attack_output_difference(sys, x_attack, attack, x_base, None, dt, steps)?;
    let mut worst: f64 = 0.0;
    for w in probes {
        let d = attack_output_difference(sys, x_attack, attack, x_base, Some(w), dt, steps)?;
        for (a, b) in d.iter().zip(&reference) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok(worst)
}

fn grid_steps(trace: &SimulationTrace) -> Result<usize> {
    if trace.is_empty() {
        return Err(Error::InvalidInput("empty trace".into()));
    }
    Ok(trace.len() - 1)
}

fn fit_free(sys: &DescriptorSystem, trace: &SimulationTrace, target: &[Vec<f64>], thr: f64) -> Result<MonitorVerdict> {
    let steps = grid_steps(trace)?;
    if target.first().is_some_and(|y| y.len() != sys.p()) {
        return Err(Error::DimensionMismatch("trace outputs do not match the system".into()));
    }
    let free = free_responses(sys, trace.meta.dt, steps)?;
    let rows = sample_rows(trace.len(), free.len());
    let cols: Vec<&Vec<Vec<f64>>> = free.iter().map(|r| &r.y).collect();
    let (res, coef) = fit(&cols, target, &rows);
    let mut x0 = Vector::zeros(sys.n());
    for (c, r) in coef.iter().zip(&free) {
        x0 += Vector::from_column_slice(&r.x[0]) * *c;
    }
    let mut v = MonitorVerdict::flag(res, thr);
    v.estimated_x0 = Some(x0.iter().copied().collect());
    Ok(v)
}

/// Attack-free responses from the consistent states `Z e_j`, `j < n1`.
fn free_responses(sys: &DescriptorSystem, dt: f64, steps: usize) -> Result<Vec<SimulationTrace>> {
    let part = partition_index_one(sys)?;
    let n1 = part.n1();
    (0..n1)
        .map(|j| {
            let mut e = Vector::zeros(n1);
            e[j] = 1.0;
            let x0 = part.to_original(&e, &Vector::zeros(sys.n() - n1));
            simulate_grid(sys, &x0, None, None, dt, steps)
        })
        .collect()
}

/// Zero-state responses to `P_d(2t/T − 1)`, `d ≤ IDENTIFICATION_DEGREE`, on
/// channel `c`.
fn channel_responses(sys: &DescriptorSystem, c: usize, horizon: f64, dt: f64, steps: usize) -> Result<Vec<SimulationTrace>> {
    let set = AttackSet::new(vec![c])?;
    (0..=IDENTIFICATION_DEGREE)
        .map(|d| {
            let mut att = AttackSignal::new(set.clone());
            att.waveforms = vec![Waveform::Polynomial { coeffs: shifted_legendre(d, horizon.max(f64::MIN_POSITIVE)) }];
            simulate_grid(sys, &Vector::zeros(sys.n()), Some(&att), None, dt, steps)
        })
        .collect()
}

/// Ascending monomial coefficients of `P_d(2t/T − 1)`.
pub fn shifted_legendre(d: usize, horizon: f64) -> Vec<f64> {
    // P_{k+1}(τ) = ((2k+1) τ P_k − k P_{k−1}) / (k+1), τ = a t + b
    let (a, b) = (2.0 / horizon, -1.0);
    let mut prev = vec![1.0];
    if d == 0 {
        return prev;
    }
    let mut cur = vec![b, a];
    for k in 1..d {
        let kf = k as f64;
        let mut next = vec![0.0; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i] += (2.0 * kf + 1.0) * b * c;
            next[i + 1] += (2.0 * kf + 1.0) * a * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= kf * c;
        }
        next.iter_mut().for_each(|v| *v /= kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Evenly spaced sample indices, at least four per regressor.
fn sample_rows(len: usize, regressors: usize) -> Vec<usize> {
    let want = FIT_SAMPLES.max(4 * regressors);
    if len <= want {
        return (0..len).collect();
    }
    let mut rows: Vec<usize> = (0..want).map(|i| i * (len - 1) / (want - 1)).collect();
    rows.dedup();
    rows
}

/// Least-squares fit of `target` by the column series on the sampled rows.
/// Returns the largest residual over the whole grid and the coefficients.
fn fit(cols: &[&Vec<Vec<f64>>], target: &[Vec<f64>], rows: &[usize]) -> (f64, Vector) {
    let p = target.first().map(|r| r.len()).unwrap_or(0);
    let m = cols.len();
    let coef = if m == 0 || p == 0 {
        Vector::zeros(m)
    } else {
        let nr = rows.len() * p;
        let mut a = Mat::zeros(nr, m);
        let mut b = Vector::zeros(nr);
        for (ri, &t) in rows.iter().enumerate() {
            for i in 0..p {
                b[ri * p + i] = target[t][i];
                for (j, c) in cols.iter().enumerate() {
                    a[(ri * p + i, j)] = c[t][i];
                }
            }
        }
        least_squares(&a, &b)
    };
    let mut worst: f64 = 0.0;
    for (t, y) in target.iter().enumerate() {
        let mut r2 = 0.0;
        for i in 0..p {
            let mut v = y[i];
            for (j, c) in cols.iter().enumerate() {
                v -= coef[j] * c[t][i];
            }
            r2 += v * v;
        }
        worst = worst.max(r2.sqrt());
    }
    (worst, coef)
}

/// Minimum-norm least squares through a QR factorization and the
/// pseudoinverse of the triangular factor.
fn least_squares(a: &Mat, b: &Vector) -> Vector {
    if a.nrows() < a.ncols() {
        return linalg::pinv(a) * b;
    }
    let scale: Vec<f64> = a.column_iter().map(|c| c.norm().max(f64::MIN_POSITIVE)).collect();
    let mut an = a.clone();
    for (j, s) in scale.iter().enumerate() {
        an.column_mut(j).scale_mut(1.0 / s);
    }
    let qr = an.qr();
    let qtb = qr.q().transpose() * b;
    let mut x = linalg::pinv(&qr.r()) * qtb;
    for (j, s) in scale.iter().enumerate() {
        x[j] /= s;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::canonical_attack_form;
    use crate::simulate::simulate;

    fn chain() -> DescriptorSystem {
        let a = Mat::from_row_slice(2, 2, &[-1.0, 0.0, 1.0, -2.0]);
        canonical_attack_form(Mat::identity(2, 2), a, Mat::from_row_slice(1, 2, &[0.0, 1.0])).unwrap()
    }

    #[test]
    fn legendre_values() {
        let c = shifted_legendre(3, 2.0);
        let ev = |t: f64| c.iter().rev().fold(0.0, |acc, v| acc * t + v);
        // P3(τ) = (5τ³ − 3τ)/2 at τ = t − 1
        for t in [0.0, 0.3, 1.0, 1.7, 2.0] {
            let tau: f64 = t - 1.0;
            assert!((ev(t) - (5.0 * tau.powi(3) - 3.0 * tau) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn attack_free_trace_is_explained() {
        let sys = chain();
        let x0 = Vector::from_vec(vec![1.0, -0.5]);
        let tr = simulate(&sys, &x0, None, None, 5.0, Some(0.01)).unwrap();
        let v = dynamic_monitor_oracle(&sys, &tr, None).unwrap();
        assert!(!v.psi1, "{}", v.residual_norm);
        let est = v.estimated_x0.unwrap();
        assert!((est[0] - 1.0).abs() < 1e-6 && (est[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn output_bias_is_flagged_and_identified() {
        let sys = chain();
        let mut att = AttackSignal::new(AttackSet::new(vec![3]).unwrap());
        att.constant = vec![0.7];
        let tr = simulate(&sys, &Vector::from_vec(vec![1.0, 0.0]), Some(&att), None, 5.0, Some(0.01)).unwrap();
        assert!(dynamic_monitor_oracle(&sys, &tr, None).unwrap().psi1);
        let id = identification_oracle(&sys, &tr, 1, &SearchOptions::default(), None).unwrap();
        assert!(id.psi1);
        assert!(id.psi2 == vec![3] || id.ambiguity.contains(&vec![3]));
    }

    #[test]
    fn unidentifiable_pair_is_ambiguous() {
        let sys = chain();
        let mut att = AttackSignal::new(AttackSet::new(vec![1]).unwrap());
        att.constant = vec![1.0];
        let tr = simulate(&sys, &Vector::zeros(2), Some(&att), None, 5.0, Some(0.01)).unwrap();
        let id = identification_oracle(&sys, &tr, 1, &SearchOptions::default(), None).unwrap();
        assert!(id.ambiguity.contains(&vec![1]) && id.ambiguity.contains(&vec![2]), "{id:?}");
    }

    #[test]
    fn static_monitor_ignores_state_attacks() {
        let sys = chain();
        let mut att = AttackSignal::new(AttackSet::new(vec![2]).unwrap());
        att.waveforms = vec![Waveform::Sinusoid { amplitude: 1.0, omega: 1.0, phase: 0.0 }];
        let tr = simulate(&sys, &Vector::zeros(2), Some(&att), None, 3.0, Some(0.01)).unwrap();
        assert!(!static_monitor(&tr, &sys.c, None).psi1);
    }
}
