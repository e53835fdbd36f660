#![allow(dead_code)]

use cps_detect::descriptor::{canonical_attack_form, signature, AttackSet, DescriptorSystem};
use cps_detect::linalg::{self, Mat};
use cps_detect::zeros::RosenbrockPencil;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| {
        let (u1, u2): (f64, f64) = (rng.gen_range(1e-12..1.0), rng.gen());
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    })
}

/// Random nonsingular matrix with condition number below about 10.
pub fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    Mat::identity(n, n) + gauss(rng, n, n) * (0.25 / (n as f64).sqrt())
}

/// Random regular index-one pencil with `n1 ≥ 1` dynamic states and a
/// stable reduced spectrum. About a third of the instances hide the block
/// structure behind dense transformations.
pub fn random_pencil(rng: &mut ChaCha8Rng, n: usize) -> (Mat, Mat) {
    let n2 = rng.gen_range(0..=n / 2);
    let n1 = n - n2;
    let e11 = well_conditioned(rng, n1);
    let mut a = gauss(rng, n, n) * (1.0 / (n as f64).sqrt());
    for i in n1..n {
        a[(i, i)] += if rng.gen_bool(0.5) { 2.0 } else { -2.0 };
    }
    let mut e = Mat::zeros(n, n);
    e.view_mut((0, 0), (n1, n1)).copy_from(&e11);
    let a11 = a.view((0, 0), (n1, n1)).into_owned();
    let a12 = a.view((0, n1), (n1, n2)).into_owned();
    let a21 = a.view((n1, 0), (n2, n1)).into_owned();
    let a22 = a.view((n1, n1), (n2, n2)).into_owned();
    let schur = if n2 > 0 { &a11 - &a12 * a22.clone().lu().solve(&a21).expect("A22 nonsingular") } else { a11 };
    let red = e11.clone().lu().solve(&schur).expect("E11 nonsingular");
    let shift = linalg::eigenvalues(&red).iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max) + rng.gen_range(0.3..1.0);
    if shift > 0.0 {
        let d = &e11 * shift;
        let mut blk = a.view_mut((0, 0), (n1, n1));
        blk -= d;
    }
    let mode = rng.gen_range(0..3);
    if mode == 0 {
        let (t, s) = (well_conditioned(rng, n), well_conditioned(rng, n));
        (&t * &e * &s, &t * &a * &s)
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(rng);
        cols.shuffle(rng);
        let pe = Mat::from_fn(n, n, |i, j| e[(rows[i], cols[j])]);
        let pa = Mat::from_fn(n, n, |i, j| a[(rows[i], cols[j])]);
        (pe, pa)
    }
}

pub fn random_system(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DescriptorSystem {
    let (e, a) = random_pencil(rng, n);
    let c = gauss(rng, p, n);
    canonical_attack_form(e, a, c).expect("dimensions agree")
}

/// Random attack set of size `k` over all `n + p` channels.
pub fn random_attack(rng: &mut ChaCha8Rng, n: usize, p: usize, k: usize) -> AttackSet {
    let mut all: Vec<usize> = (1..=n + p).collect();
    all.shuffle(rng);
    AttackSet::new(all[..k].to_vec()).expect("distinct channels")
}

pub fn state_attack(rng: &mut ChaCha8Rng, n: usize, k: usize) -> AttackSet {
    let mut all: Vec<usize> = (1..=n).collect();
    all.shuffle(rng);
    AttackSet::new(all[..k].to_vec()).expect("distinct channels")
}

pub fn left_invertible(sys: &DescriptorSystem, k: &AttackSet) -> bool {
    let sig = signature(sys, k).expect("valid attack set");
    RosenbrockPencil::new(sys, &sig).is_left_invertible(11)
}

/// Random index-one system (`n ≤ n_max`) with a square left-invertible
/// attack signature, which generically has finite invariant zeros.
pub fn random_square_case(rng: &mut ChaCha8Rng, n_max: usize) -> (DescriptorSystem, AttackSet) {
    loop {
        let n = rng.gen_range(2..=n_max);
        let p = rng.gen_range(1..=n.min(4));
        let sys = random_system(rng, n, p);
        let k = random_attack(rng, n, p, p);
        if left_invertible(&sys, &k) {
            return (sys, k);
        }
    }
}

/// Sorted-free distance between two zero sets, `inf` on size mismatch.
pub fn zero_set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    linalg::set_distance(a, b)
}

pub fn relative_set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = 1.0 + a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
    zero_set_distance(a, b) / scale
}

/// Deterministic proptest configuration with `n` cases.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases: n,
        failure_persistence: None,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        ..Default::default()
    }
}
