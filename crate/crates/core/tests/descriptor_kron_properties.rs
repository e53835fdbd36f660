mod common;

use common::*;
use cps_detect::descriptor::{check_consistent_initial, check_regular, partition_index_one, signature, AttackSet, DescriptorSystem};
use cps_detect::detect::dynamic_undetectable;
use cps_detect::kron::{kron_reduce, transfer_at};
use cps_detect::linalg::{self, Mat, Vector};
use cps_detect::signal::{AttackSignal, Waveform};
use cps_detect::simulate::{simulate, simulate_grid};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn reduced_as_descriptor(sys: &DescriptorSystem, k: &AttackSet) -> (DescriptorSystem, AttackSet) {
    let kr = kron_reduce(sys, &signature(sys, k).unwrap()).unwrap();
    let n1 = kr.a_til.nrows();
    let red = DescriptorSystem::new(Mat::identity(n1, n1), kr.a_til, kr.b_til, kr.c_til, kr.d_til).unwrap();
    let all = AttackSet::new((1..=k.k()).collect()).unwrap();
    (red, all)
}

/// `(E − hA) x⁺ = E x + h B u(t⁺)`.
fn implicit_euler(sys: &DescriptorSystem, bk: &Mat, sig: &AttackSignal, x0: &Vector, h: f64, steps: usize) -> Vec<Vector> {
    let lu = (&sys.e - &sys.a * h).lu();
    let mut x = x0.clone();
    let mut out = vec![x.clone()];
    for i in 1..=steps {
        let rhs = &sys.e * &x + bk * sig.open_loop(i as f64 * h) * h;
        x = lu.solve(&rhs).expect("E − hA nonsingular");
        out.push(x.clone());
    }
    out
}

proptest! {
    #![proptest_config(cases(40))]

    #[test]
    fn canonical_signature_columns_are_independent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let p = r.gen_range(0..=5);
        let sys = random_system(&mut r, n, p);
        let kk = r.gen_range(0..=n + p);
        let k = random_attack(&mut r, n, p, kk);
        let sig = signature(&sys, &k).unwrap();
        let stacked = linalg::vstack(&sig.b_k, &sig.d_k);
        prop_assert_eq!(linalg::rank(&stacked, None), k.k());
    }

    #[test]
    fn regularity_is_invariant_under_left_transformation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=7);
        let sys = if r.gen_bool(0.5) {
            random_system(&mut r, n, 1)
        } else {
            // singular pencil: a shared zero row in E and A
            let (mut e, mut a) = random_pencil(&mut r, n);
            let row = r.gen_range(0..n);
            e.row_mut(row).fill(0.0);
            a.row_mut(row).fill(0.0);
            cps_detect::descriptor::canonical_attack_form(e, a, gauss(&mut r, 1, n)).unwrap()
        };
        let base = check_regular(&sys, 5, seed);
        for _ in 0..50 {
            let t = well_conditioned(&mut r, n) * r.gen_range(0.1..10.0);
            let moved = DescriptorSystem::new(&t * &sys.e, &t * &sys.a, sys.b.clone(), sys.c.clone(), sys.d.clone()).unwrap();
            prop_assert_eq!(check_regular(&moved, 5, seed), base);
        }
    }

    #[test]
    fn partition_reassembles_e_and_a(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let sys = random_system(&mut r, n, 1);
        let part = partition_index_one(&sys).unwrap();
        let scale = 1.0 + sys.e.norm();
        prop_assert!((part.reassemble_e() - &sys.e).norm() <= 1e-12 * scale);
        let blk = part.blocks(&sys.e, &sys.a, &sys.b, &sys.c);
        let (n1, n2) = (part.n1(), part.n2());
        let mut at = Mat::zeros(n, n);
        at.view_mut((0, 0), (n1, n1)).copy_from(&blk.a11);
        at.view_mut((0, n1), (n1, n2)).copy_from(&blk.a12);
        at.view_mut((n1, 0), (n2, n1)).copy_from(&blk.a21);
        at.view_mut((n1, n1), (n2, n2)).copy_from(&blk.a22);
        let a = part.q.transpose() * at * part.z.transpose();
        prop_assert!((a - &sys.a).norm() <= 1e-12 * (1.0 + sys.a.norm()));
    }

    #[test]
    fn simulator_initial_states_are_consistent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=8);
        let sys = random_system(&mut r, n, 2);
        let kk = r.gen_range(1..=n);
        let k = state_attack(&mut r, n, kk);
        let mut sig = AttackSignal::new(k.clone());
        sig.constant = (0..k.k()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let x0 = gauss(&mut r, n, 1).column(0).into_owned();
        let tr = simulate(&sys, &x0, Some(&sig), None, 1.0, None).unwrap();
        let mut u0 = Vector::zeros(sys.m());
        for (j, &c) in k.indices().iter().enumerate() {
            u0[c - 1] = tr.u[0][j];
        }
        prop_assert!(check_consistent_initial(&sys, &Vector::from_column_slice(&tr.x[0]), &u0));
    }
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn kron_transfer_matches_descriptor(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let p = r.gen_range(1..=4);
        let sys = random_system(&mut r, n, p);
        let kk = r.gen_range(1..=n + p);
        let k = random_attack(&mut r, n, p, kk);
        let sig = signature(&sys, &k).unwrap();
        let kr = kron_reduce(&sys, &sig).unwrap();
        for _ in 0..10 {
            let s = Complex64::new(r.gen_range(0.1..3.0), r.gen_range(-3.0..3.0));
            let (Ok(g), Ok(gk)) = (transfer_at(&sys, &sig, s), kr.transfer_at(s)) else { continue };
            prop_assert!((&g - gk).norm() <= 1e-9 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn detectability_survives_kron_reduction(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=7);
        let p = r.gen_range(1..=3);
        let sys = random_system(&mut r, n, p);
        let kk = r.gen_range(1..=p + 1);
        let k = random_attack(&mut r, n, p, kk);
        let (red, all) = reduced_as_descriptor(&sys, &k);
        let a = dynamic_undetectable(&sys, &k).unwrap().undetectable;
        let b = dynamic_undetectable(&red, &all).unwrap().undetectable;
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(cases(20))]

    #[test]
    fn reduced_trajectory_matches_implicit_euler(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let sys = random_system(&mut r, n, 1);
        let kk = r.gen_range(1..=n);
        let k = state_attack(&mut r, n, kk);
        let mut sig = AttackSignal::new(k.clone());
        sig.waveforms = (0..k.k())
            .map(|_| Waveform::Sinusoid { amplitude: r.gen_range(0.5..1.5), omega: r.gen_range(0.5..2.0), phase: r.gen_range(0.0..6.0) })
            .collect();
        let x0 = gauss(&mut r, n, 1).column(0).into_owned();
        let (h, steps) = (0.01, 200);
        let tr = simulate_grid(&sys, &x0, Some(&sig), None, h, steps).unwrap();
        let start = Vector::from_column_slice(&tr.x[0]);
        let bk = signature(&sys, &k).unwrap().b_k;
        let coarse = implicit_euler(&sys, &bk, &sig, &start, h / 20.0, steps * 20);
        let fine = implicit_euler(&sys, &bk, &sig, &start, h / 40.0, steps * 40);
        let mut worst = 0.0f64;
        let mut tol = 0.0f64;
        for i in 0..=steps {
            let (xc, xf) = (&coarse[20 * i], &fine[40 * i]);
            let extrapolated = xf * 2.0 - xc;
            worst = worst.max((Vector::from_column_slice(&tr.x[i]) - extrapolated).amax());
            tol = tol.max((xc - xf).amax());
        }
        prop_assert!(worst <= tol + 1e-9, "error {worst:.3e} above integrator tolerance {tol:.3e}");
    }
}
