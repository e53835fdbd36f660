mod common;

use common::*;
use cps_detect::descriptor::{AttackSet, DescriptorSystem};
use cps_detect::linalg::Vector;
use cps_detect::models::water;
use cps_detect::monitors::{active_equivalence_check, dynamic_monitor_oracle, static_monitor};
use cps_detect::signal::{AttackSignal, ProbeSignal, Waveform};
use cps_detect::simulate::{simulate, simulate_grid, SimulationTrace};
use cps_detect::synthesis::{
    synth_prototype, synth_transfer_nullspace_attack, synth_water_theft_attack, synth_zero_dynamics_attack, PrototypeKind,
    PrototypeParams,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_waveforms(r: &mut ChaCha8Rng, k: usize) -> Vec<Waveform> {
    (0..k)
        .map(|_| match r.gen_range(0..3) {
            0 => Waveform::Step { value: r.gen_range(-1.0..1.0), at: r.gen_range(0.0..1.0) },
            1 => Waveform::Sinusoid { amplitude: r.gen_range(0.2..1.0), omega: r.gen_range(0.5..3.0), phase: r.gen_range(0.0..6.0) },
            _ => Waveform::Polynomial { coeffs: vec![r.gen_range(-1.0..1.0), r.gen_range(-0.5..0.5)] },
        })
        .collect()
}

fn max_input_norm(tr: &SimulationTrace) -> f64 {
    tr.u.iter().map(|u| Vector::from_column_slice(u).norm()).fold(0.0, f64::max)
}

fn nulling_ratio(tr: &SimulationTrace, x0: &Vector) -> f64 {
    tr.max_output_norm() / (1.0 + x0.norm() + max_input_norm(tr))
}

fn horizon_for(s: Complex64) -> f64 {
    if s.re > 0.0 {
        (3.0 / s.re).min(5.0)
    } else {
        5.0
    }
}

fn zero_dynamics_case(r: &mut ChaCha8Rng) -> Option<(DescriptorSystem, Vector, AttackSignal)> {
    let (sys, k) = random_square_case(r, 7);
    let (x0, sig) = synth_zero_dynamics_attack(&sys, &k).ok()?;
    Some((sys, x0, sig))
}

proptest! {
    #![proptest_config(cases(40))]

    #[test]
    fn zero_dynamics_attacks_null_the_output(seed in any::<u64>()) {
        let mut r = rng(seed);
        let Some((sys, x0, sig)) = zero_dynamics_case(&mut r) else { return Ok(()) };
        let tr = simulate(&sys, &x0, Some(&sig), None, horizon_for(sig.modes[0].s), None).unwrap();
        prop_assert!(nulling_ratio(&tr, &x0) <= 1e-6, "ratio {:.3e}", nulling_ratio(&tr, &x0));
    }

    #[test]
    fn zero_dynamics_inputs_are_real_parts_of_the_mode(seed in any::<u64>()) {
        let mut r = rng(seed);
        let Some((_, _, sig)) = zero_dynamics_case(&mut r) else { return Ok(()) };
        let mode = &sig.modes[0];
        let factor = if mode.s.im == 0.0 { 1.0 } else { 2.0 };
        for i in 0..20 {
            let t = 0.1 * i as f64;
            let u = sig.open_loop(t);
            let expect = mode.g.map(|g| (g * (mode.s * t).exp()).re * factor);
            prop_assert!((u - expect).amax() <= 1e-12 * (1.0 + mode.g.norm() * (mode.s.re * t).exp()));
        }
    }

    #[test]
    fn nullspace_attacks_null_the_output(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=5);
        let p = r.gen_range(1..=2);
        let sys = random_system(&mut r, n, p);
        let k = random_attack(&mut r, n, p, p + 1);
        let Ok(att) = synth_transfer_nullspace_attack(&sys, &k, Waveform::Polynomial { coeffs: vec![0.0, 0.0, 1.0] }) else { return Ok(()) };
        let x0 = Vector::zeros(n);
        let tr = simulate(&sys, &x0, Some(&att.signal), None, 3.0, None).unwrap();
        prop_assert!(max_input_norm(&tr) > 1e-3);
        prop_assert!(nulling_ratio(&tr, &x0) <= 1e-6, "ratio {:.3e}", nulling_ratio(&tr, &x0));
    }

    #[test]
    fn zero_dynamics_footprint_ignores_probes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let Some((sys, xa, sig)) = zero_dynamics_case(&mut r) else { return Ok(()) };
        let xb = gauss(&mut r, sys.n(), 1).column(0).into_owned();
        let probes: Vec<ProbeSignal> = (0..10).map(|i| ProbeSignal::random(sys.n(), sys.p(), seed ^ i)).collect();
        let h = horizon_for(sig.modes[0].s);
        let worst = active_equivalence_check(&sys, &xa, &sig, &xb, &probes, h / 400.0, 400).unwrap();
        let scale = simulate_grid(&sys, &(&xa + &xb), Some(&sig), None, h / 400.0, 400).unwrap().max_output_norm();
        prop_assert!(worst <= 1e-8 * (1.0 + scale), "deviation {worst:.3e}");
    }

    #[test]
    fn covert_correction_cancels_the_state_attack(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let p = r.gen_range(1..=3);
        let sys = random_system(&mut r, n, p);
        let kk = r.gen_range(1..=n);
        let params = PrototypeParams {
            attack_set: Some(state_attack(&mut r, n, kk)),
            input: Some(random_waveforms(&mut r, 1).remove(0)),
            ..Default::default()
        };
        let proto = synth_prototype(&sys, PrototypeKind::Covert, &params).unwrap();
        let x0 = Vector::zeros(n);
        let tr = simulate(&sys, &x0, Some(&proto.signal), None, 5.0, None).unwrap();
        prop_assert!(tr.max_state_norm() > 1e-6);
        prop_assert!(nulling_ratio(&tr, &x0) <= 1e-6, "ratio {:.3e}", nulling_ratio(&tr, &x0));
    }

    #[test]
    fn trajectories_satisfy_the_algebraic_constraints(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=8);
        let p = r.gen_range(1..=4);
        let sys = random_system(&mut r, n, p);
        let kk = r.gen_range(1..=n + p);
        let k = random_attack(&mut r, n, p, kk);
        let mut sig = AttackSignal::new(k.clone());
        sig.waveforms = random_waveforms(&mut r, k.k());
        let x0 = gauss(&mut r, n, 1).column(0).into_owned();
        let probe = ProbeSignal::random(n, p, seed);
        let tr = simulate(&sys, &x0, Some(&sig), Some(&probe), 3.0, None).unwrap();
        prop_assert!(tr.meta.constraint_residual <= 1e-8, "residual {:.3e}", tr.meta.constraint_residual);
    }

    #[test]
    fn responses_superpose(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=7);
        let p = r.gen_range(1..=3);
        let sys = random_system(&mut r, n, p);
        let kk = r.gen_range(1..=n + p);
        let k = random_attack(&mut r, n, p, kk);
        let (mut sa, mut sb) = (AttackSignal::new(k.clone()), AttackSignal::new(k.clone()));
        sa.waveforms = random_waveforms(&mut r, k.k());
        sb.waveforms = random_waveforms(&mut r, k.k());
        let mut sum = AttackSignal::new(k.clone());
        sum.waveforms = sa.waveforms.iter().zip(&sb.waveforms).map(|(a, b)| Waveform::Sum { terms: vec![a.clone(), b.clone()] }).collect();
        let xa = gauss(&mut r, n, 1).column(0).into_owned();
        let xb = gauss(&mut r, n, 1).column(0).into_owned();
        let (h, steps) = (0.01, 300);
        let ya = simulate_grid(&sys, &xa, Some(&sa), None, h, steps).unwrap();
        let yb = simulate_grid(&sys, &xb, Some(&sb), None, h, steps).unwrap();
        let ys = simulate_grid(&sys, &(&xa + &xb), Some(&sum), None, h, steps).unwrap();
        let scale = 1.0 + ya.max_output_norm() + yb.max_output_norm();
        for i in 0..=steps {
            let d = ys.y_vec(i) - ya.y_vec(i) - yb.y_vec(i);
            prop_assert!(d.amax() <= 1e-9 * scale, "step {i}: {:.3e}", d.amax());
        }
    }

    #[test]
    fn monitors_stay_silent_without_attack(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=7);
        let p = r.gen_range(1..=n);
        let sys = random_system(&mut r, n, p);
        let x0 = gauss(&mut r, n, 1).column(0).into_owned();
        let tr = simulate(&sys, &x0, None, None, 5.0, None).unwrap();
        prop_assert!(!static_monitor(&tr, &sys.c, None).psi1);
        prop_assert!(!dynamic_monitor_oracle(&sys, &tr, None).unwrap().psi1);
    }

    #[test]
    fn dynamic_monitor_flags_whatever_static_flags(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let p = r.gen_range(1..=4);
        let sys = random_system(&mut r, n, p);
        let kk = r.gen_range(1..=n + p);
        let k = random_attack(&mut r, n, p, kk);
        let mut sig = AttackSignal::new(k.clone());
        sig.waveforms = random_waveforms(&mut r, k.k());
        let x0 = gauss(&mut r, n, 1).column(0).into_owned();
        let tr = simulate(&sys, &x0, Some(&sig), None, 5.0, None).unwrap();
        let thr = 1e-6 * (1.0 + tr.max_output_norm());
        if static_monitor(&tr, &sys.c, Some(thr)).psi1 {
            prop_assert!(dynamic_monitor_oracle(&sys, &tr, Some(thr)).unwrap().psi1);
        }
    }
}

#[test]
fn water_theft_nulls_the_output() {
    let model = water::water_theft_demo().unwrap();
    let att = synth_water_theft_attack(&model).unwrap();
    let x0 = Vector::zeros(model.system.n());
    let attacked = simulate(&model.system, &x0, Some(&att.signal), None, 50.0, None).unwrap();
    let ratio = nulling_ratio(&attacked, &x0);
    assert!(ratio <= 1e-6, "ratio {ratio:.3e}");
    assert!(attacked.max_state_norm() > 1.0);
    let all = AttackSet::new(att.channels.to_vec()).unwrap();
    assert_eq!(att.signal.attack_set, all);
}
