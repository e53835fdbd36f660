mod common;

use common::*;
use cps_detect::descriptor::partition_index_one;
use cps_detect::linalg::{self, Mat};
use cps_detect::models::power::{build_power_descriptor, Generator, Line, Measurement, MeasurementEntry, PowerModel, PowerNetworkSpec};
use cps_detect::models::water::{
    build_water_descriptor, hazen_williams_flow, solve_steady_state, water_theft_spec, WaterEdge, WaterNetworkSpec, WaterNode,
};
use cps_detect::structural::sample_realization;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_power_spec(r: &mut ChaCha8Rng) -> PowerNetworkSpec {
    let g = r.gen_range(1..=4);
    let m = r.gen_range(g.max(2)..=7);
    let generators = (0..g)
        .map(|k| Generator { m: r.gen_range(0.01..0.2), d: r.gen_range(0.0..0.2), tie_susceptance: r.gen_range(1.0..20.0), bus: Some(k + 1) })
        .collect();
    let mut lines: Vec<Line> = (2..=m).map(|j| Line { i: r.gen_range(1..j), j, b: r.gen_range(1.0..20.0) }).collect();
    for _ in 0..r.gen_range(0..=m) {
        let (i, j) = (r.gen_range(1..=m), r.gen_range(1..=m));
        if i != j {
            lines.push(Line { i, j, b: r.gen_range(1.0..20.0) });
        }
    }
    let mut measurements = Vec::new();
    for _ in 0..r.gen_range(1..=5) {
        let measurement = match r.gen_range(0..5) {
            0 => Measurement::RotorAngle { generator: r.gen_range(1..=g) },
            1 => Measurement::Frequency { generator: r.gen_range(1..=g) },
            2 => Measurement::BusAngle { bus: r.gen_range(1..=m) },
            3 => Measurement::Injection { bus: r.gen_range(1..=m) },
            _ => {
                let l = &lines[r.gen_range(0..lines.len())];
                Measurement::Flow { from: l.i, to: l.j }
            }
        };
        measurements.push(MeasurementEntry::Detailed { measurement, protected: r.gen_bool(0.2) });
    }
    PowerNetworkSpec { generators, buses: Some(m), lines, measurements }
}

fn bus_block(model: &PowerModel, a: &Mat) -> Mat {
    let g = model.generators;
    a.view((2 * g, 2 * g), (model.buses, model.buses)).into_owned()
}

fn assert_laplacian(l: &Mat) -> Result<(), TestCaseError> {
    let scale = 1.0 + l.amax();
    prop_assert!((l - l.transpose()).amax() <= 1e-12 * scale);
    for i in 0..l.nrows() {
        prop_assert!(l.row(i).sum().abs() <= 1e-12 * scale);
        for j in 0..l.ncols() {
            if i != j {
                prop_assert!(l[(i, j)] <= 0.0);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(cases(100))]

    #[test]
    fn power_laplacian_is_symmetric_with_zero_row_sums(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = build_power_descriptor(&random_power_spec(&mut r)).unwrap();
        assert_laplacian(&model.laplacian)?;
        let eig = linalg::eigenvalues(&model.laplacian);
        prop_assert!(eig.iter().all(|z| z.re >= -1e-9 * (1.0 + model.laplacian.amax())));
        prop_assert_eq!(eig.iter().filter(|z| z.norm() <= 1e-9 * (1.0 + model.laplacian.amax())).count(), 1);
    }

    #[test]
    fn power_algebraic_block_is_negative_definite(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = build_power_descriptor(&random_power_spec(&mut r)).unwrap();
        let g = model.generators;
        let a22 = bus_block(&model, &model.system.a);
        let lll = model.laplacian.view((g, g), (model.buses, model.buses)).into_owned();
        prop_assert!((&a22 + &lll).amax() <= 1e-12 * (1.0 + lll.amax()));
        let sym = (&a22 + a22.transpose()) * 0.5;
        prop_assert!(linalg::eigenvalues(&sym).iter().all(|z| z.re < 0.0));
        prop_assert!(partition_index_one(&model.system).is_ok());
        let e = &model.system.e;
        for k in 0..g {
            prop_assert_eq!(e[(k, k)], 1.0);
            prop_assert!(e[(g + k, g + k)] > 0.0);
        }
        prop_assert_eq!(linalg::rank(e, None), 2 * g);
    }

    #[test]
    fn power_pattern_covers_the_built_matrices(seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = build_power_descriptor(&random_power_spec(&mut r)).unwrap();
        let sys = &model.system;
        let pat = &model.pattern;
        for (m, p) in [(&sys.e, &pat.e), (&sys.a, &pat.a), (&sys.c, &pat.c)] {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    prop_assert_eq!(m[(i, j)] != 0.0, p.is_nonzero(i, j), "entry ({}, {})", i, j);
                }
            }
        }
        let real = sample_realization(pat, seed).unwrap();
        let g = model.generators;
        let a22 = bus_block(&model, &real.a);
        prop_assert!((&a22 - a22.transpose()).amax() <= 1e-12 * (1.0 + a22.amax()));
        for u in 0..g + model.buses {
            let row = g + u;
            let cols: Vec<usize> = (0..g).chain(2 * g..2 * g + model.buses).collect();
            let sum: f64 = cols.iter().map(|&c| real.a[(row, c)]).sum();
            prop_assert!(sum.abs() <= 1e-12 * (1.0 + real.a.amax()), "row {} sums to {}", row, sum);
        }
        prop_assert!(partition_index_one(&real).is_ok());
    }
}

fn perturbed_water_spec(r: &mut ChaCha8Rng) -> WaterNetworkSpec {
    let mut spec = water_theft_spec();
    for node in spec.nodes.iter_mut() {
        if let WaterNode::Junction { demand, .. } = node {
            *demand *= r.gen_range(0.5..1.5);
        }
    }
    for edge in spec.edges.iter_mut() {
        match edge {
            WaterEdge::Pipe { conductance, .. } => *conductance *= r.gen_range(0.7..1.3),
            WaterEdge::Pump { boost, .. } => *boost *= r.gen_range(0.9..1.1),
            WaterEdge::Valve { .. } => {}
        }
    }
    spec
}

proptest! {
    #![proptest_config(cases(30))]

    #[test]
    fn water_steady_state_conserves_flow(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = perturbed_water_spec(&mut r);
        let heads = solve_steady_state(&spec).unwrap();
        for (k, node) in spec.nodes.iter().enumerate() {
            let pumped = spec.edges.iter().any(|e| matches!(e, WaterEdge::Pump { from, to, .. } | WaterEdge::Valve { from, to, .. } if *from == k + 1 || *to == k + 1));
            if pumped {
                continue;
            }
            let demand = match node {
                WaterNode::Junction { demand, .. } => *demand,
                WaterNode::Tank { .. } => 0.0,
                WaterNode::Reservoir { .. } => continue,
            };
            let mut inflow = 0.0;
            for e in &spec.edges {
                if let WaterEdge::Pipe { from, to, conductance, .. } = *e {
                    let q = hazen_williams_flow(conductance, heads[from - 1] - heads[to - 1]);
                    if to == k + 1 {
                        inflow += q;
                    }
                    if from == k + 1 {
                        inflow -= q;
                    }
                }
            }
            prop_assert!((inflow - demand).abs() <= 1e-8, "node {}: inflow {} demand {}", k + 1, inflow, demand);
        }
        for e in &spec.edges {
            if let WaterEdge::Pump { from, to, boost } = *e {
                prop_assert!((heads[to - 1] - heads[from - 1] - boost).abs() <= 1e-8 * (1.0 + boost.abs()));
            }
        }
        for (k, node) in spec.nodes.iter().enumerate() {
            if let WaterNode::Reservoir { head, .. } = node {
                prop_assert!((heads[k] - head).abs() <= 1e-9 * (1.0 + head.abs()));
            }
        }
    }

    #[test]
    fn water_flow_laplacian_is_a_weighted_laplacian(seed in any::<u64>()) {
        let mut r = rng(seed);
        let spec = perturbed_water_spec(&mut r);
        let model = build_water_descriptor(&spec).unwrap();
        assert_laplacian(&model.flow_laplacian)?;
        let nn = spec.nodes.len();
        for (i, node) in spec.nodes.iter().enumerate() {
            let reservoir = matches!(node, WaterNode::Reservoir { .. });
            for j in 0..nn {
                let a = model.system.a[(i, j)];
                if reservoir {
                    prop_assert_eq!(a, 0.0);
                } else {
                    prop_assert!((a + model.flow_laplacian[(i, j)]).abs() <= 1e-12 * (1.0 + model.flow_laplacian.amax()));
                }
            }
        }
        for (k, e) in spec.edges.iter().enumerate() {
            match e {
                WaterEdge::Pipe { .. } => prop_assert!(model.slopes[k] > 0.0),
                _ => prop_assert_eq!(model.slopes[k], 0.0),
            }
        }
        prop_assert!(partition_index_one(&model.system).is_ok());
    }
}
