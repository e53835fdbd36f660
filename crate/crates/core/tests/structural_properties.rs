mod common;

use common::*;
use cps_detect::linalg;
use cps_detect::structural::{
    max_linking, numeric_left_invertible, sample_realization, structurally_left_invertible, structurally_nondegenerate, Entry, Pattern,
    StructuredSystem, SystemDigraph,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_pattern(r: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Pattern {
    let mut p = Pattern::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if r.gen_bool(density) {
                p.set(i, j, Entry::free());
            }
        }
    }
    p
}

fn random_digraph(r: &mut ChaCha8Rng, nv: usize) -> (SystemDigraph, Vec<usize>, Vec<usize>) {
    let density = r.gen_range(0.05..0.3);
    let edges: Vec<(usize, usize)> = (0..nv).flat_map(|a| (0..nv).map(move |b| (a, b))).filter(|&(a, b)| a != b && r.gen_bool(density)).collect();
    let mut verts: Vec<usize> = (0..nv).collect();
    verts.shuffle(r);
    let ns = r.gen_range(1..=(nv / 2).max(1));
    let nt = r.gen_range(1..=(nv / 2).max(1));
    (SystemDigraph::from_edges(nv, &edges), verts[..ns].to_vec(), verts[nv - nt..].to_vec())
}

fn separated(g: &SystemDigraph, removed: &[bool], from: &[usize], to: &[usize]) -> bool {
    let mut seen = removed.to_vec();
    let mut stack: Vec<usize> = from.iter().copied().filter(|&v| !removed[v]).collect();
    stack.iter().for_each(|&v| seen[v] = true);
    while let Some(v) = stack.pop() {
        if to.contains(&v) {
            return false;
        }
        for &w in &g.adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    true
}

fn min_cut_by_search(g: &SystemDigraph, from: &[usize], to: &[usize]) -> usize {
    let nv = g.vertex_count();
    for size in 0..=nv {
        let mut hit = false;
        cps_detect::util::for_each_subset(nv, size, |sub| {
            let mut removed = vec![false; nv];
            sub.iter().for_each(|&v| removed[v] = true);
            hit = separated(g, &removed, from, to);
            !hit
        });
        if hit {
            return size;
        }
    }
    nv
}

fn exhaustive_linking(g: &SystemDigraph, from: &[usize], to: &[usize]) -> usize {
    fn paths(g: &SystemDigraph, v: usize, mask: u32, to: &[usize], out: &mut Vec<u32>) {
        if to.contains(&v) {
            out.push(mask);
        }
        for &w in &g.adj[v] {
            if mask & (1 << w) == 0 {
                paths(g, w, mask | (1 << w), to, out);
            }
        }
    }
    fn best(ps: &[u32], used: u32) -> usize {
        ps.iter().enumerate().filter(|(_, &p)| p & used == 0).map(|(i, &p)| 1 + best(&ps[i + 1..], used | p)).max().unwrap_or(0)
    }
    let mut all = Vec::new();
    for &s in from {
        paths(g, s, 1 << s, to, &mut all);
    }
    all.sort_unstable();
    all.dedup();
    best(&all, 0)
}

proptest! {
    #![proptest_config(cases(200))]

    #[test]
    fn linking_size_equals_min_vertex_cut(seed in any::<u64>()) {
        let mut r = rng(seed);
        let nv = r.gen_range(2..=20);
        let (g, from, to) = random_digraph(&mut r, nv);
        let res = max_linking(&g, &from, &to);
        prop_assert_eq!(res.linking.size(), min_cut_by_search(&g, &from, &to));
        prop_assert_eq!(res.cut.len(), res.linking.size());
        let mut removed = vec![false; nv];
        res.cut.iter().for_each(|&v| removed[v] = true);
        prop_assert!(separated(&g, &removed, &from, &to));
        let mut used = vec![false; nv];
        for path in &res.linking.paths {
            prop_assert!(from.contains(&path[0]) && to.contains(path.last().unwrap()));
            for w in path.windows(2) {
                prop_assert!(g.has_edge(w[0], w[1]));
            }
            for &v in path {
                prop_assert!(!used[v], "paths share vertex {}", v);
                used[v] = true;
            }
        }
    }

    #[test]
    fn linking_size_matches_exhaustive_search(seed in any::<u64>()) {
        let mut r = rng(seed);
        let nv = r.gen_range(2..=10);
        let (g, from, to) = random_digraph(&mut r, nv);
        prop_assert_eq!(max_linking(&g, &from, &to).linking.size(), exhaustive_linking(&g, &from, &to));
    }
}

proptest! {
    #![proptest_config(cases(50))]

    #[test]
    fn matching_agrees_with_determinant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let density = r.gen_range(0.1..0.4);
        let (pe, pa) = (random_pattern(&mut r, n, n, density), random_pattern(&mut r, n, n, density));
        let s = StructuredSystem::new(pe, pa, Pattern::zeros(n, 0), Pattern::zeros(0, n), Pattern::zeros(0, 0)).unwrap();
        let real = sample_realization(&s, seed).unwrap();
        let sv = Complex64::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
        let m = linalg::to_complex(&real.e) * sv + linalg::to_complex(&real.a);
        let svals = linalg::csingular_values(&m);
        let numeric = svals[n - 1] > 1e-10 * (1.0 + svals[0]);
        prop_assert_eq!(structurally_nondegenerate(&s), numeric);
    }

    #[test]
    fn structural_verdict_agrees_with_realizations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let m = r.gen_range(1..=3);
        let p = r.gen_range(1..=4);
        let mut e = Pattern::zeros(n, n);
        let dynamic = r.gen_range(1..=n);
        for i in 0..dynamic {
            e.set(i, i, Entry::free());
        }
        let mut a = random_pattern(&mut r, n, n, 0.3);
        for i in 0..n {
            a.set(i, i, Entry::free());
        }
        let b = random_pattern(&mut r, n, m, 0.3);
        let c = random_pattern(&mut r, p, n, 0.3);
        let d = random_pattern(&mut r, p, m, 0.1);
        let s = StructuredSystem::new(e, a, b, c, d).unwrap();
        let verdict = structurally_left_invertible(&s).unwrap().left_invertible;
        let samples: Vec<bool> = (0..3).map(|t| numeric_left_invertible(&sample_realization(&s, seed ^ (t * 7919)).unwrap(), seed)).collect();
        if verdict {
            prop_assert!(samples.iter().any(|&x| x));
        } else {
            prop_assert!(samples.iter().all(|&x| !x));
        }
    }
}
