//! Small combinatorial utilities.

/// Kuhn augmenting-path maximum bipartite matching.
///
/// `adj[l]` lists the right vertices adjacent to left vertex `l`, visited in
/// the given order. Returns `match_left[l] = Some(r)`.
pub fn max_bipartite_matching(adj: &[Vec<usize>], n_right: usize) -> Vec<Option<usize>> {
    fn augment(l: usize, adj: &[Vec<usize>], seen: &mut [bool], match_right: &mut [Option<usize>]) -> bool {
        for &r in &adj[l] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if match_right[r].is_none() || augment(match_right[r].unwrap(), adj, seen, match_right) {
                match_right[r] = Some(l);
                return true;
            }
        }
        false
    }
    let mut match_right = vec![None; n_right];
    for l in 0..adj.len() {
        let mut seen = vec![false; n_right];
        augment(l, adj, &mut seen, &mut match_right);
    }
    let mut match_left = vec![None; adj.len()];
    for (r, m) in match_right.iter().enumerate() {
        if let Some(l) = m {
            match_left[*l] = Some(r);
        }
    }
    match_left
}

/// Perfect assignment on a square cost matrix minimizing the largest cost.
pub fn min_bottleneck_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut levels: Vec<f64> = cost.iter().flatten().copied().collect();
    levels.sort_by(|a, b| a.total_cmp(b));
    levels.dedup();
    let feasible = |t: f64| -> Option<Vec<usize>> {
        let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| cost[i][j] <= t).collect()).collect();
        let m = max_bipartite_matching(&adj, n);
        m.iter().copied().collect::<Option<Vec<usize>>>()
    };
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(levels[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    feasible(levels[lo]).expect("largest level admits a perfect matching")
}

/// Calls `f` on every k-subset of `0..n` in lexicographic order until it
/// returns `false`. Returns the number of subsets visited.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> usize {
    if k > n {
        return 0;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut count = 0;
    loop {
        count += 1;
        if !f(&idx) {
            return count;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return count;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return count;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Binomial coefficient saturating at `usize::MAX`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}
