//! Generic (structural) properties decided from sparsity patterns.
//!
//! A [`StructuredSystem`] fixes which entries of `(E, A, B, C, D)` are zero.
//! Its digraph has input, state and output vertices with an edge `x_j → x_i`
//! whenever `E_ij` or `A_ij` is free, `u_j → x_i` for free `B_ij`,
//! `x_j → y_i` for free `C_ij` and `u_j → y_i` for free `D_ij`.
//! Maximum linkings are computed by unit vertex capacities and Dinic's
//! max-flow algorithm; the residual graph yields a minimum vertex cut.

use crate::descriptor::{AttackSet, AttackSignature, DescriptorSystem};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Matrix selector used by derived entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    E,
    A,
    B,
    C,
    D,
}

/// `coef · M[i][j]` contribution to a derived entry (0-based indices).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedTerm {
    pub coef: f64,
    pub matrix: Which,
    pub i: usize,
    pub j: usize,
}

/// One pattern entry.
#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Zero,
    /// Sampled uniformly from `[lo, hi]`.
    Free { lo: f64, hi: f64 },
    /// Linear combination of other entries, evaluated after sampling.
    /// Encodes equality ties such as Laplacian symmetry and zero row sums.
    Derived(Vec<DerivedTerm>),
}

impl Entry {
    pub const DEFAULT_RANGE: (f64, f64) = (0.1, 1.0);

    pub fn free() -> Self {
        Entry::Free { lo: Self::DEFAULT_RANGE.0, hi: Self::DEFAULT_RANGE.1 }
    }

    pub fn is_nonzero(&self) -> bool {
        !matches!(self, Entry::Zero)
    }
}

/// Dense pattern matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Entry>,
}

impl Pattern {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Entry::Zero; rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> &Entry {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Entry) {
        self.entries[i * self.cols + j] = e;
    }

    pub fn is_nonzero(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_nonzero()
    }

    /// Free entries of every nonzero of a numeric matrix, with a range of
    /// ±50% around the value.
    pub fn from_numeric(m: &Mat) -> Self {
        let mut p = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    let (a, b) = (0.5 * v, 1.5 * v);
                    p.set(i, j, Entry::Free { lo: a.min(b), hi: a.max(b) });
                }
            }
        }
        p
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut p = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                p.set(i, jj, self.get(i, j).clone());
            }
        }
        p
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut p = Self::zeros(rows.len(), self.cols);
        for (ii, &i) in rows.iter().enumerate() {
            for j in 0..self.cols {
                p.set(ii, j, self.get(i, j).clone());
            }
        }
        p
    }

    pub fn free_count(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e, Entry::Free { .. })).count()
    }
}

/// Sparsity patterns for `(E, A, B, C, D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredSystem {
    pub e: Pattern,
    pub a: Pattern,
    pub b: Pattern,
    pub c: Pattern,
    pub d: Pattern,
}

impl StructuredSystem {
    pub fn new(e: Pattern, a: Pattern, b: Pattern, c: Pattern, d: Pattern) -> Result<Self> {
        let n = a.rows;
        let ok = a.cols == n
            && e.rows == n
            && e.cols == n
            && b.rows == n
            && c.cols == n
            && d.rows == c.rows
            && d.cols == b.cols;
        if !ok {
            return Err(Error::DimensionMismatch("pattern shapes are inconsistent".into()));
        }
        Ok(Self { e, a, b, c, d })
    }

    /// Pattern of a numeric system with signature `sig`.
    pub fn from_system(sys: &DescriptorSystem, sig: &AttackSignature) -> Self {
        Self {
            e: Pattern::from_numeric(&sys.e),
            a: Pattern::from_numeric(&sys.a),
            b: Pattern::from_numeric(&sig.b_k),
            c: Pattern::from_numeric(&sys.c),
            d: Pattern::from_numeric(&sig.d_k),
        }
    }

    pub fn n(&self) -> usize {
        self.a.rows
    }

    pub fn m(&self) -> usize {
        self.b.cols
    }

    pub fn p(&self) -> usize {
        self.c.rows
    }

    /// Number of free parameters `d`.
    pub fn free_count(&self) -> usize {
        [&self.e, &self.a, &self.b, &self.c, &self.d].iter().map(|p| p.free_count()).sum()
    }

    fn pattern(&self, w: Which) -> &Pattern {
        match w {
            Which::E => &self.e,
            Which::A => &self.a,
            Which::B => &self.b,
            Which::C => &self.c,
            Which::D => &self.d,
        }
    }

    /// Keeps the input columns of the 1-based channel set `k`.
    pub fn select_inputs(&self, k: &AttackSet) -> Result<Self> {
        k.check_range(self.m())?;
        let cols = k.zero_based();
        Self::new(self.e.clone(), self.a.clone(), self.b.select_columns(&cols), self.c.clone(), self.d.select_columns(&cols))
    }

    /// Keeps the 0-based output rows `rows`.
    pub fn select_outputs(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.p()) {
            return Err(Error::IndexOutOfRange { index: r + 1, max: self.p() });
        }
        Self::new(self.e.clone(), self.a.clone(), self.b.clone(), self.c.select_rows(rows), self.d.select_rows(rows))
    }

    /// Replaces the input and feedthrough patterns.
    pub fn with_inputs(&self, b: Pattern, d: Pattern) -> Result<Self> {
        Self::new(self.e.clone(), self.a.clone(), b, self.c.clone(), d)
    }

    /// Replaces the output patterns.
    pub fn with_outputs(&self, c: Pattern, d: Pattern) -> Result<Self> {
        Self::new(self.e.clone(), self.a.clone(), self.b.clone(), c, d)
    }
}

/// Draws an admissible realization: free entries uniformly in their ranges,
/// derived entries evaluated afterwards, zero entries exactly zero.
pub fn sample_realization(s: &StructuredSystem, seed: u64) -> Result<DescriptorSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = [Which::E, Which::A, Which::B, Which::C, Which::D];
    let mut vals: Vec<Mat> = order.iter().map(|&w| {
        let p = s.pattern(w);
        Mat::zeros(p.rows, p.cols)
    }).collect();
    let mut pending: Vec<(usize, usize, usize)> = Vec::new();
    for (wi, &w) in order.iter().enumerate() {
        let p = s.pattern(w);
        for i in 0..p.rows {
            for j in 0..p.cols {
                match p.get(i, j) {
                    Entry::Zero => {}
                    Entry::Free { lo, hi } => {
                        vals[wi][(i, j)] = if hi > lo { rng.gen_range(*lo..=*hi) } else { *lo };
                    }
                    Entry::Derived(_) => pending.push((wi, i, j)),
                }
            }
        }
    }
    let idx = |w: Which| order.iter().position(|&o| o == w).expect("all matrices listed");
    let mut done = vec![false; pending.len()];
    let is_pending = |w: usize, i: usize, j: usize, done: &[bool], pending: &[(usize, usize, usize)]| {
        pending.iter().zip(done).any(|(&(pw, pi, pj), &d)| !d && pw == w && pi == i && pj == j)
    };
    loop {
        let mut progress = false;
        for k in 0..pending.len() {
            if done[k] {
                continue;
            }
            let (wi, i, j) = pending[k];
            let Entry::Derived(terms) = s.pattern(order[wi]).get(i, j) else { unreachable!() };
            if terms.iter().any(|t| is_pending(idx(t.matrix), t.i, t.j, &done, &pending)) {
                continue;
            }
            let v: f64 = terms.iter().map(|t| t.coef * vals[idx(t.matrix)][(t.i, t.j)]).sum();
            vals[wi][(i, j)] = v;
            done[k] = true;
            progress = true;
        }
        if done.iter().all(|&d| d) {
            break;
        }
        if !progress {
            return Err(Error::InvalidInput("cyclic derived entries in pattern".into()));
        }
    }
    let mut it = vals.into_iter();
    let (e, a, b, c, d) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    DescriptorSystem::new(e, a, b, c, d)
}

/// Vertex kind in the system digraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Input,
    State,
    Output,
}

/// Input–state–output digraph. Vertex ids: inputs `0..m`, states
/// `m..m+n`, outputs `m+n..m+n+p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemDigraph {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    /// Sorted out-neighbour lists.
    pub adj: Vec<Vec<usize>>,
}

impl SystemDigraph {
    pub fn vertex_count(&self) -> usize {
        self.m + self.n + self.p
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        if v < self.m {
            VertexKind::Input
        } else if v < self.m + self.n {
            VertexKind::State
        } else {
            VertexKind::Output
        }
    }

    pub fn inputs(&self) -> Vec<usize> {
        (0..self.m).collect()
    }

    pub fn outputs(&self) -> Vec<usize> {
        (self.m + self.n..self.vertex_count()).collect()
    }

    /// `u3`, `x7`, `y1` style 1-based label.
    pub fn label(&self, v: usize) -> String {
        match self.kind(v) {
            VertexKind::Input => format!("u{}", v + 1),
            VertexKind::State => format!("x{}", v - self.m + 1),
            VertexKind::Output => format!("y{}", v - self.m - self.n + 1),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.adj[from].binary_search(&to).is_ok()
    }

    /// General digraph from an edge list, used for tests on arbitrary graphs.
    pub fn from_edges(vertex_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); vertex_count];
        for &(a, b) in edges {
            adj[a].push(b);
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        Self { m: 0, n: vertex_count, p: 0, adj }
    }
}

pub fn build_digraph(s: &StructuredSystem) -> SystemDigraph {
    let (n, m, p) = (s.n(), s.m(), s.p());
    let mut adj = vec![Vec::new(); m + n + p];
    let x = |i: usize| m + i;
    let y = |i: usize| m + n + i;
    for i in 0..n {
        for j in 0..n {
            if s.e.is_nonzero(i, j) || s.a.is_nonzero(i, j) {
                adj[x(j)].push(x(i));
            }
        }
        for j in 0..m {
            if s.b.is_nonzero(i, j) {
                adj[j].push(x(i));
            }
        }
    }
    for i in 0..p {
        for j in 0..n {
            if s.c.is_nonzero(i, j) {
                adj[x(j)].push(y(i));
            }
        }
        for j in 0..m {
            if s.d.is_nonzero(i, j) {
                adj[j].push(y(i));
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    SystemDigraph { m, n, p, adj }
}

/// Vertex-disjoint simple paths from sources to sinks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Linking {
    pub paths: Vec<Vec<usize>>,
}

impl Linking {
    pub fn size(&self) -> usize {
        self.paths.len()
    }
}

struct FlowEdge {
    to: usize,
    cap: i64,
}

/// Dinic max-flow with edges stored in insertion order.
struct Dinic {
    edges: Vec<FlowEdge>,
    graph: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Self { edges: Vec::new(), graph: vec![Vec::new(); n], level: vec![0; n], iter: vec![0; n] }
    }

    fn add_edge(&mut self, a: usize, b: usize, cap: i64) -> usize {
        let id = self.edges.len();
        self.edges.push(FlowEdge { to: b, cap });
        self.graph[a].push(id);
        self.edges.push(FlowEdge { to: a, cap: 0 });
        self.graph[b].push(id + 1);
        id
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.graph[v] {
                let to = self.edges[e].to;
                if self.edges[e].cap > 0 && self.level[to] < 0 {
                    self.level[to] = self.level[v] + 1;
                    q.push_back(to);
                }
            }
        }
    }

    fn dfs(&mut self, v: usize, t: usize, f: i64) -> i64 {
        if v == t {
            return f;
        }
        while self.iter[v] < self.graph[v].len() {
            let e = self.graph[v][self.iter[v]];
            let to = self.edges[e].to;
            if self.edges[e].cap > 0 && self.level[v] < self.level[to] {
                let d = self.dfs(to, t, f.min(self.edges[e].cap));
                if d > 0 {
                    self.edges[e].cap -= d;
                    self.edges[e ^ 1].cap += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.graph[v] {
                let to = self.edges[e].to;
                if self.edges[e].cap > 0 && !seen[to] {
                    seen[to] = true;
                    q.push_back(to);
                }
            }
        }
        seen
    }
}

/// Maximum linking result with a minimum vertex cut certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkingResult {
    pub linking: Linking,
    /// Vertices whose removal separates the sources from the sinks; its size
    /// equals the linking size.
    pub cut: Vec<usize>,
}

/// Maximum number of vertex-disjoint paths from `from` to `to`.
pub fn max_linking(g: &SystemDigraph, from: &[usize], to: &[usize]) -> LinkingResult {
    let nv = g.vertex_count();
    let (src, sink) = (2 * nv, 2 * nv + 1);
    let inf = nv as i64 + 1;
    let mut d = Dinic::new(2 * nv + 2);
    let mut split = vec![0; nv];
    for v in 0..nv {
        split[v] = d.add_edge(2 * v, 2 * v + 1, 1);
    }
    let mut arcs = Vec::new();
    for v in 0..nv {
        for &w in &g.adj[v] {
            if w != v {
                arcs.push((d.add_edge(2 * v + 1, 2 * w, inf), v, w));
            }
        }
    }
    for &u in from {
        d.add_edge(src, 2 * u, inf);
    }
    for &y in to {
        d.add_edge(2 * y + 1, sink, inf);
    }
    let flow = d.max_flow(src, sink);

    let seen = d.reachable(src);
    let cut: Vec<usize> = (0..nv).filter(|&v| seen[2 * v] && !seen[2 * v + 1]).collect();

    let mut used: Vec<i64> = arcs.iter().map(|&(e, _, _)| d.edges[e ^ 1].cap).collect();
    let is_sink: Vec<bool> = (0..nv).map(|v| to.contains(&v)).collect();
    let mut paths = Vec::new();
    for &u in from {
        if d.edges[split[u]].cap != 0 {
            continue;
        }
        let mut path = vec![u];
        let mut v = u;
        while !(is_sink[v] && path_ends_here(&arcs, &used, v)) {
            let Some(k) = arcs.iter().enumerate().position(|(k, &(_, a, _))| a == v && used[k] > 0) else {
                break;
            };
            used[k] -= 1;
            v = arcs[k].2;
            path.push(v);
        }
        paths.push(path);
    }
    debug_assert_eq!(paths.len() as i64, flow);
    LinkingResult { linking: Linking { paths }, cut }
}

fn path_ends_here(arcs: &[(usize, usize, usize)], used: &[i64], v: usize) -> bool {
    !arcs.iter().zip(used).any(|(&(_, a, _), &u)| a == v && u > 0)
}

/// Size of a maximum input–output linking.
pub fn max_linking_size(g: &SystemDigraph) -> usize {
    max_linking(g, &g.inputs(), &g.outputs()).linking.size()
}

/// Perfect matching on the union sparsity of `[E]` and `[A]`.
pub fn structurally_nondegenerate(s: &StructuredSystem) -> bool {
    let n = s.n();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| s.e.is_nonzero(i, j) || s.a.is_nonzero(i, j)).collect())
        .collect();
    crate::util::max_bipartite_matching(&adj, n).iter().all(|m| m.is_some())
}

/// Structural left-invertibility verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct LeftInvertibility {
    pub left_invertible: bool,
    pub max_linking: usize,
    pub linking: Linking,
    /// Minimum vertex cut separating inputs from outputs.
    pub cut: Vec<usize>,
    pub digraph: SystemDigraph,
}

/// Left-invertible for almost all admissible realizations iff a linking of
/// size `|U|` exists.
pub fn structurally_left_invertible(s: &StructuredSystem) -> Result<LeftInvertibility> {
    if !structurally_nondegenerate(s) {
        return Err(Error::DegeneratePencil);
    }
    let g = build_digraph(s);
    let res = max_linking(&g, &g.inputs(), &g.outputs());
    Ok(LeftInvertibility {
        left_invertible: res.linking.size() == g.m,
        max_linking: res.linking.size(),
        linking: res.linking,
        cut: res.cut,
        digraph: g,
    })
}

/// Outcome of sampling a numeric property over admissible realizations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenericVerdict {
    HoldsGenerically,
    FailsOnAllSamples,
    Mixed { samples: Vec<bool> },
}

/// One passing realization certifies the generic property on the polytope;
/// a mix of passing and failing samples is reported for diagnosis.
pub fn verify_generic(
    s: &StructuredSystem,
    property: impl Fn(&DescriptorSystem) -> bool,
    trials: usize,
    seed: u64,
) -> Result<GenericVerdict> {
    let mut samples = Vec::with_capacity(trials);
    for t in 0..trials.max(1) {
        let sys = sample_realization(s, seed.wrapping_add(t as u64 * 0x9e37_79b9))?;
        samples.push(property(&sys));
    }
    Ok(if samples.iter().all(|&b| b) {
        GenericVerdict::HoldsGenerically
    } else if samples.iter().all(|&b| !b) {
        GenericVerdict::FailsOnAllSamples
    } else {
        GenericVerdict::Mixed { samples }
    })
}

/// Numeric left-invertibility: full normal column rank of the Rosenbrock
/// pencil built from `(E, A, B, C, D)` of a realization.
pub fn numeric_left_invertible(sys: &DescriptorSystem, seed: u64) -> bool {
    crate::zeros::RosenbrockPencil::from_parts(&sys.e, &sys.a, &sys.b, &sys.c, &sys.d).is_left_invertible(seed)
}

mod file {
    use super::*;
    use serde_json::{json, Value};

    fn entry_to_json(e: &Entry) -> Value {
        match e {
            Entry::Zero => json!(0),
            Entry::Free { lo, hi } if (*lo, *hi) == Entry::DEFAULT_RANGE => json!("free"),
            Entry::Free { lo, hi } => json!({ "range": [lo, hi] }),
            Entry::Derived(t) => json!({ "derived": t }),
        }
    }

    fn entry_from_json(v: &Value) -> Result<Entry> {
        match v {
            Value::Number(x) if x.as_f64() == Some(0.0) => Ok(Entry::Zero),
            Value::String(s) if s == "free" => Ok(Entry::free()),
            Value::Object(o) if o.contains_key("range") => {
                let r: [f64; 2] = serde_json::from_value(o["range"].clone())?;
                if r[0] > r[1] {
                    return Err(Error::InvalidInput(format!("empty range [{}, {}]", r[0], r[1])));
                }
                Ok(Entry::Free { lo: r[0], hi: r[1] })
            }
            Value::Object(o) if o.contains_key("derived") => Ok(Entry::Derived(serde_json::from_value(o["derived"].clone())?)),
            other => Err(Error::InvalidInput(format!("unrecognized pattern entry {other}"))),
        }
    }

    fn pattern_to_json(p: &Pattern) -> Value {
        Value::Array((0..p.rows).map(|i| Value::Array((0..p.cols).map(|j| entry_to_json(p.get(i, j))).collect())).collect())
    }

    fn pattern_from_json(v: Option<&Value>, rows: usize, cols: usize, name: &str) -> Result<Pattern> {
        let Some(v) = v else {
            return Ok(Pattern::zeros(rows, cols));
        };
        let arr = v.as_array().ok_or_else(|| Error::InvalidInput(format!("{name} must be an array of rows")))?;
        if arr.len() != rows {
            return Err(Error::DimensionMismatch(format!("{name} must have {rows} rows")));
        }
        let mut p = Pattern::zeros(rows, cols);
        for (i, row) in arr.iter().enumerate() {
            let row = row.as_array().filter(|r| r.len() == cols).ok_or_else(|| Error::DimensionMismatch(format!("{name} row {i} must have {cols} entries")))?;
            for (j, e) in row.iter().enumerate() {
                p.set(i, j, entry_from_json(e)?);
            }
        }
        Ok(p)
    }

    impl StructuredSystem {
        pub fn to_json(&self) -> Value {
            json!({
                "E_pattern": pattern_to_json(&self.e),
                "A_pattern": pattern_to_json(&self.a),
                "B_pattern": pattern_to_json(&self.b),
                "C_pattern": pattern_to_json(&self.c),
                "D_pattern": pattern_to_json(&self.d),
            })
        }

        pub fn from_json(v: &Value) -> Result<Self> {
            let rows_of = |k: &str| v.get(k).and_then(|x| x.as_array()).map(|a| a.len());
            let cols_of = |k: &str| v.get(k).and_then(|x| x.as_array()).and_then(|a| a.first()).and_then(|r| r.as_array()).map(|r| r.len());
            let n = rows_of("A_pattern").ok_or_else(|| Error::InvalidInput("A_pattern is required".into()))?;
            let m = cols_of("B_pattern").or_else(|| cols_of("D_pattern")).unwrap_or(0);
            let p = rows_of("C_pattern").unwrap_or(0);
            Self::new(
                pattern_from_json(v.get("E_pattern"), n, n, "E_pattern")?,
                pattern_from_json(v.get("A_pattern"), n, n, "A_pattern")?,
                pattern_from_json(v.get("B_pattern"), n, m, "B_pattern")?,
                pattern_from_json(v.get("C_pattern"), p, n, "C_pattern")?,
                pattern_from_json(v.get("D_pattern"), p, m, "D_pattern")?,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_diag(n: usize) -> Pattern {
        let mut p = Pattern::zeros(n, n);
        for i in 0..n {
            p.set(i, i, Entry::free());
        }
        p
    }

    #[test]
    fn zero_patterns_give_edgeless_graph() {
        let s = StructuredSystem::new(Pattern::zeros(2, 2), Pattern::zeros(2, 2), Pattern::zeros(2, 1), Pattern::zeros(1, 2), Pattern::zeros(1, 1)).unwrap();
        let g = build_digraph(&s);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(max_linking_size(&g), 0);
        let sys = sample_realization(&s, 3).unwrap();
        assert_eq!(sys.a, Mat::zeros(2, 2));
    }

    #[test]
    fn feedthrough_edge_and_single_path() {
        let mut d = Pattern::zeros(1, 1);
        d.set(0, 0, Entry::free());
        let s = StructuredSystem::new(free_diag(1), Pattern::zeros(1, 1), Pattern::zeros(1, 1), Pattern::zeros(1, 1), d).unwrap();
        let g = build_digraph(&s);
        assert!(g.has_edge(0, 2));
        let li = structurally_left_invertible(&s).unwrap();
        assert!(li.left_invertible);
        assert_eq!(li.linking.paths, vec![vec![0, 2]]);
    }

    #[test]
    fn zero_row_is_degenerate() {
        let mut a = free_diag(2);
        a.set(1, 1, Entry::Zero);
        let s = StructuredSystem::new(Pattern::zeros(2, 2), a, Pattern::zeros(2, 0), Pattern::zeros(0, 2), Pattern::zeros(0, 0)).unwrap();
        assert!(!structurally_nondegenerate(&s));
        assert!(matches!(structurally_left_invertible(&s), Err(Error::DegeneratePencil)));
        let s2 = StructuredSystem::new(free_diag(2), Pattern::zeros(2, 2), Pattern::zeros(2, 0), Pattern::zeros(0, 2), Pattern::zeros(0, 0)).unwrap();
        assert!(structurally_nondegenerate(&s2));
    }

    #[test]
    fn derived_entries_follow_ties() {
        let mut a = Pattern::zeros(2, 2);
        a.set(0, 1, Entry::Free { lo: 1.0, hi: 2.0 });
        a.set(1, 0, Entry::Derived(vec![DerivedTerm { coef: 1.0, matrix: Which::A, i: 0, j: 1 }]));
        a.set(0, 0, Entry::Derived(vec![DerivedTerm { coef: -1.0, matrix: Which::A, i: 0, j: 1 }]));
        a.set(1, 1, Entry::Derived(vec![DerivedTerm { coef: -1.0, matrix: Which::A, i: 1, j: 0 }]));
        let s = StructuredSystem::new(free_diag(2), a, Pattern::zeros(2, 0), Pattern::zeros(0, 2), Pattern::zeros(0, 0)).unwrap();
        let r1 = sample_realization(&s, 1).unwrap();
        let r2 = sample_realization(&s, 2).unwrap();
        assert_eq!(r1.a[(0, 1)], r1.a[(1, 0)]);
        assert!((r1.a.row_sum()).norm() < 1e-15);
        assert_ne!(r1.a, r2.a);
        assert_eq!(s.free_count(), 3);
        let back = StructuredSystem::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn cut_certificate_on_bottleneck() {
        // two inputs funnel through vertex 2 to two outputs
        let g = SystemDigraph::from_edges(5, &[(0, 2), (1, 2), (2, 3), (2, 4)]);
        let r = max_linking(&g, &[0, 1], &[3, 4]);
        assert_eq!(r.linking.size(), 1);
        assert_eq!(r.cut, vec![2]);
    }
}
