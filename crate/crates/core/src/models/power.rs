//! Linearized structure-preserving power network models.
//!
//! States are ordered `(δ, ω, θ)`: rotor angles and frequencies of the `g`
//! generators followed by the `m` bus voltage angles. With the susceptance
//! Laplacian `ℒ` over generator internal nodes and buses,
//!
//! ```text
//! E = blkdiag(I, M, 0)    A = −[[0, −I, 0], [ℒ_gg, D, ℒ_gl], [ℒ_lg, 0, ℒ_ll]]
//! ```

use crate::descriptor::{canonical_attack_form, DescriptorSystem, Labels};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::structural::{DerivedTerm, Entry, Pattern, StructuredSystem, Which};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    /// Inertia.
    #[serde(rename = "M")]
    pub m: f64,
    /// Damping.
    #[serde(rename = "D")]
    pub d: f64,
    /// Transient susceptance of the tie to the terminal bus.
    pub tie_susceptance: f64,
    /// 1-based terminal bus; defaults to the generator's own index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bus: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    /// 1-based bus indices.
    pub i: usize,
    pub j: usize,
    /// Susceptance.
    pub b: f64,
}

/// Measured quantity; all indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measurement {
    State { index: usize },
    RotorAngle { generator: usize },
    Frequency { generator: usize },
    BusAngle { bus: usize },
    /// Real power leaving a bus through its lines.
    Injection { bus: usize },
    /// Real power on a line, measured at `from`.
    Flow { from: usize, to: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementEntry {
    /// Bare 1-based state index.
    Index(usize),
    Detailed {
        #[serde(flatten)]
        measurement: Measurement,
        #[serde(default)]
        protected: bool,
    },
}

impl MeasurementEntry {
    fn parts(&self) -> (Measurement, bool) {
        match self {
            MeasurementEntry::Index(i) => (Measurement::State { index: *i }, false),
            MeasurementEntry::Detailed { measurement, protected } => (measurement.clone(), *protected),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerNetworkSpec {
    pub generators: Vec<Generator>,
    /// Bus count; defaults to the largest bus index referenced.
    #[serde(default)]
    pub buses: Option<usize>,
    pub lines: Vec<Line>,
    #[serde(default)]
    pub measurements: Vec<MeasurementEntry>,
}

/// Built power network model.
#[derive(Clone, Debug)]
pub struct PowerModel {
    /// Canonical attack form `B = [I 0]`, `D = [0 I]`.
    pub system: DescriptorSystem,
    /// Pattern of `(E, A, C)` with all `n + p` channels as inputs.
    pub pattern: StructuredSystem,
    /// Laplacian over generator nodes followed by buses.
    pub laplacian: Mat,
    /// 1-based output indices that cannot be attacked.
    pub protected_outputs: Vec<usize>,
    pub generators: usize,
    pub buses: usize,
}

impl PowerNetworkSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn bus_count(&self) -> usize {
        self.buses.unwrap_or_else(|| {
            let lines = self.lines.iter().map(|l| l.i.max(l.j));
            let ties = self.generators.iter().enumerate().map(|(k, g)| g.bus.unwrap_or(k + 1));
            lines.chain(ties).max().unwrap_or(0)
        })
    }

    fn terminal(&self, k: usize) -> usize {
        self.generators[k].bus.unwrap_or(k + 1)
    }

    /// Weighted edges over nodes `0..g` (generators) and `g..g+m` (buses).
    fn edges(&self) -> Result<Vec<(usize, usize, f64)>> {
        let g = self.generators.len();
        let m = self.bus_count();
        let mut out = Vec::new();
        for (k, gen) in self.generators.iter().enumerate() {
            if !(gen.m > 0.0) {
                return Err(Error::NonpositiveInertia(k + 1));
            }
            if !(gen.d >= 0.0) || !gen.d.is_finite() {
                return Err(Error::InvalidInput(format!("generator {} has negative damping", k + 1)));
            }
            if !(gen.tie_susceptance > 0.0) {
                return Err(Error::InvalidInput(format!("generator {} needs a positive tie susceptance", k + 1)));
            }
            let bus = self.terminal(k);
            if bus == 0 || bus > m {
                return Err(Error::IndexOutOfRange { index: bus, max: m });
            }
            out.push((k, g + bus - 1, gen.tie_susceptance));
        }
        for l in &self.lines {
            for b in [l.i, l.j] {
                if b == 0 || b > m {
                    return Err(Error::IndexOutOfRange { index: b, max: m });
                }
            }
            if l.i == l.j || !(l.b > 0.0) {
                return Err(Error::InvalidInput(format!("line {}-{} must join distinct buses with positive susceptance", l.i, l.j)));
            }
            out.push((g + l.i - 1, g + l.j - 1, l.b));
        }
        Ok(out)
    }
}

fn connected(nodes: usize, edges: &[(usize, usize, f64)]) -> bool {
    if nodes == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); nodes];
    for &(a, b, _) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; nodes];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Laplacian of a weighted undirected graph; parallel edges add up.
pub fn laplacian(nodes: usize, edges: &[(usize, usize, f64)]) -> Mat {
    let mut l = Mat::zeros(nodes, nodes);
    for &(a, b, w) in edges {
        l[(a, b)] -= w;
        l[(b, a)] -= w;
        l[(a, a)] += w;
        l[(b, b)] += w;
    }
    l
}

/// Descriptor matrices `(E, A)` from inertias, dampings and a Laplacian.
pub fn swing_matrices(m: &[f64], d: &[f64], lap: &Mat) -> (Mat, Mat) {
    let g = m.len();
    let nodes = lap.nrows();
    let buses = nodes - g;
    let n = 2 * g + buses;
    let mut e = Mat::zeros(n, n);
    let mut a = Mat::zeros(n, n);
    for k in 0..g {
        e[(k, k)] = 1.0;
        e[(g + k, g + k)] = m[k];
        a[(k, g + k)] = 1.0;
        a[(g + k, g + k)] = -d[k];
    }
    for u in 0..nodes {
        for v in 0..nodes {
            a[(row_of(g, u), col_of(g, v))] -= lap[(u, v)];
        }
    }
    (e, a)
}

/// Row of `A` holding the balance of Laplacian node `u`: `ω` rows for
/// generators, `θ` rows for buses.
fn row_of(g: usize, u: usize) -> usize {
    g + u
}

/// Column of `A` holding the angle of Laplacian node `v`: `δ` columns for
/// generators, `θ` columns for buses.
fn col_of(g: usize, v: usize) -> usize {
    if v < g {
        v
    } else {
        g + v
    }
}

/// 1-based output row for one measurement.
fn measurement_row(spec: &PowerNetworkSpec, meas: &Measurement, n: usize) -> Result<(Vec<f64>, String)> {
    let g = spec.generators.len();
    let m = spec.bus_count();
    let mut row = vec![0.0; n];
    let check = |i: usize, max: usize| if i == 0 || i > max { Err(Error::IndexOutOfRange { index: i, max }) } else { Ok(()) };
    let theta = |b: usize| 2 * g + b - 1;
    let label = match meas {
        Measurement::State { index } => {
            check(*index, n)?;
            row[index - 1] = 1.0;
            format!("x{index}")
        }
        Measurement::RotorAngle { generator } => {
            check(*generator, g)?;
            row[generator - 1] = 1.0;
            format!("delta_{generator}")
        }
        Measurement::Frequency { generator } => {
            check(*generator, g)?;
            row[g + generator - 1] = 1.0;
            format!("omega_{generator}")
        }
        Measurement::BusAngle { bus } => {
            check(*bus, m)?;
            row[theta(*bus)] = 1.0;
            format!("theta_{bus}")
        }
        Measurement::Injection { bus } => {
            check(*bus, m)?;
            for l in &spec.lines {
                if l.i == *bus || l.j == *bus {
                    let other = if l.i == *bus { l.j } else { l.i };
                    row[theta(*bus)] += l.b;
                    row[theta(other)] -= l.b;
                }
            }
            format!("P_{bus}")
        }
        Measurement::Flow { from, to } => {
            check(*from, m)?;
            check(*to, m)?;
            let b: f64 = spec.lines.iter().filter(|l| (l.i, l.j) == (*from, *to) || (l.i, l.j) == (*to, *from)).map(|l| l.b).sum();
            if b == 0.0 {
                return Err(Error::InvalidInput(format!("no line between buses {from} and {to}")));
            }
            row[theta(*from)] += b;
            row[theta(*to)] -= b;
            format!("P_{from}_{to}")
        }
    };
    Ok((row, label))
}

/// Builds the descriptor model and its sparsity pattern.
pub fn build_power_descriptor(spec: &PowerNetworkSpec) -> Result<PowerModel> {
    let g = spec.generators.len();
    let buses = spec.bus_count();
    let nodes = g + buses;
    let edges = spec.edges()?;
    if !connected(nodes, &edges) {
        return Err(Error::DisconnectedGraph);
    }
    let lap = laplacian(nodes, &edges);
    let ms: Vec<f64> = spec.generators.iter().map(|x| x.m).collect();
    let ds: Vec<f64> = spec.generators.iter().map(|x| x.d).collect();
    let (e, a) = swing_matrices(&ms, &ds, &lap);
    let n = 2 * g + buses;

    let mut rows = Vec::new();
    let mut out_labels = Vec::new();
    let mut protected = Vec::new();
    for (i, entry) in spec.measurements.iter().enumerate() {
        let (meas, prot) = entry.parts();
        let (row, label) = measurement_row(spec, &meas, n)?;
        rows.extend(row);
        out_labels.push(label);
        if prot {
            protected.push(i + 1);
        }
    }
    let c = Mat::from_row_slice(spec.measurements.len(), n, &rows);
    let mut states = Vec::with_capacity(n);
    states.extend((1..=g).map(|k| format!("delta_{k}")));
    states.extend((1..=g).map(|k| format!("omega_{k}")));
    states.extend((1..=buses).map(|b| format!("theta_{b}")));
    let system = canonical_attack_form(e, a, c.clone())?.with_labels(Labels { states, outputs: out_labels });
    let pattern = power_pattern(spec, &edges, &system)?;
    Ok(PowerModel { system, pattern, laplacian: lap, protected_outputs: protected, generators: g, buses })
}

fn range_around(v: f64) -> Entry {
    let (a, b) = (0.5 * v, 1.5 * v);
    Entry::Free { lo: a.min(b), hi: a.max(b) }
}

/// Pattern with ±50% ranges on inertias, dampings and susceptances, unit
/// entries fixed, Laplacian symmetry and zero row sums tied by derived
/// entries.
fn power_pattern(spec: &PowerNetworkSpec, edges: &[(usize, usize, f64)], sys: &DescriptorSystem) -> Result<StructuredSystem> {
    let g = spec.generators.len();
    let n = sys.n();
    let mut e = Pattern::zeros(n, n);
    let mut a = Pattern::zeros(n, n);
    for (k, gen) in spec.generators.iter().enumerate() {
        e.set(k, k, Entry::Free { lo: 1.0, hi: 1.0 });
        e.set(g + k, g + k, range_around(gen.m));
        a.set(k, g + k, Entry::Free { lo: 1.0, hi: 1.0 });
        if gen.d > 0.0 {
            a.set(g + k, g + k, range_around(-gen.d));
        }
    }
    let nodes = g + spec.bus_count();
    let mut merged = std::collections::BTreeMap::new();
    for &(u, v, w) in edges {
        *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
    }
    let mut off: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    for (&(u, v), &w) in &merged {
        let (ru, cv) = (row_of(g, u), col_of(g, v));
        let (rv, cu) = (row_of(g, v), col_of(g, u));
        a.set(ru, cv, range_around(w));
        a.set(rv, cu, Entry::Derived(vec![DerivedTerm { coef: 1.0, matrix: Which::A, i: ru, j: cv }]));
        off[u].push((ru, cv));
        off[v].push((rv, cu));
    }
    for u in 0..nodes {
        let (r, c) = (row_of(g, u), col_of(g, u));
        let terms = off[u].iter().map(|&(i, j)| DerivedTerm { coef: -1.0, matrix: Which::A, i, j }).collect();
        let prev = a.get(r, c).clone();
        match prev {
            Entry::Zero => a.set(r, c, Entry::Derived(terms)),
            _ => return Err(Error::InvalidInput("generator damping row collides with Laplacian diagonal".into())),
        }
    }
    let b = Pattern::from_numeric(&sys.b);
    let c = Pattern::from_numeric(&sys.c);
    let d = Pattern::from_numeric(&sys.d);
    StructuredSystem::new(e, a, b, c, d)
}

/// Generator inertias of the WSSC 3-machine system.
pub const WSSC_INERTIA: [f64; 3] = [0.125, 0.034, 0.016];
/// Generator dampings of the WSSC 3-machine system.
pub const WSSC_DAMPING: [f64; 3] = [0.125, 0.068, 0.048];
/// Attacked states: voltage angles of buses b4 and b5.
pub const WSSC_ATTACK: [usize; 2] = [10, 11];

/// WSSC 3-machine 6-bus network with its published susceptances.
pub fn wssc_spec(measured_states: &[usize]) -> PowerNetworkSpec {
    let gen = |k: usize, b: f64| Generator { m: WSSC_INERTIA[k], d: WSSC_DAMPING[k], tie_susceptance: b, bus: Some(k + 1) };
    let line = |i, j, b| Line { i, j, b };
    PowerNetworkSpec {
        generators: vec![gen(0, 0.058), gen(1, 0.063), gen(2, 0.059)],
        buses: Some(6),
        lines: vec![line(1, 4, 0.085), line(1, 5, 0.092), line(2, 4, 0.161), line(2, 6, 0.072), line(3, 5, 0.170), line(3, 6, 0.101)],
        measurements: measured_states.iter().map(|&i| MeasurementEntry::Index(i)).collect(),
    }
}

/// The WSSC laplacian as printed (generators 1–3, buses 1–6).
pub fn wssc_laplacian() -> Mat {
    #[rustfmt::skip]
    let l = [
        0.058, 0.0, 0.0, -0.058, 0.0, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.063, 0.0, 0.0, -0.063, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.059, 0.0, 0.0, -0.059, 0.0, 0.0, 0.0,
        -0.058, 0.0, 0.0, 0.235, 0.0, 0.0, -0.085, -0.092, 0.0,
        0.0, -0.063, 0.0, 0.0, 0.296, 0.0, -0.161, 0.0, -0.072,
        0.0, 0.0, -0.059, 0.0, 0.0, 0.330, 0.0, -0.170, -0.101,
        0.0, 0.0, 0.0, -0.085, -0.161, 0.0, 0.246, 0.0, 0.0,
        0.0, 0.0, 0.0, -0.092, 0.0, -0.170, 0.0, 0.262, 0.0,
        0.0, 0.0, 0.0, 0.0, -0.072, -0.101, 0.0, 0.0, 0.173,
    ];
    Mat::from_row_slice(9, 9, &l)
}

/// WSSC model in canonical attack form measuring the given 1-based states,
/// built from the printed Laplacian.
pub fn wssc_demo(measured_states: &[usize]) -> Result<DescriptorSystem> {
    let (e, a) = swing_matrices(&WSSC_INERTIA, &WSSC_DAMPING, &wssc_laplacian());
    let mut c = Mat::zeros(measured_states.len(), 12);
    for (r, &i) in measured_states.iter().enumerate() {
        if i == 0 || i > 12 {
            return Err(Error::IndexOutOfRange { index: i, max: 12 });
        }
        c[(r, i - 1)] = 1.0;
    }
    let model = build_power_descriptor(&wssc_spec(measured_states))?;
    let mut sys = canonical_attack_form(e, a, c)?;
    sys.labels = model.system.labels;
    Ok(sys)
}

/// IEEE 14-bus data file layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridData {
    pub name: String,
    #[serde(default)]
    pub note: String,
    pub buses: usize,
    /// `[from, to, reactance]` per branch.
    pub branches: Vec<(usize, usize, f64)>,
    pub generators: Vec<GridGenerator>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGenerator {
    pub bus: usize,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// Transient reactance.
    pub xd_prime: f64,
}

/// Bundled IEEE 14-bus data.
pub const IEEE14_JSON: &str = include_str!("../../data/ieee14.json");

impl GridData {
    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|_| Error::MissingDataFile(path.display().to_string()))?;
        Ok(serde_json::from_str(&s)?)
    }

    /// Spec measuring every bus injection, both ends of every branch flow
    /// and the rotor angle of generator `rotor`, which is protected.
    pub fn measured_spec(&self, rotor: usize) -> PowerNetworkSpec {
        let generators = self
            .generators
            .iter()
            .map(|g| Generator { m: g.m, d: g.d, tie_susceptance: 1.0 / g.xd_prime, bus: Some(g.bus) })
            .collect();
        let lines = self.branches.iter().map(|&(i, j, x)| Line { i, j, b: 1.0 / x }).collect();
        let mut measurements: Vec<MeasurementEntry> = (1..=self.buses)
            .map(|bus| MeasurementEntry::Detailed { measurement: Measurement::Injection { bus }, protected: false })
            .collect();
        for &(i, j, _) in &self.branches {
            measurements.push(MeasurementEntry::Detailed { measurement: Measurement::Flow { from: i, to: j }, protected: false });
            measurements.push(MeasurementEntry::Detailed { measurement: Measurement::Flow { from: j, to: i }, protected: false });
        }
        measurements.push(MeasurementEntry::Detailed { measurement: Measurement::RotorAngle { generator: rotor }, protected: true });
        PowerNetworkSpec { generators, buses: Some(self.buses), lines, measurements }
    }
}

/// IEEE 14-bus model from the bundled data file or from `path`.
pub fn ieee14_demo(path: Option<&Path>) -> Result<PowerModel> {
    let data: GridData = match path {
        Some(p) => GridData::load(p)?,
        None => serde_json::from_str(IEEE14_JSON)?,
    };
    build_power_descriptor(&data.measured_spec(1))
}
