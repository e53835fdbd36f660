//! Linearized hydraulics of municipal water networks.
//!
//! Node heads are the states; reservoirs keep a constant head (`ḣ = 0`),
//! tanks integrate their net inflow and junctions balance it. Pumps and
//! valves impose a head difference, so their flows become algebraic states.
//! Pipe flows follow Hazen-Williams and are linearized around a steady state.

use crate::descriptor::{canonical_attack_form, partition_index_one, DescriptorSystem, Labels};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use serde::{Deserialize, Serialize};

/// Hazen-Williams flow exponent `1/1.85`.
pub const HW_EXPONENT: f64 = 1.0 / 1.85;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WaterNode {
    Reservoir {
        #[serde(default)]
        name: Option<String>,
        head: f64,
    },
    Junction {
        #[serde(default)]
        name: Option<String>,
        demand: f64,
    },
    Tank {
        #[serde(default)]
        name: Option<String>,
        area: f64,
    },
}

impl WaterNode {
    fn name(&self) -> Option<&str> {
        match self {
            WaterNode::Reservoir { name, .. } | WaterNode::Junction { name, .. } | WaterNode::Tank { name, .. } => name.as_deref(),
        }
    }
}

/// Edges between 1-based node indices, oriented `from → to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WaterEdge {
    Pipe {
        from: usize,
        to: usize,
        conductance: f64,
        /// Head drop `h_from − h_to` at the operating point.
        #[serde(default)]
        operating_drop: Option<f64>,
    },
    /// `h_to − h_from = boost`.
    Pump { from: usize, to: usize, boost: f64 },
    /// `h_to − h_from = −drop`.
    Valve { from: usize, to: usize, drop: f64 },
}

impl WaterEdge {
    fn ends(&self) -> (usize, usize) {
        match *self {
            WaterEdge::Pipe { from, to, .. } | WaterEdge::Pump { from, to, .. } | WaterEdge::Valve { from, to, .. } => (from, to),
        }
    }

    /// Imposed `h_to − h_from` for pumps and valves.
    fn head_gain(&self) -> Option<f64> {
        match *self {
            WaterEdge::Pipe { .. } => None,
            WaterEdge::Pump { boost, .. } => Some(boost),
            WaterEdge::Valve { drop, .. } => Some(-drop),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaterSensor {
    /// Pressure head at a node.
    Head { node: usize },
    /// Flow along an edge.
    Flow { edge: usize },
}

/// Where the reservoir theft acts: the drained reservoir (state), the
/// junction feeding the control pump (state) and the reservoir's pressure
/// sensor (output). All 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheftSites {
    pub reservoir: usize,
    pub pump_junction: usize,
    pub sensor: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaterNetworkSpec {
    pub nodes: Vec<WaterNode>,
    pub edges: Vec<WaterEdge>,
    pub sensors: Vec<WaterSensor>,
    /// Node heads at the operating point; solved for when absent.
    #[serde(default)]
    pub steady_state: Option<Vec<f64>>,
    #[serde(default)]
    pub theft: Option<TheftSites>,
}

#[derive(Clone, Debug)]
pub struct WaterModel {
    pub system: DescriptorSystem,
    /// Operating-point heads.
    pub heads: Vec<f64>,
    /// Linearized conductance `c` per edge (zero for pumps and valves).
    pub slopes: Vec<f64>,
    /// Conductance-weighted Laplacian of the pipe graph.
    pub flow_laplacian: Mat,
    pub theft: Option<TheftSites>,
}

/// `Q(Δh) = g |Δh|^{1/1.85 − 1} Δh`.
pub fn hazen_williams_flow(g: f64, dh: f64) -> f64 {
    g * dh.abs().powf(HW_EXPONENT - 1.0) * dh
}

/// `dQ/dΔh = g/1.85 · |Δh|^{1/1.85 − 1}`.
pub fn hazen_williams_slope(g: f64, dh: f64) -> f64 {
    g * HW_EXPONENT * dh.abs().powf(HW_EXPONENT - 1.0)
}

fn validate(spec: &WaterNetworkSpec) -> Result<()> {
    let nn = spec.nodes.len();
    if nn == 0 {
        return Err(Error::InvalidInput("water network has no nodes".into()));
    }
    for (i, node) in spec.nodes.iter().enumerate() {
        if let WaterNode::Tank { area, .. } = node {
            if !(*area > 0.0) {
                return Err(Error::InvalidInput(format!("tank {} must have a positive area", i + 1)));
            }
        }
    }
    for (e, edge) in spec.edges.iter().enumerate() {
        let (a, b) = edge.ends();
        if a == 0 || a > nn || b == 0 || b > nn || a == b {
            return Err(Error::InvalidInput(format!("edge {} has invalid end nodes", e + 1)));
        }
        if let WaterEdge::Pipe { conductance, .. } = edge {
            if !(*conductance > 0.0) {
                return Err(Error::InvalidInput(format!("pipe {} must have a positive conductance", e + 1)));
            }
        }
    }
    for s in &spec.sensors {
        match *s {
            WaterSensor::Head { node } if node == 0 || node > nn => {
                return Err(Error::IndexOutOfRange { index: node, max: nn });
            }
            WaterSensor::Flow { edge } if edge == 0 || edge > spec.edges.len() => {
                return Err(Error::IndexOutOfRange { index: edge, max: spec.edges.len() });
            }
            _ => {}
        }
    }
    let mut parent: Vec<usize> = (0..nn).collect();
    fn root(p: &mut Vec<usize>, mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for e in &spec.edges {
        let (a, b) = e.ends();
        let (ra, rb) = (root(&mut parent, a - 1), root(&mut parent, b - 1));
        parent[ra] = rb;
    }
    let r0 = root(&mut parent, 0);
    if (1..nn).any(|i| root(&mut parent, i) != r0) {
        return Err(Error::DisconnectedGraph);
    }
    Ok(())
}

/// Solves the nonlinear steady state (tank inflows balanced) by damped
/// Newton with a smoothing continuation of the Hazen-Williams law at zero
/// drop. Returns the node heads.
pub fn solve_steady_state(spec: &WaterNetworkSpec) -> Result<Vec<f64>> {
    validate(spec)?;
    let nn = spec.nodes.len();
    let active: Vec<usize> = (0..spec.edges.len()).filter(|&e| spec.edges[e].head_gain().is_some()).collect();
    let nv = nn + active.len();
    let reservoir_mean = {
        let hs: Vec<f64> = spec.nodes.iter().filter_map(|n| if let WaterNode::Reservoir { head, .. } = n { Some(*head) } else { None }).collect();
        if hs.is_empty() {
            return Err(Error::PreconditionUnmet("a steady state needs at least one reservoir".into()));
        }
        hs.iter().sum::<f64>() / hs.len() as f64
    };
    let mut z = Vector::zeros(nv);
    for i in 0..nn {
        z[i] = reservoir_mean;
    }
    let residual = |z: &Vector, eps: f64| -> (Vector, Mat) {
        let mut f = Vector::zeros(nv);
        let mut jac = Mat::zeros(nv, nv);
        for (i, node) in spec.nodes.iter().enumerate() {
            match node {
                WaterNode::Reservoir { head, .. } => {
                    f[i] = z[i] - head;
                    jac[(i, i)] = 1.0;
                }
                WaterNode::Junction { demand, .. } => f[i] = -demand,
                WaterNode::Tank { .. } => {}
            }
        }
        let mut slot = 0;
        for edge in &spec.edges {
            let (a, b) = edge.ends();
            let (a, b) = (a - 1, b - 1);
            match edge {
                WaterEdge::Pipe { conductance, .. } => {
                    let dh = z[a] - z[b];
                    let r = (dh * dh + eps * eps).sqrt();
                    let q = conductance * r.powf(HW_EXPONENT - 1.0) * dh;
                    let dq = conductance * r.powf(HW_EXPONENT - 3.0) * (HW_EXPONENT * dh * dh + eps * eps);
                    for (node, sgn) in [(a, -1.0), (b, 1.0)] {
                        if !matches!(spec.nodes[node], WaterNode::Reservoir { .. }) {
                            f[node] += sgn * q;
                            jac[(node, a)] += sgn * dq;
                            jac[(node, b)] -= sgn * dq;
                        }
                    }
                }
                _ => {
                    let gain = edge.head_gain().expect("pump or valve");
                    let row = nn + slot;
                    let qi = nn + slot;
                    f[row] = z[b] - z[a] - gain;
                    jac[(row, b)] += 1.0;
                    jac[(row, a)] -= 1.0;
                    for (node, sgn) in [(a, -1.0), (b, 1.0)] {
                        if !matches!(spec.nodes[node], WaterNode::Reservoir { .. }) {
                            f[node] += sgn * z[qi];
                            jac[(node, qi)] += sgn;
                        }
                    }
                    slot += 1;
                }
            }
        }
        (f, jac)
    };
    let mut eps = 1.0;
    loop {
        for _ in 0..200 {
            let (f, jac) = residual(&z, eps);
            let fn0 = f.norm();
            if fn0 < 1e-13 * (1.0 + reservoir_mean.abs()) {
                break;
            }
            let step = jac.lu().solve(&(-&f)).ok_or_else(|| Error::PreconditionUnmet("singular hydraulic Jacobian".into()))?;
            let mut lambda = 1.0;
            loop {
                let trial = &z + &step * lambda;
                if residual(&trial, eps).0.norm() < (1.0 - 1e-4 * lambda) * fn0 || lambda < 1e-10 {
                    z = trial;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if eps < 1e-10 {
            break;
        }
        eps *= 0.1;
    }
    if residual(&z, 0.0).0.norm() > 1e-8 * (1.0 + reservoir_mean.abs()) {
        return Err(Error::PreconditionUnmet("the hydraulic steady state did not converge".into()));
    }
    Ok(z.rows(0, nn).iter().copied().collect())
}

pub fn build_water_descriptor(spec: &WaterNetworkSpec) -> Result<WaterModel> {
    validate(spec)?;
    let nn = spec.nodes.len();
    let needs_heads = spec.edges.iter().any(|e| matches!(e, WaterEdge::Pipe { operating_drop: None, .. }));
    let heads = match &spec.steady_state {
        Some(h) if h.len() == nn => h.clone(),
        Some(_) => return Err(Error::DimensionMismatch(format!("steady state must have {nn} heads"))),
        None if needs_heads => solve_steady_state(spec)?,
        None => vec![0.0; nn],
    };
    let active: Vec<usize> = (0..spec.edges.len()).filter(|&e| spec.edges[e].head_gain().is_some()).collect();
    let n = nn + active.len();
    let mut e = Mat::zeros(n, n);
    let mut a = Mat::zeros(n, n);
    let mut lap = Mat::zeros(nn, nn);
    let mut slopes = vec![0.0; spec.edges.len()];
    for (i, node) in spec.nodes.iter().enumerate() {
        match node {
            WaterNode::Reservoir { .. } => e[(i, i)] = 1.0,
            WaterNode::Tank { area, .. } => e[(i, i)] = *area,
            WaterNode::Junction { .. } => {}
        }
    }
    let balances = |node: usize| !matches!(spec.nodes[node], WaterNode::Reservoir { .. });
    let mut slot = 0;
    for (k, edge) in spec.edges.iter().enumerate() {
        let (from, to) = edge.ends();
        let (i, j) = (from - 1, to - 1);
        match edge {
            WaterEdge::Pipe { conductance, operating_drop, .. } => {
                let dh = operating_drop.unwrap_or(heads[i] - heads[j]);
                if dh.abs() < 1e-9 {
                    return Err(Error::ZeroOperatingDrop(k + 1));
                }
                let c = hazen_williams_slope(*conductance, dh);
                slopes[k] = c;
                lap[(i, i)] += c;
                lap[(j, j)] += c;
                lap[(i, j)] -= c;
                lap[(j, i)] -= c;
                // δQ = c (δh_i − δh_j) leaves i and enters j
                if balances(i) {
                    a[(i, i)] -= c;
                    a[(i, j)] += c;
                }
                if balances(j) {
                    a[(j, j)] -= c;
                    a[(j, i)] += c;
                }
            }
            _ => {
                let q = nn + slot;
                a[(q, j)] = 1.0;
                a[(q, i)] = -1.0;
                if balances(i) {
                    a[(i, q)] -= 1.0;
                }
                if balances(j) {
                    a[(j, q)] += 1.0;
                }
                slot += 1;
            }
        }
    }
    let mut c = Mat::zeros(spec.sensors.len(), n);
    for (r, s) in spec.sensors.iter().enumerate() {
        match *s {
            WaterSensor::Head { node } => c[(r, node - 1)] = 1.0,
            WaterSensor::Flow { edge } => {
                let (from, to) = spec.edges[edge - 1].ends();
                match spec.edges[edge - 1] {
                    WaterEdge::Pipe { .. } => {
                        c[(r, from - 1)] = slopes[edge - 1];
                        c[(r, to - 1)] = -slopes[edge - 1];
                    }
                    _ => {
                        let q = nn + active.iter().position(|&x| x == edge - 1).expect("active edge");
                        c[(r, q)] = 1.0;
                    }
                }
            }
        }
    }
    let states: Vec<String> = spec
        .nodes
        .iter()
        .enumerate()
        .map(|(i, nd)| format!("h_{}", nd.name().map(str::to_string).unwrap_or_else(|| (i + 1).to_string())))
        .chain(active.iter().map(|k| format!("q_{}", k + 1)))
        .collect();
    let outputs: Vec<String> = spec
        .sensors
        .iter()
        .map(|s| match *s {
            WaterSensor::Head { node } => format!("head_{}", spec.nodes[node - 1].name().map(str::to_string).unwrap_or_else(|| node.to_string())),
            WaterSensor::Flow { edge } => format!("flow_{edge}"),
        })
        .collect();
    let sys = canonical_attack_form(e, a, c)?.with_labels(Labels { states, outputs });
    partition_index_one(&sys)?;
    if let Some(t) = spec.theft {
        if t.reservoir == 0 || t.reservoir > nn || t.pump_junction == 0 || t.pump_junction > nn || t.sensor == 0 || t.sensor > spec.sensors.len() {
            return Err(Error::ModelShapeMismatch("theft sites out of range".into()));
        }
    }
    Ok(WaterModel { system: sys, heads, slopes, flow_laplacian: lap, theft: spec.theft })
}

/// Eight-node network with the reservoir theft structure: reservoir R2
/// feeds the junction P2 of a control pump through a single pipe and its
/// head is read by sensor S1.
pub fn water_theft_spec() -> WaterNetworkSpec {
    let named = |s: &str| Some(s.to_string());
    WaterNetworkSpec {
        nodes: vec![
            WaterNode::Reservoir { name: named("R2"), head: 100.0 },
            WaterNode::Reservoir { name: named("R1"), head: 80.0 },
            WaterNode::Tank { name: named("T1"), area: 50.0 },
            WaterNode::Tank { name: named("T2"), area: 40.0 },
            WaterNode::Junction { name: named("P2"), demand: 0.0 },
            WaterNode::Junction { name: named("J1"), demand: 0.02 },
            WaterNode::Junction { name: named("J2"), demand: 0.03 },
            WaterNode::Junction { name: named("J3"), demand: 0.02 },
        ],
        edges: vec![
            WaterEdge::Pipe { from: 1, to: 5, conductance: 0.05, operating_drop: None },
            WaterEdge::Pump { from: 5, to: 6, boost: 15.0 },
            WaterEdge::Pump { from: 2, to: 7, boost: 25.0 },
            WaterEdge::Pipe { from: 6, to: 3, conductance: 0.02, operating_drop: None },
            WaterEdge::Pipe { from: 3, to: 8, conductance: 0.02, operating_drop: None },
            WaterEdge::Pipe { from: 7, to: 4, conductance: 0.02, operating_drop: None },
            WaterEdge::Pipe { from: 4, to: 8, conductance: 0.02, operating_drop: None },
            WaterEdge::Pipe { from: 6, to: 7, conductance: 0.01, operating_drop: None },
        ],
        sensors: vec![
            WaterSensor::Head { node: 1 },
            WaterSensor::Head { node: 3 },
            WaterSensor::Head { node: 4 },
            WaterSensor::Head { node: 7 },
            WaterSensor::Head { node: 8 },
        ],
        steady_state: None,
        theft: Some(TheftSites { reservoir: 1, pump_junction: 5, sensor: 1 }),
    }
}

pub fn water_theft_demo() -> Result<WaterModel> {
    build_water_descriptor(&water_theft_spec())
}
