//! Analysis reports, system fingerprints and plot data.

use crate::descriptor::{DescriptorSystem, Labels, SystemFile};
use crate::error::{Error, Result};
use crate::simulate::SimulationTrace;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

pub const TOOL_NAME: &str = "cps-detect";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Dimensions and SHA-256 of the canonical JSON form of a system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub sha256: String,
}

pub fn fingerprint(sys: &DescriptorSystem) -> Fingerprint {
    let json = serde_json::to_string(&SystemFile::from_system(sys)).expect("plain data serializes");
    let digest = Sha256::digest(json.as_bytes());
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").expect("writing to a string");
    }
    Fingerprint { n: sys.n(), m: sys.m(), p: sys.p(), sha256: hex }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportStep {
    pub name: String,
    pub result: Value,
    #[serde(default)]
    pub wall_clock_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<Fingerprint>,
    pub analyses: Vec<String>,
    pub seed: u64,
    pub budget: usize,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub steps: Vec<ReportStep>,
}

impl AnalysisReport {
    pub fn new(sys: Option<&DescriptorSystem>, seed: u64, budget: usize) -> Self {
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            system: sys.map(fingerprint),
            analyses: Vec::new(),
            seed,
            budget,
            tolerances: BTreeMap::new(),
            steps: Vec::new(),
        }
    }

    pub fn tolerance(&mut self, name: &str, value: f64) {
        self.tolerances.insert(name.into(), value);
    }

    pub fn push(&mut self, name: &str, result: Value, elapsed: Duration) {
        if !self.analyses.iter().any(|a| a == name) {
            self.analyses.push(name.into());
        }
        self.steps.push(ReportStep { name: name.into(), result, wall_clock_ms: elapsed.as_secs_f64() * 1e3 });
    }

    /// Runs `f`, timing it, and records its serialized result.
    pub fn run<T: Serialize>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = std::time::Instant::now();
        let out = f()?;
        self.push(name, serde_json::to_value(&out)?, t0.elapsed());
        Ok(out)
    }

    /// Like `run`, but an analysis error becomes the step result. Data errors
    /// still abort.
    pub fn run_recorded(&mut self, name: &str, f: impl FnOnce() -> Result<Value>) -> Result<()> {
        let t0 = std::time::Instant::now();
        let out = match f() {
            Ok(v) => v,
            Err(e) if e.is_analysis() => serde_json::json!({ "error": e.kind(), "message": e.to_string() }),
            Err(e) => return Err(e),
        };
        self.push(name, out, t0.elapsed());
        Ok(())
    }

    /// Copy with every wall-clock field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.steps.iter_mut().for_each(|s| s.wall_clock_ms = 0.0);
        r
    }

    /// Concatenates reports. Fingerprints must agree when present.
    pub fn merge(reports: &[AnalysisReport]) -> Result<Self> {
        let first = reports.first().ok_or_else(|| Error::InvalidInput("nothing to merge".into()))?;
        let mut out = first.clone();
        for r in &reports[1..] {
            match (&out.system, &r.system) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::InvalidInput("reports describe different systems".into()));
                }
                (None, Some(b)) => out.system = Some(b.clone()),
                _ => {}
            }
            for a in &r.analyses {
                if !out.analyses.contains(a) {
                    out.analyses.push(a.clone());
                }
            }
            out.tolerances.extend(r.tolerances.iter().map(|(k, v)| (k.clone(), *v)));
            out.steps.extend(r.steps.iter().cloned());
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Resolves column selections against the trace header. State and output
/// labels are accepted as aliases of `x_i` and `y_i`. An empty selection
/// picks every column.
pub fn select_columns(trace: &SimulationTrace, labels: Option<&Labels>, selections: &[String]) -> Result<Vec<(String, usize)>> {
    let header = trace.header();
    if selections.is_empty() {
        return Ok(header.iter().enumerate().skip(1).map(|(i, h)| (h.clone(), i)).collect());
    }
    selections
        .iter()
        .map(|s| {
            let alias = labels.and_then(|l| {
                l.states
                    .iter()
                    .position(|x| x == s)
                    .map(|i| format!("x_{}", i + 1))
                    .or_else(|| l.outputs.iter().position(|x| x == s).map(|i| format!("y_{}", i + 1)))
            });
            let key = alias.unwrap_or_else(|| s.clone());
            header
                .iter()
                .position(|h| *h == key)
                .filter(|&i| i > 0)
                .map(|i| (s.clone(), i))
                .ok_or_else(|| Error::InvalidInput(format!("unknown trace column {s:?}")))
        })
        .collect()
}

fn row_values(trace: &SimulationTrace, i: usize) -> Vec<f64> {
    let mut row = vec![trace.t[i]];
    row.extend(&trace.x[i]);
    row.extend(&trace.y[i]);
    row.extend(&trace.u[i]);
    row.extend(&trace.w[i]);
    row
}

/// Writes the selected series as CSV and, when asked, a static SVG line plot.
pub fn emit_plot_data(
    trace: &SimulationTrace,
    labels: Option<&Labels>,
    selections: &[String],
    csv_out: &Path,
    svg_out: Option<&Path>,
) -> Result<Vec<String>> {
    let cols = select_columns(trace, labels, selections)?;
    let mut csv = String::from("t");
    for (name, _) in &cols {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(trace.len()); cols.len()];
    for i in 0..trace.len() {
        let row = row_values(trace, i);
        write!(csv, "{}", trace.t[i]).expect("writing to a string");
        for (j, (_, c)) in cols.iter().enumerate() {
            write!(csv, ",{:e}", row[*c]).expect("writing to a string");
            series[j].push(row[*c]);
        }
        csv.push('\n');
    }
    std::fs::write(csv_out, csv)?;
    if let Some(path) = svg_out {
        let names: Vec<String> = cols.iter().map(|c| c.0.clone()).collect();
        std::fs::write(path, render_svg(&trace.t, &names, &series))?;
    }
    Ok(cols.into_iter().map(|c| c.0).collect())
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Minimal line plot with shared axes.
pub fn render_svg(t: &[f64], names: &[String], series: &[Vec<f64>]) -> String {
    let (w, h, pad) = (800.0, 400.0, 50.0);
    let t0 = t.first().copied().unwrap_or(0.0);
    let t1 = t.last().copied().unwrap_or(1.0).max(t0 + f64::MIN_POSITIVE);
    let mut lo = series.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let mut hi = series.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let px = |v: f64| pad + (v - t0) / (t1 - t0) * (w - 2.0 * pad);
    let py = |v: f64| h - pad - (v - lo) / (hi - lo) * (h - 2.0 * pad);
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<polyline points="{pad},{pad} {pad},{} {},{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad
    )
    .unwrap();
    writeln!(s, r#"<text x="{pad}" y="{}" font-size="12">{t0:.3}</text>"#, h - pad + 16.0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{t1:.3}</text>"#, w - pad, h - pad + 16.0).unwrap();
    writeln!(s, r#"<text x="4" y="{pad}" font-size="12">{hi:.3e}</text>"#).unwrap();
    writeln!(s, r#"<text x="4" y="{}" font-size="12">{lo:.3e}</text>"#, h - pad).unwrap();
    let stride = (t.len() / 2000).max(1);
    for (k, (name, ys)) in names.iter().zip(series).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = t
            .iter()
            .zip(ys)
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || *i == t.len() - 1)
            .map(|(_, (tv, yv))| format!("{:.2},{:.2}", px(*tv), py(*yv)))
            .collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" ")).unwrap();
        writeln!(s, r#"<text x="{}" y="{}" font-size="12" fill="{color}">{}</text>"#, w - pad + 4.0, pad + 14.0 * k as f64, xml_escape(name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descriptor::canonical_attack_form;
    use crate::linalg::{Mat, Vector};
    use crate::simulate::simulate;

    #[test]
    fn fingerprint_is_stable_and_content_sensitive() {
        let a = Mat::from_row_slice(1, 1, &[-1.0]);
        let s1 = canonical_attack_form(Mat::identity(1, 1), a.clone(), Mat::identity(1, 1)).unwrap();
        let s2 = canonical_attack_form(Mat::identity(1, 1), a * 2.0, Mat::identity(1, 1)).unwrap();
        assert_eq!(fingerprint(&s1), fingerprint(&s1.clone()));
        assert_ne!(fingerprint(&s1).sha256, fingerprint(&s2).sha256);
    }

    #[test]
    fn report_round_trip() {
        let mut r = AnalysisReport::new(None, 7, 10);
        r.tolerance("zero", 1e-8);
        r.push("zeros", serde_json::json!({"count": 2}), Duration::from_millis(3));
        let back = AnalysisReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn empty_selection_takes_all_columns() {
        let a = Mat::from_row_slice(1, 1, &[-1.0]);
        let sys = canonical_attack_form(Mat::identity(1, 1), a, Mat::identity(1, 1)).unwrap();
        let tr = simulate(&sys, &Vector::from_vec(vec![1.0]), None, None, 1.0, Some(0.1)).unwrap();
        let cols = select_columns(&tr, None, &[]).unwrap();
        assert_eq!(cols.iter().map(|c| c.0.as_str()).collect::<Vec<_>>(), vec!["x_1", "y_1"]);
        let svg = render_svg(&tr.t, &["x_1".into()], &[tr.state_series(0)]);
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}
