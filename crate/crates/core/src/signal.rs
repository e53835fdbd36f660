//! Time signals: scalar waveforms, attack signals and monitor probes.

use crate::descriptor::{mat_from_rows, mat_to_rows, AttackSet, StatePartition};
use crate::error::{Error, Result};
use crate::linalg::{CVector, Mat, Vector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Scalar function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Waveform {
    Constant { value: f64 },
    /// `value` for `t ≥ at`, zero before.
    Step { value: f64, at: f64 },
    /// `Σ coeffs[i] tⁱ`.
    Polynomial { coeffs: Vec<f64> },
    /// `amplitude · sin(omega t + phase)`.
    Sinusoid { amplitude: f64, omega: f64, phase: f64 },
    Sum { terms: Vec<Waveform> },
}

impl Waveform {
    pub fn zero() -> Self {
        Waveform::Constant { value: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Waveform::Constant { value } => *value,
            Waveform::Step { value, at } => {
                if t >= *at {
                    *value
                } else {
                    0.0
                }
            }
            Waveform::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            Waveform::Sinusoid { amplitude, omega, phase } => amplitude * (omega * t + phase).sin(),
            Waveform::Sum { terms } => terms.iter().map(|w| w.eval(t)).sum(),
        }
    }

    /// Fastest angular frequency in the waveform.
    pub fn rate(&self) -> f64 {
        match self {
            Waveform::Sinusoid { omega, .. } => omega.abs(),
            Waveform::Sum { terms } => terms.iter().map(Waveform::rate).fold(0.0, f64::max),
            _ => 0.0,
        }
    }
}

/// `2·Re(g e^{st})` for complex `s`, `Re(g) e^{st}` for real `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModeRecord", try_from = "ModeRecord")]
pub struct Mode {
    pub s: Complex64,
    pub g: CVector,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModeRecord {
    pub s: [f64; 2],
    pub g: Vec<[f64; 2]>,
}

impl From<Mode> for ModeRecord {
    fn from(m: Mode) -> Self {
        Self { s: [m.s.re, m.s.im], g: m.g.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl TryFrom<ModeRecord> for Mode {
    type Error = String;

    fn try_from(r: ModeRecord) -> std::result::Result<Self, String> {
        Ok(Mode {
            s: Complex64::new(r.s[0], r.s[1]),
            g: CVector::from_iterator(r.g.len(), r.g.iter().map(|p| Complex64::new(p[0], p[1]))),
        })
    }
}

impl Mode {
    pub fn eval(&self, t: f64) -> Vector {
        let e = (self.s * t).exp();
        let factor = if self.s.im == 0.0 { 1.0 } else { 2.0 };
        Vector::from_iterator(self.g.len(), self.g.iter().map(|g| factor * (g * e).re))
    }
}

/// Which state coordinates a feedback gain reads.
#[derive(Clone, Debug, PartialEq)]
pub enum StateBlock {
    /// The full state in original coordinates.
    Full,
    /// Dynamic coordinates of the index-one partition.
    Dynamic,
    /// 1-based original state indices.
    Indices(Vec<usize>),
}

impl Serialize for StateBlock {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            StateBlock::Full => s.serialize_str("x"),
            StateBlock::Dynamic => s.serialize_str("x1"),
            StateBlock::Indices(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for StateBlock {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Indices(Vec<usize>),
        }
        match Raw::deserialize(d)? {
            Raw::Name(n) if n == "x" => Ok(StateBlock::Full),
            Raw::Name(n) if n == "x1" => Ok(StateBlock::Dynamic),
            Raw::Name(n) => Err(serde::de::Error::custom(format!("unknown state block {n:?}"))),
            Raw::Indices(v) => Ok(StateBlock::Indices(v)),
        }
    }
}

impl StateBlock {
    /// Selector `S` with `block = S x`.
    pub fn selector(&self, n: usize, part: Option<&StatePartition>) -> Result<Mat> {
        match self {
            StateBlock::Full => Ok(Mat::identity(n, n)),
            StateBlock::Dynamic => {
                let p = part.ok_or_else(|| Error::PreconditionUnmet("x1 feedback needs an index-one partition".into()))?;
                Ok(p.z.columns(0, p.n1()).transpose())
            }
            StateBlock::Indices(idx) => {
                let mut s = Mat::zeros(idx.len(), n);
                for (r, &i) in idx.iter().enumerate() {
                    if i == 0 || i > n {
                        return Err(Error::IndexOutOfRange { index: i, max: n });
                    }
                    s[(r, i - 1)] = 1.0;
                }
                Ok(s)
            }
        }
    }
}

/// `u += F · block(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "FeedbackRecord", try_from = "FeedbackRecord")]
pub struct Feedback {
    pub gain: Mat,
    pub block: StateBlock,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeedbackRecord {
    #[serde(rename = "F")]
    pub f: Vec<Vec<f64>>,
    pub block: StateBlock,
}

impl From<Feedback> for FeedbackRecord {
    fn from(f: Feedback) -> Self {
        Self { f: mat_to_rows(&f.gain), block: f.block }
    }
}

impl TryFrom<FeedbackRecord> for Feedback {
    type Error = String;

    fn try_from(r: FeedbackRecord) -> std::result::Result<Self, String> {
        let rows = r.f.len();
        let cols = r.f.first().map(|x| x.len()).unwrap_or(0);
        let gain = mat_from_rows(&r.f, rows, cols, "F").map_err(|e| e.to_string())?;
        Ok(Feedback { gain, block: r.block })
    }
}

/// Linear filter `z' = A z + B ū`, contributing `C z + D ū` to the attack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "FilterRecord", try_from = "FilterRecord")]
pub struct LinearFilter {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
    pub input: Waveform,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilterRecord {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<f64>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<f64>>,
    pub input: Waveform,
}

impl From<LinearFilter> for FilterRecord {
    fn from(f: LinearFilter) -> Self {
        Self { a: mat_to_rows(&f.a), b: mat_to_rows(&f.b), c: mat_to_rows(&f.c), d: mat_to_rows(&f.d), input: f.input }
    }
}

impl TryFrom<FilterRecord> for LinearFilter {
    type Error = String;

    fn try_from(r: FilterRecord) -> std::result::Result<Self, String> {
        let q = r.a.len();
        let k = r.c.len();
        let e = |x: Error| x.to_string();
        Ok(LinearFilter {
            a: mat_from_rows(&r.a, q, q, "A").map_err(e)?,
            b: mat_from_rows(&r.b, q, 1, "B").map_err(e)?,
            c: mat_from_rows(&r.c, k, q, "C").map_err(e)?,
            d: mat_from_rows(&r.d, k, 1, "D").map_err(e)?,
            input: r.input,
        })
    }
}

/// Attack mode `u_K(t)` on the channels of `attack_set`:
/// exponential modes, a constant, per-channel waveforms, a driven filter and
/// state feedback, all summed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackSignal {
    pub attack_set: AttackSet,
    #[serde(default)]
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub feedback: Vec<Feedback>,
    #[serde(default)]
    pub constant: Vec<f64>,
    /// One waveform per channel, or empty.
    #[serde(default)]
    pub waveforms: Vec<Waveform>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<LinearFilter>,
}

impl AttackSignal {
    pub fn new(attack_set: AttackSet) -> Self {
        Self { attack_set, modes: Vec::new(), feedback: Vec::new(), constant: Vec::new(), waveforms: Vec::new(), filter: None }
    }

    pub fn k(&self) -> usize {
        self.attack_set.k()
    }

    /// Checks that every component has `k` channels.
    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        let bad = |what: &str| Err(Error::DimensionMismatch(format!("{what} must have {k} channels")));
        if self.modes.iter().any(|m| m.g.len() != k) {
            return bad("mode directions");
        }
        if self.feedback.iter().any(|f| f.gain.nrows() != k) {
            return bad("feedback gains");
        }
        if !self.constant.is_empty() && self.constant.len() != k {
            return bad("constant");
        }
        if !self.waveforms.is_empty() && self.waveforms.len() != k {
            return bad("waveforms");
        }
        if let Some(f) = &self.filter {
            if f.c.nrows() != k || f.d.nrows() != k || f.b.nrows() != f.a.nrows() || f.c.ncols() != f.a.nrows() {
                return bad("filter outputs");
            }
        }
        Ok(())
    }

    /// Open-loop part: modes, constant and waveforms (no filter state, no
    /// feedback).
    pub fn open_loop(&self, t: f64) -> Vector {
        let k = self.k();
        let mut u = Vector::zeros(k);
        for m in &self.modes {
            u += m.eval(t);
        }
        if !self.constant.is_empty() {
            u += Vector::from_column_slice(&self.constant);
        }
        for (i, w) in self.waveforms.iter().enumerate() {
            u[i] += w.eval(t);
        }
        if let Some(f) = &self.filter {
            u += &f.d * f.input.eval(t);
        }
        u
    }

    /// Fastest time scale of the open-loop components, as a rate.
    pub fn rate(&self) -> f64 {
        let modes = self.modes.iter().map(|m| m.s.norm()).fold(0.0, f64::max);
        let waves = self.waveforms.iter().map(Waveform::rate).fold(0.0, f64::max);
        let filter = self.filter.as_ref().map(|f| f.input.rate()).unwrap_or(0.0);
        modes.max(waves).max(filter)
    }

    pub fn filter_order(&self) -> usize {
        self.filter.as_ref().map(|f| f.a.nrows()).unwrap_or(0)
    }

    /// Scales every open-loop component (feedback gains are kept).
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.g *= Complex64::new(c, 0.0);
        }
        out.constant.iter_mut().for_each(|v| *v *= c);
        out.waveforms = out.waveforms.into_iter().map(|w| scale_wave(w, c)).collect();
        if let Some(f) = &mut out.filter {
            f.input = scale_wave(f.input.clone(), c);
        }
        out
    }
}

pub(crate) fn scale_wave(w: Waveform, c: f64) -> Waveform {
    match w {
        Waveform::Constant { value } => Waveform::Constant { value: c * value },
        Waveform::Step { value, at } => Waveform::Step { value: c * value, at },
        Waveform::Polynomial { coeffs } => Waveform::Polynomial { coeffs: coeffs.into_iter().map(|x| c * x).collect() },
        Waveform::Sinusoid { amplitude, omega, phase } => Waveform::Sinusoid { amplitude: c * amplitude, omega, phase },
        Waveform::Sum { terms } => Waveform::Sum { terms: terms.into_iter().map(|t| scale_wave(t, c)).collect() },
    }
}

/// Known monitor input: `w_x` enters the state equations, `w_y` the
/// measurements. Empty vectors mean zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeSignal {
    #[serde(default)]
    pub wx: Vec<Waveform>,
    #[serde(default)]
    pub wy: Vec<Waveform>,
}

impl ProbeSignal {
    pub fn is_zero(&self) -> bool {
        self.wx.is_empty() && self.wy.is_empty()
    }

    pub fn eval_x(&self, n: usize, t: f64) -> Vector {
        if self.wx.is_empty() {
            Vector::zeros(n)
        } else {
            Vector::from_iterator(n, self.wx.iter().map(|w| w.eval(t)))
        }
    }

    pub fn eval_y(&self, p: usize, t: f64) -> Vector {
        if self.wy.is_empty() {
            Vector::zeros(p)
        } else {
            Vector::from_iterator(p, self.wy.iter().map(|w| w.eval(t)))
        }
    }

    /// Sum of sinusoids on every state and output, drawn from `seed`.
    pub fn random(n: usize, p: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let wave = |rng: &mut rand_chacha::ChaCha8Rng| Waveform::Sinusoid {
            amplitude: rng.gen_range(0.2..1.0),
            omega: rng.gen_range(0.3..3.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
        };
        Self { wx: (0..n).map(|_| wave(&mut rng)).collect(), wy: (0..p).map(|_| wave(&mut rng)).collect() }
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if !(self.wx.is_empty() || self.wx.len() == n) || !(self.wy.is_empty() || self.wy.len() == p) {
            return Err(Error::DimensionMismatch(format!("probe must have {n} state and {p} output entries")));
        }
        Ok(())
    }
}
