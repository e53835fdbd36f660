use clap::{Args, Parser, Subcommand, ValueEnum};
use cps_detect::descriptor::{mat_to_rows as rows, partition_index_one, signature, AttackSet, DescriptorSystem, SystemFile};
use cps_detect::detect::{self, SearchOptions};
use cps_detect::error::{Error, Result};
use cps_detect::kron::kron_reduce;
use cps_detect::linalg::Vector;
use cps_detect::models::{power, water};
use cps_detect::monitors;
use cps_detect::report::{emit_plot_data, AnalysisReport};
use cps_detect::signal::{AttackSignal, ProbeSignal, Waveform};
use cps_detect::simulate::{simulate, simulate_replay};
use cps_detect::structural::{structurally_left_invertible, StructuredSystem};
use cps_detect::synthesis::{self, PrototypeKind, PrototypeParams, Scenario};
use cps_detect::zeros::invariant_zeros;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Detectability and identifiability analysis of attacks on descriptor
/// systems.
///
/// Exit codes: 0 success (an undetectable attack is a result, not a
/// failure), 1 negative or inconclusive analysis (`validate` on an invalid
/// system, `identify` out of budget, analysis preconditions not met),
/// 2 usage error, 3 data error (unreadable, malformed or inconsistent input).
/// Errors are reported on stderr as JSON `{"error": kind, "message": ...}`.
#[derive(Parser)]
#[command(name = "cps-detect", version)]
struct Cli {
    /// Seed threaded to every randomized step.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Combinatorial search budget.
    #[arg(long, global = true, default_value_t = detect::DEFAULT_BUDGET)]
    budget: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check dimensions, regularity and index one. Exit 1 when invalid.
    Validate(SystemArg),
    /// Build a system from a power or water network spec.
    Build {
        #[arg(value_enum)]
        kind: BuildKind,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the structural pattern (power networks).
        #[arg(long)]
        pattern_out: Option<PathBuf>,
    },
    /// Kron-reduce the system for an attack set.
    Reduce(SystemAttack),
    /// Invariant zeros for an attack set.
    Zeros(SystemAttack),
    /// Detectability verdict for an attack set.
    Detect {
        #[command(flatten)]
        sa: SystemAttack,
        #[arg(long, value_enum, default_value_t = Monitor::Dynamic)]
        monitor: Monitor,
    },
    /// Identifiability verdict for an attack set. Exit 1 when the budget runs out.
    Identify {
        #[command(flatten)]
        sa: SystemAttack,
        #[arg(long, value_enum, default_value_t = Monitor::Dynamic)]
        monitor: Monitor,
    },
    /// Generic left-invertibility from the sparsity pattern.
    Structural {
        #[command(flatten)]
        sa: SystemAttack,
        /// Pattern file; defaults to the numeric sparsity of the system.
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Synthesize an attack bundle.
    Synthesize {
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        attack_set: Vec<usize>,
        #[arg(long, value_enum)]
        kind: SynthKind,
        /// Replay window start and length.
        #[arg(long, num_args = 2, value_names = ["START", "LENGTH"])]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a system under an attack bundle and write the trace.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        attack: Option<PathBuf>,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        dt: Option<f64>,
        /// Initial state (comma separated); defaults to the bundle's x0 or zero.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Vec<f64>,
        /// Inject a random sinusoidal monitor probe with this seed.
        #[arg(long)]
        probe_seed: Option<u64>,
        /// Columns to write (names or labels); empty selects all.
        #[arg(long, value_delimiter = ',')]
        select: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a bundled example.
    Demo {
        #[arg(value_enum)]
        which: DemoKind,
        /// Measured states for the WSSC demo, e.g. `e1,e12`.
        #[arg(long, value_delimiter = ',', default_value = "e1,e12")]
        outputs: Vec<String>,
        /// Attack set for the WSSC demo; defaults to the two load buses.
        #[arg(long, value_delimiter = ',')]
        attack_set: Vec<usize>,
        #[arg(long, value_enum, default_value_t = DemoAnalysis::All)]
        analysis: DemoAnalysis,
        /// IEEE-14 data file; defaults to the bundled copy.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Directory for trace CSV and SVG files.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge step reports into one analysis report.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SystemArg {
    #[arg(long)]
    system: PathBuf,
}

#[derive(Args)]
struct SystemAttack {
    #[arg(long)]
    system: PathBuf,
    /// 1-based channels: states 1..n, outputs n+1..n+p.
    #[arg(long, value_delimiter = ',')]
    attack_set: Vec<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildKind {
    Power,
    Water,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Monitor {
    Static,
    Dynamic,
    Active,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    ZeroDynamics,
    StaticStealth,
    Nullspace,
    Stealth,
    Replay,
    Covert,
    FalseData,
    WaterTheft,
}

#[derive(Clone, Copy, ValueEnum)]
enum DemoKind {
    Wssc,
    Ieee14,
    Water,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DemoAnalysis {
    Zeros,
    Structural,
    Detect,
    Attack,
    All,
}

/// Attack signal plus the initial state and scenario it was designed for.
#[derive(Serialize, Deserialize)]
struct AttackBundle {
    #[serde(flatten)]
    signal: AttackSignal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenario: Option<Scenario>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_analysis() {
        1
    } else {
        3
    }
}

fn load(path: &Path) -> Result<DescriptorSystem> {
    DescriptorSystem::load(path)
}

fn attack(v: &[usize]) -> Result<AttackSet> {
    AttackSet::new(v.to_vec())
}

fn emit(out: Option<&Path>, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn zeros_json(zs: &[cps_detect::zeros::InvariantZero]) -> Value {
    Value::Array(zs.iter().map(|z| serde_json::to_value(z).expect("zero serializes")).collect())
}

fn run(cli: Cli) -> Result<u8> {
    let opts = SearchOptions { budget: cli.budget, seed: cli.seed };
    match cli.cmd {
        Cmd::Validate(a) => {
            let sys = load(&a.system)?;
            let regular = cps_detect::descriptor::check_regular(&sys, 5, cli.seed);
            let part = partition_index_one(&sys);
            let index_one = part.is_ok();
            emit(
                None,
                &json!({
                    "n": sys.n(), "m": sys.m(), "p": sys.p(),
                    "canonical": sys.is_canonical(),
                    "regular": regular,
                    "index_one": index_one,
                    "dynamic_states": part.as_ref().map(|p| p.n1()).unwrap_or(0),
                    "message": part.err().map(|e| e.to_string()),
                }),
            )?;
            Ok(if regular && index_one { 0 } else { 1 })
        }
        Cmd::Build { kind, spec, out, pattern_out } => {
            let text = std::fs::read_to_string(&spec)?;
            let sys = match kind {
                BuildKind::Power => {
                    let model = power::build_power_descriptor(&power::PowerNetworkSpec::from_json_str(&text)?)?;
                    if let Some(p) = pattern_out {
                        std::fs::write(p, serde_json::to_string_pretty(&model.pattern.to_json())?)?;
                    }
                    model.system
                }
                BuildKind::Water => {
                    let spec: water::WaterNetworkSpec = serde_json::from_str(&text)?;
                    water::build_water_descriptor(&spec)?.system
                }
            };
            emit(out.as_deref(), &serde_json::to_value(SystemFile::from_system(&sys))?)?;
            Ok(0)
        }
        Cmd::Reduce(sa) => {
            let sys = load(&sa.system)?;
            let sig = signature(&sys, &attack(&sa.attack_set)?)?;
            let k = kron_reduce(&sys, &sig)?;
            emit(
                None,
                &json!({
                    "A": rows(&k.a_til), "B": rows(&k.b_til), "C": rows(&k.c_til), "D": rows(&k.d_til),
                    "recovery_state": rows(&k.recovery_state), "recovery_input": rows(&k.recovery_input),
                    "dynamic_states": k.partition.n1(),
                    "warning": k.warning,
                }),
            )?;
            Ok(0)
        }
        Cmd::Zeros(sa) => {
            let sys = load(&sa.system)?;
            let sig = signature(&sys, &attack(&sa.attack_set)?)?;
            let zs = invariant_zeros(&sys, &sig)?;
            emit(
                None,
                &json!({
                    "undetectable": !zs.is_empty(),
                    "witness": zs.first().map(|z| serde_json::to_value(z).expect("zero")),
                    "monitor_class": "dynamic",
                    "budget_exhausted": false,
                    "zeros": zeros_json(&zs),
                }),
            )?;
            Ok(0)
        }
        Cmd::Detect { sa, monitor } => {
            let sys = load(&sa.system)?;
            let k = attack(&sa.attack_set)?;
            let v = match monitor {
                Monitor::Static => detect::static_undetectable(&sys, &k)?,
                Monitor::Dynamic => detect::dynamic_undetectable_with(&sys, &k, &opts)?,
                Monitor::Active => detect::active_undetectable(&sys, &k)?,
            };
            emit(None, &v.to_json())?;
            Ok(0)
        }
        Cmd::Identify { sa, monitor } => {
            let sys = load(&sa.system)?;
            let k = attack(&sa.attack_set)?;
            let res = match monitor {
                Monitor::Static => detect::static_unidentifiable(&sys, &k, &opts).map(|v| serde_json::to_value(v).expect("verdict")),
                Monitor::Dynamic | Monitor::Active => detect::dynamic_unidentifiable(&sys, &k, &opts).map(|hit| {
                    json!({
                        "unidentifiable": hit.is_some(),
                        "r": hit.as_ref().map(|h| h.0.clone()),
                        "witness": hit.as_ref().map(|h| serde_json::to_value(&h.1).expect("zero")),
                        "monitor_class": if monitor == Monitor::Active { "active" } else { "dynamic" },
                        "budget_exhausted": false,
                    })
                }),
            };
            match res {
                Ok(v) => {
                    emit(None, &v)?;
                    Ok(0)
                }
                Err(Error::BudgetExceeded(b)) => {
                    let class = match monitor {
                        Monitor::Static => "static",
                        Monitor::Dynamic => "dynamic",
                        Monitor::Active => "active",
                    };
                    emit(None, &json!({ "unidentifiable": null, "monitor_class": class, "budget_exhausted": true, "budget": b }))?;
                    Ok(1)
                }
                Err(e) => Err(e),
            }
        }
        Cmd::Structural { sa, pattern } => {
            let sys = load(&sa.system)?;
            let k = attack(&sa.attack_set)?;
            let s = match pattern {
                Some(p) => {
                    let v: Value = serde_json::from_str(&std::fs::read_to_string(p)?)?;
                    let full = StructuredSystem::from_json(&v)?;
                    if full.m() == sys.n() + sys.p() { full.select_inputs(&k)? } else { full }
                }
                None => StructuredSystem::from_system(&sys, &signature(&sys, &k)?),
            };
            let li = structurally_left_invertible(&s)?;
            emit(
                None,
                &json!({
                    "max_linking": li.max_linking,
                    "left_invertible": li.left_invertible,
                    "witness_paths": li.linking.paths,
                    "cut": li.cut,
                    "vertex_labels": (0..li.digraph.vertex_count()).map(|v| li.digraph.label(v)).collect::<Vec<_>>(),
                }),
            )?;
            Ok(0)
        }
        Cmd::Synthesize { system, attack_set, kind, window, out } => {
            let bundle = synthesize(system.as_deref(), &attack_set, kind, window)?;
            emit(out.as_deref(), &serde_json::to_value(&bundle)?)?;
            Ok(0)
        }
        Cmd::Simulate { system, attack: attack_path, horizon, dt, x0, probe_seed, select, out, svg } => {
            let sys = load(&system)?;
            let bundle: Option<AttackBundle> = match attack_path {
                Some(p) => Some(serde_json::from_str(&std::fs::read_to_string(p)?)?),
                None => None,
            };
            let x0 = if !x0.is_empty() {
                Vector::from_vec(x0)
            } else if let Some(x) = bundle.as_ref().and_then(|b| b.x0.clone()) {
                Vector::from_vec(x)
            } else {
                Vector::zeros(sys.n())
            };
            let probe = probe_seed.map(|s| ProbeSignal::random(sys.n(), sys.p(), s));
            let signal = bundle.as_ref().map(|b| &b.signal).filter(|s| !s.attack_set.is_empty());
            let trace = match bundle.as_ref().and_then(|b| b.scenario.clone()) {
                Some(Scenario::Replay { window }) => simulate_replay(&sys, &x0, signal, probe.as_ref(), horizon, dt, window)?,
                _ => simulate(&sys, &x0, signal, probe.as_ref(), horizon, dt)?,
            };
            let cols = emit_plot_data(&trace, sys.labels.as_ref(), &select, &out, svg.as_deref())?;
            let dynamic = monitors::dynamic_monitor_oracle(&sys, &trace, None)?;
            let stat = monitors::static_monitor(&trace, &sys.c, None);
            let mut summary = json!({
                "steps": trace.len() - 1,
                "dt": trace.meta.dt,
                "constraint_residual": trace.meta.constraint_residual,
                "max_output_norm": trace.max_output_norm(),
                "max_state_norm": trace.max_state_norm(),
                "columns": cols,
                "static_monitor": stat,
                "dynamic_monitor": dynamic,
            });
            if let Some(w) = &probe {
                summary["active_monitor"] = serde_json::to_value(monitors::active_monitor(&sys, &trace, w, None)?)?;
            }
            emit(None, &summary)?;
            Ok(0)
        }
        Cmd::Demo { which, outputs, attack_set, analysis, data, trace_dir, out } => {
            let report = match which {
                DemoKind::Wssc => demo_wssc(&outputs, &attack_set, analysis, trace_dir.as_deref(), &opts)?,
                DemoKind::Ieee14 => demo_ieee14(data.as_deref(), &opts)?,
                DemoKind::Water => demo_water(trace_dir.as_deref(), &opts)?,
            };
            emit(out.as_deref(), &serde_json::to_value(&report)?)?;
            Ok(0)
        }
        Cmd::Report { inputs, out } => {
            let reports = inputs.iter().map(|p| AnalysisReport::from_json(&std::fs::read_to_string(p)?)).collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), &serde_json::to_value(AnalysisReport::merge(&reports)?)?)?;
            Ok(0)
        }
    }
}

fn synthesize(system: Option<&Path>, attack_set: &[usize], kind: SynthKind, window: Option<Vec<f64>>) -> Result<AttackBundle> {
    let plain = |signal| AttackBundle { signal, x0: None, scenario: None };
    if let SynthKind::WaterTheft = kind {
        let model = water::water_theft_demo()?;
        return Ok(plain(synthesis::synth_water_theft_attack(&model)?.signal));
    }
    let path = system.ok_or_else(|| Error::InvalidInput("--system is required for this kind".into()))?;
    let sys = load(path)?;
    let k = attack(attack_set)?;
    Ok(match kind {
        SynthKind::ZeroDynamics => {
            let (x0, signal) = synthesis::synth_zero_dynamics_attack(&sys, &k)?;
            AttackBundle { signal, x0: Some(x0.iter().copied().collect()), scenario: None }
        }
        SynthKind::StaticStealth => plain(synthesis::synth_static_stealth_attack(&sys, &k)?),
        SynthKind::Nullspace => plain(synthesis::synth_transfer_nullspace_attack(&sys, &k, Waveform::Step { value: 1.0, at: 0.0 })?.signal),
        SynthKind::Stealth | SynthKind::Replay | SynthKind::Covert | SynthKind::FalseData => {
            let pk = match kind {
                SynthKind::Stealth => PrototypeKind::Stealth,
                SynthKind::Replay => PrototypeKind::Replay,
                SynthKind::Covert => PrototypeKind::Covert,
                _ => PrototypeKind::FalseData,
            };
            let window = window.map(|w| cps_detect::simulate::ReplayWindow { start: w[0], length: w[1] });
            let params = PrototypeParams {
                attack_set: (!k.is_empty()).then(|| k.clone()),
                state_attack: None,
                window,
                ..Default::default()
            };
            let proto = synthesis::synth_prototype(&sys, pk, &params)?;
            AttackBundle { signal: proto.signal, x0: None, scenario: Some(proto.scenario) }
        }
        SynthKind::WaterTheft => unreachable!("handled above"),
    })
}

fn parse_states(outputs: &[String]) -> Result<Vec<usize>> {
    outputs
        .iter()
        .map(|s| {
            s.trim()
                .trim_start_matches('e')
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad output selector {s:?}")))
        })
        .collect()
}

fn demo_wssc(outputs: &[String], attack_set: &[usize], analysis: DemoAnalysis, trace_dir: Option<&Path>, opts: &SearchOptions) -> Result<AnalysisReport> {
    let measured = parse_states(outputs)?;
    let sys = power::wssc_demo(&measured)?;
    let k = AttackSet::new(if attack_set.is_empty() { power::WSSC_ATTACK.to_vec() } else { attack_set.to_vec() })?;
    let sig = signature(&sys, &k)?;
    let mut report = AnalysisReport::new(Some(&sys), opts.seed, opts.budget);
    report.tolerance("threshold_relative", 1e-6);
    let want = |a: DemoAnalysis| analysis == a || analysis == DemoAnalysis::All;
    if want(DemoAnalysis::Zeros) {
        report.run_recorded("zeros", || Ok(json!({ "attack_set": k, "zeros": zeros_json(&invariant_zeros(&sys, &sig)?) })))?;
    }
    if want(DemoAnalysis::Structural) {
        report.run_recorded("structural", || {
            let li = structurally_left_invertible(&StructuredSystem::from_system(&sys, &sig))?;
            Ok(json!({ "max_linking": li.max_linking, "left_invertible": li.left_invertible, "witness_paths": li.linking.paths }))
        })?;
    }
    if want(DemoAnalysis::Detect) {
        report.run_recorded("detect", || detect::dynamic_undetectable_with(&sys, &k, opts).map(|v| v.to_json()))?;
    }
    if want(DemoAnalysis::Attack) {
        report.run_recorded("attack", || {
            let (x0, signal, horizon) = match synthesis::synth_transfer_nullspace_attack(&sys, &k, Waveform::Polynomial { coeffs: vec![0.0, 0.0, 1.0] }) {
                Ok(a) => (Vector::zeros(sys.n()), a.signal, 30.0),
                Err(Error::TrivialNullSpace) => {
                    let (x0, s) = synthesis::synth_zero_dynamics_attack(&sys, &k)?;
                    (x0, s, 20.0)
                }
                Err(e) => return Err(e),
            };
            let trace = simulate(&sys, &x0, Some(&signal), None, horizon, None)?;
            if let Some(dir) = trace_dir {
                std::fs::create_dir_all(dir)?;
                emit_plot_data(&trace, sys.labels.as_ref(), &[], &dir.join("wssc_trace.csv"), Some(&dir.join("wssc_trace.svg")))?;
            }
            let v = monitors::dynamic_monitor_oracle(&sys, &trace, None)?;
            Ok(json!({
                "horizon": horizon,
                "max_output": trace.y.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())),
                "max_state_norm": trace.max_state_norm(),
                "dynamic_monitor": v,
            }))
        })?;
    }
    Ok(report)
}

fn demo_ieee14(data: Option<&Path>, opts: &SearchOptions) -> Result<AnalysisReport> {
    let model = power::ieee14_demo(data)?;
    let sys = &model.system;
    let mut report = AnalysisReport::new(Some(sys), opts.seed, opts.budget);
    report.run_recorded("static_k4", || {
        let hit = detect::static_exists_undetectable_of_cardinality(sys, 4, &model.protected_outputs, opts)?;
        Ok(json!({ "exists": hit.is_some(), "attack_set": hit.map(|h| h.attack_set) }))
    })?;
    report.run_recorded("dynamic_output_immunity", || Ok(serde_json::to_value(detect::output_attack_immunity(sys, &model.protected_outputs)?)?))?;
    Ok(report)
}

fn demo_water(trace_dir: Option<&Path>, opts: &SearchOptions) -> Result<AnalysisReport> {
    let model = water::water_theft_demo()?;
    let sys = &model.system;
    let mut report = AnalysisReport::new(Some(sys), opts.seed, opts.budget);
    report.run_recorded("theft", || {
        let attack = synthesis::synth_water_theft_attack(&model)?;
        let x0 = Vector::zeros(sys.n());
        let attacked = simulate(sys, &x0, Some(&attack.signal), None, 50.0, None)?;
        let nominal = simulate(sys, &x0, None, None, 50.0, Some(attacked.meta.dt))?;
        if let Some(dir) = trace_dir {
            std::fs::create_dir_all(dir)?;
            emit_plot_data(&attacked, sys.labels.as_ref(), &[], &dir.join("water_trace.csv"), Some(&dir.join("water_trace.svg")))?;
        }
        let drop = attacked.x[0][0] - attacked.x.last().expect("nonempty")[0];
        Ok(json!({
            "a31": attack.a31,
            "channels": attack.channels,
            "output_deviation": attacked.max_output_deviation(&nominal),
            "reservoir_drop": drop,
            "dynamic_monitor": monitors::dynamic_monitor_oracle(sys, &attacked, None)?,
        }))
    })?;
    Ok(report)
}
