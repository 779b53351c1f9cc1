//! Command-line front end. Every subcommand writes a JSON report (to
//! `--report`, or stdout with `--json`) carrying the tool version, an echo of
//! its configuration and the seed it used.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::attack::{run_attack, AttackBudget, AttackMode, NetlistOracle, DEFAULT_MAX_QUERIES, DEFAULT_MAX_VECTORS};
use crate::camo::{apply_camouflage, enumerate_candidates, select_random, CamoPlan};
use crate::device::{
    cascade_corrected, cascade_ideal, corner_sweep, inverter_trip_point, robustness_condition, CornerGrid,
    DeviceConfig, Flavor, ProcessSpread, WidthRange,
};
use crate::netlist::{GateKind, Netlist};
use crate::overhead::{overhead_report, overhead_sweep, CellCharacterization};
use crate::pla::parse_pla;
use crate::signature::{SignatureMode, DEFAULT_SAMPLE_VECTORS};
use crate::synth::{assign_vth_flavors, check_domino_compatible, logic_depth, synthesize, TreeShape};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const THREADS_ENV: &str = "CAMOFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "camoforge", version, about = "Threshold-dependent camouflaging toolchain")]
pub struct Cli {
    /// Extra diagnostics on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Print the JSON report on stdout instead of the summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Read a PLA file and summarize it.
    Parse(ParseArgs),
    /// Synthesize a dual-rail domino AND/OR netlist from a PLA file.
    Synth(SynthArgs),
    /// Camouflage a random fraction of the AND2/OR2 gates.
    Camouflage(CamouflageArgs),
    /// Enumerate the functions a camouflaged netlist may implement.
    Candidates(CandidatesArgs),
    /// Run the oracle-guided attack.
    Attack(AttackArgs),
    /// Delay and power overhead against the baseline.
    Analyze(AnalyzeArgs),
    /// Overhead statistics over fractions and seeds.
    Sweep(SweepArgs),
    /// Cell-level device model.
    #[command(subcommand)]
    Device(DeviceCommand),
}

#[derive(Debug, Args, Serialize)]
pub struct ParseArgs {
    #[arg(long)]
    pub pla: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeArg {
    Balanced,
    Chain,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub pla: PathBuf,
    #[arg(long, value_enum, default_value = "balanced")]
    pub tree: TreeArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Leave Vth flavors unassigned (NA).
    #[arg(long)]
    pub no_flavors: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CamouflageArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct CandidatesArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
    /// Sample size in sampled mode.
    #[arg(long, default_value_t = DEFAULT_SAMPLE_VECTORS)]
    pub vectors: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plan file, to locate the true assignment's class.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AttackArgs {
    #[arg(long)]
    pub camo: PathBuf,
    #[arg(long)]
    pub oracle_netlist: PathBuf,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_QUERIES)]
    pub max_queries: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_VECTORS)]
    pub max_vectors: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub camo: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    /// Characterization table; built-in defaults otherwise.
    #[arg(long)]
    pub chars: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write the aligned-column text view here.
    #[arg(long)]
    pub text: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5")]
    pub fractions: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub chars: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceCommand {
    /// Check the threshold separability window.
    Robustness(DeviceArgs),
    /// Pass-gate cascade stage voltages.
    Cascade(CascadeArgs),
    /// INV1 trip point at nominal conditions.
    Trip(DeviceArgs),
    /// INV1 width sweep over PVT corners.
    Sweep(DeviceSweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlavorArg {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpreadArg {
    Relative,
    Absolute,
}

#[derive(Debug, Args, Serialize)]
pub struct DeviceArgs {
    /// Device parameter file; built-in defaults otherwise.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub vdd: Option<f64>,
    #[arg(long)]
    pub vth_low: Option<f64>,
    #[arg(long)]
    pub vth_high: Option<f64>,
    #[arg(long)]
    pub delta_vth: Option<f64>,
    #[arg(long)]
    pub subthreshold_offset: Option<f64>,
    /// INV1 NMOS width in nm.
    #[arg(long)]
    pub wn: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CascadeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub device: DeviceArgs,
    #[arg(long, default_value_t = 4)]
    pub stages: usize,
    /// Flavors to report; both by default.
    #[arg(long, value_enum)]
    pub flavor: Option<FlavorArg>,
}

#[derive(Debug, Args, Serialize)]
pub struct DeviceSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub device: DeviceArgs,
    #[arg(long, default_value_t = 10.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 500.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step: f64,
    #[arg(long, value_enum, default_value = "relative")]
    pub spread: SpreadArg,
    /// Per-corner table (width, corner, Vm, feasible).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad flag values: exit 2.
    Input(String),
    /// Library or domain failure: exit 1.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Domain(m) => m,
        }
    }
}

fn input_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input_err(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| input_err(path, e))
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    Netlist::from_json(&read(path)?).map_err(|e| input_err(path, e))
}

fn load_plan(path: &Path) -> Result<CamoPlan, CliError> {
    CamoPlan::from_json(&read(path)?).map_err(|e| input_err(path, e))
}

fn load_chars(path: Option<&Path>) -> Result<CellCharacterization<f64>, CliError> {
    match path {
        Some(p) => CellCharacterization::from_json(&read(p)?).map_err(|e| input_err(p, e)),
        None => Ok(CellCharacterization::default()),
    }
}

fn load_device(args: &DeviceArgs) -> Result<DeviceConfig<f64>, CliError> {
    let mut cfg = match &args.params {
        Some(p) => DeviceConfig::from_json(&read(p)?).map_err(|e| input_err(p, e))?,
        None => DeviceConfig::default(),
    };
    let p = &mut cfg.params;
    for (slot, v) in [
        (&mut p.vdd, args.vdd),
        (&mut p.vth_low, args.vth_low),
        (&mut p.vth_high, args.vth_high),
        (&mut p.delta_vth, args.delta_vth),
        (&mut p.subthreshold_offset, args.subthreshold_offset),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    if let Some(wn) = args.wn {
        cfg.geometry.wn = wn;
    }
    cfg.params
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;
    Ok(cfg)
}

/// A finished subcommand: its report, a human summary and the exit code.
pub struct Outcome {
    pub report: Value,
    pub summary: String,
    pub report_path: Option<PathBuf>,
    pub code: i32,
}

/// Wraps a result in the common report envelope.
pub fn envelope(command: &str, config: &impl Serialize, seed: Option<u64>, result: Value) -> Value {
    json!({
        "tool": "camoforge",
        "version": VERSION,
        "command": command,
        "config": serde_json::to_value(config).expect("config serializes"),
        "seed": seed,
        "result": result,
    })
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn ok(report: Value, summary: String, report_path: &Option<PathBuf>) -> Outcome {
    Outcome {
        report,
        summary,
        report_path: report_path.clone(),
        code: 0,
    }
}

fn cmd_parse(a: &ParseArgs) -> Result<Outcome, CliError> {
    let pla = parse_pla(&read(&a.pla)?).map_err(|e| input_err(&a.pla, e))?;
    let result = json!({
        "num_inputs": pla.num_inputs,
        "num_outputs": pla.num_outputs,
        "num_terms": pla.cubes.len(),
        "input_labels": pla.input_labels,
        "output_labels": pla.output_labels,
    });
    Ok(ok(envelope("parse", a, None, result), format!("{pla}\n"), &a.report))
}

fn cmd_synth(a: &SynthArgs) -> Result<Outcome, CliError> {
    let pla = parse_pla(&read(&a.pla)?).map_err(|e| input_err(&a.pla, e))?;
    let shape = match a.tree {
        TreeArg::Balanced => TreeShape::Balanced,
        TreeArg::Chain => TreeShape::Chain,
    };
    let (raw, rails) = synthesize(&pla, shape);
    let netlist = if a.no_flavors { raw } else { assign_vth_flavors(&raw) };
    write(&a.out, &netlist.to_json())?;
    let domino = check_domino_compatible(&netlist);
    let counts = json!({
        "AND2": netlist.count_kind(GateKind::And2),
        "OR2": netlist.count_kind(GateKind::Or2),
        "INV": netlist.count_kind(GateKind::Inv),
        "CONST0": netlist.count_kind(GateKind::Const0),
        "CONST1": netlist.count_kind(GateKind::Const1),
    });
    let result = json!({
        "num_inputs": netlist.num_inputs(),
        "num_outputs": netlist.num_outputs(),
        "num_gates": netlist.gates().len(),
        "gate_counts": counts,
        "logic_depth": logic_depth(&netlist),
        "domino_compatible": domino.pass,
        "dual_rail": to_value(&rails),
    });
    let summary = format!(
        "{} gates ({} AND2, {} OR2, {} INV), depth {}, domino-compatible: {}\n",
        netlist.gates().len(),
        netlist.count_kind(GateKind::And2),
        netlist.count_kind(GateKind::Or2),
        netlist.count_kind(GateKind::Inv),
        logic_depth(&netlist),
        domino.pass
    );
    Ok(ok(envelope("synth", a, None, result), summary, &a.report))
}

fn cmd_camouflage(a: &CamouflageArgs) -> Result<Outcome, CliError> {
    let netlist = load_netlist(&a.netlist)?;
    let plan = select_random(&netlist, a.fraction, a.seed).map_err(domain)?;
    let camo = apply_camouflage(&netlist, &plan).map_err(domain)?;
    write(&a.out, &camo.to_json())?;
    write(&a.plan, &plan.to_json())?;
    let result = json!({
        "eligible_gates": crate::camo::eligible_gates(&netlist).len(),
        "camouflaged_gates": plan.selected_gate_ids.len(),
        "plan": to_value(&plan),
    });
    let summary = format!(
        "camouflaged {} of {} eligible gates\n",
        plan.selected_gate_ids.len(),
        crate::camo::eligible_gates(&netlist).len()
    );
    Ok(ok(envelope("camouflage", a, Some(a.seed), result), summary, &a.report))
}

fn mode_of(m: ModeArg, vectors: usize) -> SignatureMode {
    match m {
        ModeArg::Exhaustive => SignatureMode::Exhaustive,
        ModeArg::Sampled => SignatureMode::Sampled { vectors },
    }
}

fn cmd_candidates(a: &CandidatesArgs) -> Result<Outcome, CliError> {
    let netlist = load_netlist(&a.netlist)?;
    let plan = a.plan.as_deref().map(load_plan).transpose()?;
    let space = enumerate_candidates(&netlist, mode_of(a.mode, a.vectors), a.seed).map_err(domain)?;
    let contains_true = match &plan {
        Some(p) if p.true_assignment.len() == space.camo_count => Some(space.class_of(&p.true_assignment)),
        Some(_) => return Err(CliError::Input("plan does not match the netlist's CAMO count".into())),
        None => None,
    };
    let classes: Vec<Value> = space
        .classes
        .iter()
        .map(|c| {
            json!({
                "representative": c.representative.to_string(),
                "members": c.members,
                "signature_digest": c.signature.digest(),
            })
        })
        .collect();
    let result = json!({
        "camo_count": space.camo_count,
        "total_assignments": space.total_assignments,
        "num_classes": space.classes.len(),
        "exact": space.exact,
        "signature_mode": if space.exact { "EXHAUSTIVE" } else { "SAMPLED" },
        "contains_true": contains_true,
        "classes": classes,
    });
    let mut summary = format!(
        "{} CAMO cells, {} assignments, {} distinct functions",
        space.camo_count,
        space.total_assignments,
        space.classes.len()
    );
    if !space.exact {
        summary.push_str(" (sampled: classes may merge distinct functions)");
    }
    summary.push('\n');
    let seed = matches!(a.mode, ModeArg::Sampled).then_some(a.seed);
    Ok(ok(envelope("candidates", a, seed, result), summary, &a.report))
}

fn cmd_attack(a: &AttackArgs) -> Result<Outcome, CliError> {
    let camo = load_netlist(&a.camo)?;
    let truth = load_netlist(&a.oracle_netlist)?;
    if truth.num_inputs() != camo.num_inputs() || truth.num_outputs() != camo.num_outputs() {
        return Err(CliError::Input("oracle netlist ports do not match the camouflaged netlist".into()));
    }
    let mut oracle = NetlistOracle::new(&truth).map_err(|e| input_err(&a.oracle_netlist, e))?;
    let mode = match a.mode {
        ModeArg::Exhaustive => AttackMode::Exhaustive,
        ModeArg::Sampled => AttackMode::Sampled { seed: a.seed },
    };
    let budget = AttackBudget {
        max_queries: a.max_queries,
        max_vectors: a.max_vectors,
    };
    let state = run_attack(&camo, &mut oracle, mode, budget).map_err(domain)?;
    let transcript: Vec<Value> = state
        .queries
        .iter()
        .map(|q| {
            json!({
                "input": bits(&q.input),
                "output": bits(&q.output),
                "live_before": q.live_before,
                "live_after": q.live_after,
            })
        })
        .collect();
    let live: Vec<String> = state.live_assignments().iter().map(ToString::to_string).collect();
    let result = json!({
        "status": to_value(&state.status),
        "camo_count": state.camo_count,
        "num_queries": state.queries.len(),
        "vectors_examined": state.vectors_examined,
        "final_class_size": state.live.len(),
        "live_assignments": live,
        "transcript": transcript,
        "diagnostics": state.diagnostics,
    });
    let summary = format!(
        "{:?} after {} queries, {} live assignments\n",
        state.status,
        state.queries.len(),
        state.live.len()
    )
    .to_uppercase();
    let code = if state.status == crate::attack::AttackStatus::Resolved { 0 } else { 1 };
    let seed = matches!(a.mode, ModeArg::Sampled).then_some(a.seed);
    Ok(Outcome {
        code,
        ..ok(envelope("attack", a, seed, result), summary, &a.report)
    })
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let baseline = load_netlist(&a.baseline)?;
    let camo = load_netlist(&a.camo)?;
    let plan = load_plan(&a.plan)?;
    let chars = load_chars(a.chars.as_deref())?;
    let report = overhead_report(&baseline, &camo, &plan, &chars).map_err(domain)?;
    let text = report.to_text();
    if let Some(p) = &a.text {
        write(p, &text)?;
    }
    let result = json!({
        "overhead": to_value(&report),
        "characterization": to_value(&chars),
    });
    Ok(ok(
        envelope("analyze", a, Some(plan.selection_seed), result),
        text,
        &a.report,
    ))
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let netlist = load_netlist(&a.netlist)?;
    let chars = load_chars(a.chars.as_deref())?;
    if a.fractions.is_empty() || a.seeds.is_empty() {
        return Err(CliError::Input("sweep needs at least one fraction and one seed".into()));
    }
    let report = overhead_sweep(&netlist, &a.fractions, &a.seeds, &chars).map_err(domain)?;
    let mut summary = String::new();
    let _ = writeln!(summary, "{:>8} {:>12} {:>12}", "fraction", "delay_mean%", "power_mean%");
    for s in &report.summary {
        let _ = writeln!(
            summary,
            "{:>8.3} {:>12.2} {:>12.2}",
            s.fraction, s.mean_delay_overhead_pct, s.mean_power_overhead_pct
        );
    }
    let result = to_value(&report);
    Ok(ok(envelope("sweep", a, None, result), summary, &a.report))
}

fn flavors(choice: Option<FlavorArg>) -> Vec<Flavor> {
    match choice {
        Some(FlavorArg::Low) => vec![Flavor::Low],
        Some(FlavorArg::High) => vec![Flavor::High],
        None => vec![Flavor::Low, Flavor::High],
    }
}

fn cmd_device(d: &DeviceCommand) -> Result<Outcome, CliError> {
    match d {
        DeviceCommand::Robustness(a) => {
            let cfg = load_device(a)?;
            let v = robustness_condition(&cfg.params);
            let summary = format!(
                "vth_low + delta = {:.4} V, vth_high - delta = {:.4} V: {}\n",
                v.low_bound,
                v.high_bound,
                if v.holds { "TRUE" } else { "FALSE" }
            );
            let result = json!({ "verdict": to_value(&v), "units": "V" });
            Ok(Outcome {
                code: if v.holds { 0 } else { 1 },
                ..ok(envelope("device robustness", a, None, result), summary, &a.report)
            })
        }
        DeviceCommand::Cascade(a) => {
            let cfg = load_device(&a.device)?;
            let mut out = serde_json::Map::new();
            let mut summary = String::new();
            for f in flavors(a.flavor) {
                let ideal = cascade_ideal(&cfg.params, a.stages, f).map_err(|e| CliError::Input(e.to_string()))?;
                let corrected = cascade_corrected(&cfg.params, a.stages, f).map_err(domain)?;
                let _ = writeln!(summary, "{f:<4} ideal     {}", volts(&ideal));
                let _ = writeln!(summary, "{f:<4} corrected {}", volts(&corrected));
                out.insert(f.to_string(), json!({ "ideal": ideal, "corrected": corrected }));
            }
            let result = json!({ "stages": a.stages, "units": "V", "flavors": out });
            Ok(ok(envelope("device cascade", a, None, result), summary, &a.device.report))
        }
        DeviceCommand::Trip(a) => {
            let cfg = load_device(a)?;
            let vm = inverter_trip_point(&cfg.params, &cfg.geometry).map_err(|e| CliError::Input(e.to_string()))?;
            let inside = cfg.params.node_x_low < vm && vm < cfg.params.node_x_high;
            let summary = format!(
                "Vm = {vm:.4} V at wn = {} nm; window ({}, {}) V: {}\n",
                cfg.geometry.wn,
                cfg.params.node_x_low,
                cfg.params.node_x_high,
                if inside { "inside" } else { "outside" }
            );
            let result = json!({
                "trip_point_v": vm,
                "wn_nm": cfg.geometry.wn,
                "wp_nm": cfg.geometry.wp,
                "window_v": [cfg.params.node_x_low, cfg.params.node_x_high],
                "inside_window": inside,
            });
            Ok(Outcome {
                code: if inside { 0 } else { 1 },
                ..ok(envelope("device trip", a, None, result), summary, &a.report)
            })
        }
        DeviceCommand::Sweep(a) => {
            let cfg = load_device(&a.device)?;
            let spread = match a.spread {
                SpreadArg::Relative => ProcessSpread::Relative,
                SpreadArg::Absolute => ProcessSpread::Absolute,
            };
            let range = WidthRange {
                lo: a.lo,
                hi: a.hi,
                step: a.step,
            };
            let grid = CornerGrid::from_params(&cfg.params);
            let r = corner_sweep(&cfg.params, &cfg.geometry, &range, &grid, spread)
                .map_err(|e| CliError::Input(e.to_string()))?;
            if let Some(p) = &a.csv {
                write(p, &r.to_csv())?;
            }
            let summary = match r.feasible_interval {
                Some((lo, hi)) => format!(
                    "feasible wn: {lo} to {hi} nm over {} corners (contiguous: {})\n",
                    r.corners.len(),
                    r.contiguous
                ),
                None => format!("no feasible wn over {} corners\n", r.corners.len()),
            };
            let result = json!({
                "units": { "width": "nm", "voltage": "V", "temperature": "K" },
                "spread": to_value(&r.spread),
                "robustness": to_value(&r.robustness),
                "corners": to_value(&r.corners),
                "feasible_widths_nm": to_value(&r.feasible_widths),
                "feasible_interval_nm": to_value(&r.feasible_interval),
                "contiguous": r.contiguous,
                "contains_nominal_width": r.contains(cfg.geometry.wn),
            });
            Ok(Outcome {
                code: if r.feasible_interval.is_some() { 0 } else { 1 },
                ..ok(envelope("device sweep", a, None, result), summary, &a.device.report)
            })
        }
    }
}

fn volts(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ")
}

/// Executes a parsed command without touching stdout.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Parse(a) => cmd_parse(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Camouflage(a) => cmd_camouflage(a),
        Command::Candidates(a) => cmd_candidates(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Device(d) => cmd_device(d),
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn render_report(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report renders");
    s.push('\n');
    s
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = thread_pool().and_then(|pool| match pool {
        Some(p) => p.install(|| execute(&cli.command)),
        None => execute(&cli.command),
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("camoforge: error: {}", e.message());
            return e.exit_code();
        }
    };
    let rendered = render_report(&outcome.report);
    if let Some(p) = &outcome.report_path {
        if let Err(e) = write(p, &rendered) {
            eprintln!("camoforge: error: {}", e.message());
            return e.exit_code();
        }
    }
    if cli.json {
        print!("{rendered}");
    } else {
        print!("{}", outcome.summary);
    }
    if cli.verbose > 0 {
        eprintln!("camoforge {VERSION}: exit {}", outcome.code);
    }
    outcome.code
}
