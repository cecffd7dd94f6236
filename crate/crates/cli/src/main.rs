//! `potentia`: decide modal theories, verify control statements, replay
//! simulations, run the universal algorithm and check maximality.
//!
//! Exit codes: 0 pass or member, 1 refuted or failed (with a witness),
//! 2 usage or input error, 3 undecided within the work bound.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use potentia::control::{verify_family, ControlFamily, ControlReport};
use potentia::decide::{decide_with, Countermodel, DecisionResult, TheoryId, Verdict};
use potentia::maximality::{MaximalityReport, ToyTheory, WorldTheory};
use potentia::pretree::PreTree;
use potentia::sequence::{railyard_encoding, Seq, SequenceSystem, Window};
use potentia::simulate::{simulate_s4_over_sequences, simulate_s5_over_sequences, SimVerdict, SimulationReport};
use potentia::universal::{
    decode_sequence, derive_concatenated, run_one_at_a_time, run_universal, script_extension,
    script_extension_one_at_a_time, FragmentOracle, NeverProves, ScriptedOracle, UAState,
};
use potentia::{parse, KripkeModel, ModalFormula, System};
use serde_json::{json, Value};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "potentia", version, about = "Modal logic of potentialist systems")]
struct Cli {
    /// Emit machine-readable JSON (with a `schema_version` field).
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide membership of a formula in S4, S4.2, S4.3 or S5.
    Decide(DecideArgs),
    /// Print a smallest countermodel, if the formula is not a member.
    Countermodel(DecideArgs),
    /// Check a control family (switch, button, dial, ...) on a model or on
    /// the sequence system.
    VerifyControls(VerifyArgs),
    /// Replay a countermodel in the sequence system.
    Simulate(SimulateArgs),
    /// Run the universal algorithm against an oracle file.
    UaRun(UaRunArgs),
    /// Script grants so a rerun enumerates a given target.
    UaExtend(UaExtendArgs),
    /// Encode a uniform pre-tree as a railyard over sequences and verify it.
    Railyard(RailyardArgs),
    /// Build a greedy maximal theory and check the maximality principle.
    Maximality(MaximalityArgs),
}

#[derive(Args)]
struct DecideArgs {
    /// S4, S4.2, S4.3 or S5 (case-insensitive; `s4_2` also works).
    #[arg(long, short)]
    theory: String,
    /// Formula in the modal grammar, or `@path` to read it from a file.
    formula: String,
    /// Work bound; beyond it the verdict is "unknown" (exit 3).
    #[arg(long)]
    bound: Option<u64>,
    /// Report the procedure's own countermodel instead of a smallest one.
    #[arg(long)]
    raw: bool,
    /// Write the countermodel as Graphviz DOT to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    S4,
    S5,
}

#[derive(Args)]
struct SequenceWindow {
    /// Base world of the sequence system, e.g. `3,1`.
    #[arg(long, value_delimiter = ',')]
    base: Vec<u64>,
    /// Checked extensions use entries `0..alphabet`.
    #[arg(long, default_value_t = 4)]
    alphabet: u64,
    /// Checked extensions have at most this many entries.
    #[arg(long, default_value_t = 2)]
    depth: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Control family JSON: {"kind": "switch", "statements": [...], "tree": ...}.
    #[arg(long)]
    family: PathBuf,
    /// Finite Kripke model JSON; without it the sequence system is used.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Base world of the finite model (railyards only).
    #[arg(long, default_value_t = 0)]
    base_world: usize,
    #[command(flatten)]
    window: SequenceWindow,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "s4")]
    engine: Engine,
    /// Formula in the modal grammar, or `@path`.
    formula: String,
    /// Base world for the S4 engine, e.g. `3,1`.
    #[arg(long, value_delimiter = ',')]
    base: Vec<u64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Scripted oracle JSON, or {"kind": "never", "fragment_count": n}.
    #[arg(long)]
    oracle: PathBuf,
    #[arg(long, default_value_t = 0)]
    program: u64,
    /// Release one number per stage instead of a batch.
    #[arg(long)]
    one_at_a_time: bool,
}

#[derive(Args)]
struct UaRunArgs {
    #[command(flatten)]
    oracle: OracleArgs,
    /// Proof-search steps before giving up.
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
}

#[derive(Args)]
struct UaExtendArgs {
    #[command(flatten)]
    oracle: OracleArgs,
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
    /// Sequence the rerun must enumerate, e.g. `7,7,1`.
    #[arg(long, value_delimiter = ',')]
    target: Vec<u64>,
}

#[derive(Args)]
struct RailyardArgs {
    /// Pre-tree JSON: {"clusters": [[0,1],[2,3]], "parent": [null, 0]}.
    #[arg(long, conflicts_with = "complete")]
    tree: Option<PathBuf>,
    /// Complete uniform pre-tree `levels,branching,cluster_size`.
    #[arg(long, value_delimiter = ',')]
    complete: Option<Vec<usize>>,
    /// Entries ignored before decoding starts.
    #[arg(long, default_value_t = 0)]
    offset: usize,
    /// Write the tree as Graphviz DOT to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct MaximalityArgs {
    /// Toy theory JSON.
    #[arg(long)]
    theory: PathBuf,
    /// Greedy order of existential sentences (default: as listed).
    #[arg(long, value_delimiter = ',')]
    order: Vec<String>,
    /// Check this world (its true sentences) instead of the greedy one.
    #[arg(long, value_delimiter = ',')]
    world: Option<Vec<String>>,
    /// Fragment horizon (default: the last fragment).
    #[arg(long)]
    horizon: Option<usize>,
}

/// What a command produced: human text, JSON, and the exit code.
struct Output {
    text: String,
    json: Value,
    code: u8,
}

fn read_text(arg: &str) -> Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(fs::read_to_string(path)
            .with_context(|| format!("reading {path}"))?
            .trim()
            .to_string()),
        None => Ok(arg.to_string()),
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn formula(arg: &str) -> Result<ModalFormula> {
    Ok(parse(&read_text(arg)?)?)
}

fn write_dot(path: &Option<PathBuf>, dot: &str) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, dot).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn describe_model(m: &KripkeModel) -> String {
    let mut out = format!("worlds: {}\n", m.world_count());
    let classes = m.frame_class_of();
    if let Some(tree) = &classes.pretree {
        out.push_str(&format!("clusters: {:?}\n", tree.clusters()));
        let parents: Vec<String> = (0..tree.cluster_count())
            .map(|c| tree.parent(c).map_or("-".into(), |p| p.to_string()))
            .collect();
        out.push_str(&format!("parents: [{}]\n", parents.join(", ")));
    } else {
        let edges: Vec<String> = m.edges().map(|(a, b)| format!("{a}->{b}")).collect();
        out.push_str(&format!("access: {}\n", edges.join(" ")));
    }
    for (var, set) in m.valuation() {
        out.push_str(&format!("{var}: {set:?}\n"));
    }
    out
}

fn countermodel_json(cm: &Countermodel) -> Result<Value> {
    let mut v = serde_json::to_value(cm)?;
    if let Some(tree) = cm.model.frame_class_of().pretree {
        v["pretree"] = serde_json::to_value(tree)?;
    }
    Ok(v)
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Member => "member",
        Verdict::NonMember(_) => "non_member",
        Verdict::UnknownBeyondBound { .. } => "unknown_beyond_bound",
    }
}

fn run_decide(a: &DecideArgs, only_countermodel: bool) -> Result<Output> {
    let theory: TheoryId = a.theory.parse()?;
    let f = formula(&a.formula)?;
    let r: DecisionResult = decide_with(theory, &f, a.bound, !a.raw)?;
    let mut json = json!({
        "command": if only_countermodel { "countermodel" } else { "decide" },
        "theory": theory,
        "formula": f.to_string(),
        "verdict": verdict_name(&r.verdict),
        "work": r.work,
    });
    let (text, code) = match &r.verdict {
        Verdict::Member => {
            let text = if only_countermodel {
                format!("Member: {f} is in {theory}; no countermodel")
            } else {
                format!("Member\n{f} is in {theory}")
            };
            (text, 0)
        }
        Verdict::NonMember(cm) => {
            write_dot(&a.dot, &cm.model.to_dot())?;
            json["countermodel"] = countermodel_json(cm)?;
            let head = if only_countermodel {
                String::new()
            } else {
                format!("NonMember\n{f} is not in {theory}\n")
            };
            (
                format!(
                    "{head}refuted at world {}\n{}",
                    cm.world,
                    describe_model(&cm.model).trim_end()
                ),
                1,
            )
        }
        Verdict::UnknownBeyondBound { bound } => {
            json["bound"] = json!(bound);
            (format!("UnknownBeyondBound\nno verdict within {bound} work units"), 3)
        }
    };
    Ok(Output { text, json, code })
}

fn report_output<S: System>(r: &ControlReport<S::World, S::Atom>) -> Output {
    let mut json = json!({
        "command": "verify-controls",
        "kind": r.kind,
        "pass": r.pass,
        "worlds_checked": r.worlds_checked,
    });
    let mut text = if r.pass {
        format!("pass: {:?} verified on {} worlds", r.kind, r.worlds_checked)
    } else {
        format!("fail: {:?}", r.kind)
    };
    if let Some(v) = &r.violation {
        json["violation"] = json!({
            "world": format!("{:?}", v.world),
            "condition": v.condition.to_string(),
            "reason": v.reason,
        });
        text.push_str(&format!(
            "\nat world {:?}: {}\nrequired: {}",
            v.world, v.reason, v.condition
        ));
    }
    if !r.pushed.is_empty() {
        let pushed: Vec<Value> = r.pushed.iter().map(|(w, p)| json!([format!("{w:?}"), p])).collect();
        json["pushed"] = Value::Array(pushed);
        let at: Vec<String> = r
            .pushed
            .iter()
            .filter(|(_, p)| *p)
            .map(|(w, _)| format!("{w:?}"))
            .collect();
        text.push_str(&format!("\npushed at: {}", at.join(" ")));
    }
    Output {
        text,
        json,
        code: if r.pass { 0 } else { 1 },
    }
}

fn run_verify(a: &VerifyArgs) -> Result<Output> {
    let text = read_file(&a.family)?;
    match &a.model {
        Some(path) => {
            let model: KripkeModel = serde_json::from_str(&read_file(path)?).context("model JSON")?;
            let family: ControlFamily<String> = serde_json::from_str(&text).context("family JSON")?;
            let r = verify_family(&model, &family, &a.base_world)?;
            Ok(report_output::<KripkeModel>(&r))
        }
        None => {
            let family: ControlFamily<_> = serde_json::from_str(&text).context("family JSON")?;
            let w = &a.window;
            let sys = SequenceSystem::new(Window::new(w.base.clone(), (0..w.alphabet).collect(), w.depth));
            let r = verify_family(&sys, &family, &w.base)?;
            Ok(report_output::<SequenceSystem>(&r))
        }
    }
}

fn simulation_output<A: std::fmt::Display>(engine: &str, r: &SimulationReport<Seq, A>) -> Result<Output> {
    let verdict = match &r.verdict {
        SimVerdict::Member(t) => format!("member of {t}"),
        SimVerdict::Pass => "pass".into(),
        SimVerdict::Mismatch { .. } => "mismatch".into(),
        SimVerdict::BaseNotRefuting => "base_not_refuting".into(),
    };
    let assignment: serde_json::Map<String, Value> = r
        .assignment
        .iter()
        .map(|(p, s)| (p.clone(), json!(s.to_string())))
        .collect();
    let mut json = json!({
        "command": "simulate",
        "engine": engine,
        "formula": r.formula.to_string(),
        "verdict": verdict,
        "assignment": assignment,
        "worlds_checked": r.pairs.len(),
        "base_refutes": r.base_refutes,
    });
    if let Some(cm) = &r.countermodel {
        json["countermodel"] = countermodel_json(cm)?;
    }
    if let SimVerdict::Mismatch {
        world,
        node,
        subformula,
        system,
        model,
    } = &r.verdict
    {
        json["mismatch"] = json!({
            "world": world, "node": node, "subformula": subformula.to_string(), "system": system, "model": model,
        });
    }
    let code = match r.verdict {
        SimVerdict::Member(_) | SimVerdict::Pass => 0,
        _ => 1,
    };
    Ok(Output {
        text: r.trace().trim_end().to_string(),
        json,
        code,
    })
}

fn run_simulate(a: &SimulateArgs) -> Result<Output> {
    let f = formula(&a.formula)?;
    match a.engine {
        Engine::S5 => {
            if !a.base.is_empty() {
                bail!("the S5 engine always starts at the empty sequence");
            }
            simulation_output("s5", &simulate_s5_over_sequences(&f)?)
        }
        Engine::S4 => {
            let (_, r) = simulate_s4_over_sequences(&f, a.base.clone())?;
            simulation_output("s4", &r)
        }
    }
}

fn load_oracle(path: &Path) -> Result<Box<dyn FragmentOracle>> {
    let text = read_file(path)?;
    let v: Value = serde_json::from_str(&text).context("oracle JSON")?;
    if v.get("kind").and_then(Value::as_str) == Some("never") {
        let n = v.get("fragment_count").and_then(Value::as_u64).unwrap_or(1);
        return Ok(Box::new(NeverProves {
            fragment_count: n as usize,
        }));
    }
    Ok(Box::new(ScriptedOracle::from_json(&text)?))
}

fn ua_state_output(command: &str, s: &UAState, one_at_a_time: bool) -> Result<Output> {
    let mut json = serde_json::to_value(s)?;
    json["command"] = json!(command);
    let mut text = format!("enumerated: {:?}", s.enumerated);
    if one_at_a_time {
        let derived = derive_concatenated(s, decode_sequence);
        text.push_str(&format!("\nderived: {derived:?}"));
        json["derived"] = json!(derived);
    }
    for st in &s.stages {
        text.push_str(&format!("\nstage {}: k = {}, released {:?}", st.stage, st.k, st.batch));
    }
    if !s.rejected.is_empty() {
        text.push_str(&format!("\nrejected grants: {}", s.rejected.len()));
    }
    text.push_str(&format!(
        "\nsteps: {}{}",
        s.steps,
        if s.halted_at_budget { " (budget exhausted)" } else { "" }
    ));
    Ok(Output { text, json, code: 0 })
}

fn run_ua(a: &OracleArgs, budget: u64) -> Result<(Box<dyn FragmentOracle>, UAState)> {
    let oracle = load_oracle(&a.oracle)?;
    let state = if a.one_at_a_time {
        run_one_at_a_time(oracle.as_ref(), a.program, budget)
    } else {
        run_universal(oracle.as_ref(), a.program, budget)
    };
    Ok((oracle, state))
}

fn run_ua_extend(a: &UaExtendArgs) -> Result<Output> {
    let script = ScriptedOracle::from_json(&read_file(&a.oracle.oracle)?)?;
    if script.program() != a.oracle.program {
        bail!(
            "the script grants proofs for program {}, not {}",
            script.program(),
            a.oracle.program
        );
    }
    let (_, state) = run_ua(&a.oracle, a.budget)?;
    if state.halted_at_budget {
        bail!(
            "the current script does not finish within {} steps; raise --budget",
            a.budget
        );
    }
    let ext = if a.oracle.one_at_a_time {
        script_extension_one_at_a_time(&state, &script, &a.target)
    } else {
        script_extension(&state, &script, &a.target)
    };
    match ext {
        Ok(ext) => {
            let script_json: Value = serde_json::from_str(&ext.to_json())?;
            let json = json!({
                "command": "ua-extend",
                "target": a.target,
                "current": state.enumerated,
                "extension": script_json,
            });
            Ok(Output {
                text: ext.to_json(),
                json,
                code: 0,
            })
        }
        Err(e @ potentia::Error::BudgetExhausted(_)) => {
            let json = json!({ "command": "ua-extend", "target": a.target, "error": e.to_string() });
            Ok(Output {
                text: format!("cannot extend: {e}"),
                json,
                code: 1,
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn run_railyard(a: &RailyardArgs) -> Result<Output> {
    let tree = match (&a.tree, &a.complete) {
        (Some(p), None) => serde_json::from_str::<PreTree>(&read_file(p)?).context("pre-tree JSON")?,
        (None, Some(c)) if c.len() == 3 => PreTree::complete(c[0], c[1], c[2])?,
        (None, Some(_)) => bail!("--complete takes levels,branching,cluster_size"),
        _ => bail!("give --tree or --complete"),
    };
    write_dot(&a.dot, &tree.frame().to_dot())?;
    let base: Seq = vec![0; a.offset];
    let (labels, rail) = railyard_encoding(&tree, a.offset)?;
    let sys = SequenceSystem::new(Window::for_rail(&rail, base.clone()));
    let r = potentia::control::is_railyard_labeling(&sys, &tree, &labels, &base)?;
    let mut out = report_output::<SequenceSystem>(&r);
    let mut witnesses = Vec::new();
    for (t, label) in labels.iter().enumerate() {
        let w = sys.find_accessible(&base, label)?;
        witnesses.push(json!({ "node": t, "witness": w }));
        if let Some(w) = &w {
            out.text.push_str(&format!("\nnode {t}: reached by {w:?}"));
        }
    }
    out.json["command"] = json!("railyard");
    out.json["tree"] = serde_json::to_value(&tree)?;
    out.json["climb_below"] = json!(rail.k());
    out.json["cluster_size"] = json!(rail.m());
    out.json["offset"] = json!(a.offset);
    out.json["nodes"] = Value::Array(witnesses);
    Ok(out)
}

fn names(toy: &ToyTheory, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&s| toy.name(s).to_string()).collect()
}

fn run_maximality(a: &MaximalityArgs) -> Result<Output> {
    let toy = ToyTheory::from_json(&read_file(&a.theory)?)?;
    let horizon = a.horizon.unwrap_or(toy.max_horizon());
    let mut json = json!({ "command": "maximality", "horizon": horizon });
    let mut text = String::new();
    let world: WorldTheory = match &a.world {
        Some(ns) => {
            let refs: Vec<&str> = ns.iter().map(String::as_str).collect();
            toy.world_by_names(&refs)?
        }
        None => {
            let order = if a.order.is_empty() {
                toy.existential().to_vec()
            } else {
                a.order.iter().map(|n| toy.id(n)).collect::<potentia::Result<_>>()?
            };
            let built = toy.build_maximal_existential_theory(&order)?;
            json["accepted"] = json!(names(&toy, &built.accepted));
            json["rejected"] = json!(names(&toy, &built.rejected));
            text.push_str(&format!(
                "greedy: accepted {:?}, rejected {:?}\n",
                names(&toy, &built.accepted),
                names(&toy, &built.rejected)
            ));
            built.world
        }
    };
    let members = names(&toy, &world.members());
    text.push_str(&format!("world: {members:?}\n"));
    json["world"] = json!(members);
    let report: MaximalityReport = toy.check_maximality_principle(&world, toy.existential(), horizon)?;
    text.push_str(&if report.passed {
        format!("maximality principle holds at horizon {horizon}")
    } else {
        format!("violations at horizon {horizon}: {:?}", report.violations)
    });
    text.push_str(&format!("\nexistential part maximal: {}", report.e_part_maximal));
    let code = if report.passed { 0 } else { 1 };
    json["report"] = serde_json::to_value(&report)?;
    Ok(Output { text, json, code })
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Decide(a) => run_decide(a, false),
        Command::Countermodel(a) => run_decide(a, true),
        Command::VerifyControls(a) => run_verify(a),
        Command::Simulate(a) => run_simulate(a),
        Command::UaRun(a) => {
            let (_, s) = run_ua(&a.oracle, a.budget)?;
            ua_state_output("ua-run", &s, a.oracle.one_at_a_time)
        }
        Command::UaExtend(a) => run_ua_extend(a),
        Command::Railyard(a) => run_railyard(a),
        Command::Maximality(a) => run_maximality(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(mut out) => {
            let text = if cli.json {
                out.json["schema_version"] = json!(SCHEMA_VERSION);
                serde_json::to_string_pretty(&out.json).expect("JSON output")
            } else {
                out.text
            };
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::from(out.code)
        }
        Err(e) => {
            let e = anyhow!(e);
            if cli.json {
                println!(
                    "{}",
                    json!({ "schema_version": SCHEMA_VERSION, "error": format!("{e:#}") })
                );
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
