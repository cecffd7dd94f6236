use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use potentia::decide::Countermodel;
use potentia::universal::{run_universal, ScriptedOracle};
use serde_json::Value;

fn potentia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_potentia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn decide_member() {
    let o = potentia(&["decide", "--theory", "s4", "[]p->p"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("Member"));
}

#[test]
fn decide_non_member_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("out.dot");
    let o = potentia(&[
        "decide",
        "--theory",
        "s4",
        "<>[]p->[]<>p",
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).lines().next(), Some("NonMember"));
    let text = fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph") && text.contains("cluster_"));
}

#[test]
fn never_proving_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let never = write(dir.path(), "never.json", r#"{"kind": "never", "fragment_count": 10}"#);
    let o = potentia(&["--json", "ua-run", "--oracle", &never, "--budget", "1000"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["enumerated"], serde_json::json!([]));
    assert_eq!(v["halted_at_budget"], true);
    assert!(stdout(&potentia(&["ua-run", "--oracle", &never, "--budget", "1000"])).starts_with("enumerated: []"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&potentia(&["decide", "--theory", "s4", "[]p->"])), 2);
    assert_eq!(code(&potentia(&["decide", "--theory", "s4", "--nope", "p"])), 2);
    assert_eq!(code(&potentia(&["decide", "--theory", "s4.tba", "p"])), 2);
    assert_eq!(code(&potentia(&["frobnicate"])), 2);
    assert_eq!(
        code(&potentia(&[
            "decide",
            "--theory",
            "s4",
            "~(<>p & <>q & <>~p)",
            "--bound",
            "1"
        ])),
        3
    );
}

#[test]
fn json_countermodel_round_trips() {
    let o = potentia(&["--json", "countermodel", "--theory", "S4.3", "<>[]p->p"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["verdict"], "non_member");
    let cm: Countermodel = serde_json::from_value(v["countermodel"].clone()).unwrap();
    assert_eq!(cm.model.world_count(), 2);
    assert!(!cm.model.eval(cm.world, &potentia::parse("<>[]p->p").unwrap()).unwrap());
}

#[test]
fn json_output_is_stable() {
    let args = ["--json", "decide", "--theory", "s5", "(<>p & <>q) -> <>(p & q)"];
    assert_eq!(potentia(&args).stdout, potentia(&args).stdout);
}

#[test]
fn formula_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.txt", "[]p -> [][]p\n");
    let o = potentia(&["decide", "--theory", "s4", &format!("@{f}")]);
    assert_eq!(code(&o), 0);
}

#[test]
fn extension_reruns_to_target() {
    let dir = tempfile::tempdir().unwrap();
    let script = r#"[{"stage": 0, "k": 5, "batch": [7, 7]}]"#;
    let path = write(dir.path(), "s.json", script);
    let o = potentia(&["ua-extend", "--oracle", &path, "--target", "7,7,1,2"]);
    assert_eq!(code(&o), 0);
    let ext = ScriptedOracle::from_json(stdout(&o).trim()).unwrap();
    let combined = ScriptedOracle::from_json(script).unwrap().then(&ext);
    assert_eq!(run_universal(&combined, 0, 100).enumerated, vec![7, 7, 1, 2]);

    let used = write(dir.path(), "u.json", r#"[{"stage": 0, "k": 1, "batch": [3]}]"#);
    assert_eq!(code(&potentia(&["ua-extend", "--oracle", &used, "--target", "3,4"])), 1);
}

#[test]
fn control_verification() {
    let dir = tempfile::tempdir().unwrap();
    let button = write(dir.path(), "b.json", r#"{"kind": "button", "statements": ["rho1"]}"#);
    assert_eq!(code(&potentia(&["verify-controls", "--family", &button])), 0);
    let switch = write(dir.path(), "s.json", r#"{"kind": "switch", "statements": ["rho1"]}"#);
    let o = potentia(&["--json", "verify-controls", "--family", &switch]);
    assert_eq!(code(&o), 1);
    assert!(json(&o)["violation"]["reason"].as_str().unwrap().contains("rho1"));

    let model = write(
        dir.path(),
        "m.json",
        r#"{"worlds": 2, "access": [[0,0],[0,1],[1,0],[1,1]], "valuation": {"p": [1]}}"#,
    );
    let sw = write(dir.path(), "p.json", r#"{"kind": "switch", "statements": ["p"]}"#);
    assert_eq!(
        code(&potentia(&["verify-controls", "--family", &sw, "--model", &model])),
        0
    );
}

#[test]
fn simulations() {
    let o = potentia(&["--json", "simulate", "--engine", "s4", "<>[]p->[]<>p"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["base_refutes"], true);
    let o = potentia(&["simulate", "--engine", "s5", "<>p -> []p"]);
    assert_eq!(code(&o), 0);
    let o = potentia(&["--json", "simulate", "--engine", "s5", "[]p -> p"]);
    assert_eq!(json(&o)["verdict"], "member of S5");
}

#[test]
fn railyard_command() {
    let o = potentia(&["--json", "railyard", "--complete", "2,2,2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 6);
    assert_eq!(code(&potentia(&["railyard", "--complete", "2,2"])), 2);
}

#[test]
fn maximality_command() {
    let dir = tempfile::tempdir().unwrap();
    let toy = write(
        dir.path(),
        "toy.json",
        r#"{"sentences": ["a", "b", "c"], "rules": {"nogoods": [["a", "b"]]}, "fragments": [[]], "existential": ["a", "b", "c"]}"#,
    );
    let o = potentia(&["--json", "maximality", "--theory", &toy, "--order", "b,a,c"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["accepted"], serde_json::json!(["b", "c"]));
    let o = potentia(&["--json", "maximality", "--theory", &toy, "--world", "a"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["report"]["violations"], serde_json::json!(["c"]));
}

#[test]
fn help_lists_every_command() {
    let help = stdout(&potentia(&["--help"]));
    for c in [
        "decide",
        "countermodel",
        "verify-controls",
        "simulate",
        "ua-run",
        "ua-extend",
        "railyard",
        "maximality",
    ] {
        assert!(help.contains(c), "{c}");
    }
}
