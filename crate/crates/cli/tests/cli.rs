use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn swbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swbench"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_lp_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = swbench(dir.path(), &["verify", "lp", "--grid", "32", "--samples", "10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("passed"));
    let o = swbench(dir.path(), &["verify", "semigroup", "--grid", "32", "--json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["name"], "semigroup");
}

#[test]
fn run_writes_artifacts_and_report_recomputes_them() {
    let dir = tempfile::tempdir().unwrap();
    let o = swbench(
        dir.path(),
        &["run", "sw", "--preset", "trig", "--checkpoints", "--out", "out"],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let run = dir.path().join("out/trig");
    for f in ["config.toml", "ledger.csv", "summary.json", "checkpoints/states.json"] {
        assert!(run.join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["code_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(summary["scenario"]["grid"]["n"], 32);
    let header = fs::read_to_string(run.join("ledger.csv")).unwrap();
    assert!(header.starts_with("time,q_cl,ubar_cl,ubar_l1,beta,v,h1,"));

    let o = swbench(dir.path(), &["report", "out/trig", "--recompute"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("recomputed from checkpoint: identical"));
}

#[test]
fn identical_config_gives_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = swbench(dir.path(), &["run", "sw", "--preset", "trig", "--name", "a"]);
    assert_eq!(code(&o), 0);
    let o = swbench(
        dir.path(),
        &["run", "sw", "--config", "runs/a/config.toml", "--name", "b"],
    );
    assert_eq!(code(&o), 0);
    let read = |run: &str, f: &str| fs::read(dir.path().join("runs").join(run).join(f)).unwrap();
    assert_eq!(read("a", "ledger.csv"), read("b", "ledger.csv"));
    let strip_name = |b: Vec<u8>| String::from_utf8(b).unwrap().replace("\"b\"", "\"a\"");
    assert_eq!(
        strip_name(read("a", "summary.json")),
        strip_name(read("b", "summary.json"))
    );
}

#[test]
fn unknown_keys_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = swbench(dir.path(), &["run", "sw", "--preset", "trig", "--name", "x"]);
    assert_eq!(code(&o), 0);
    let cfg = fs::read_to_string(dir.path().join("runs/x/config.toml")).unwrap();
    fs::write(
        dir.path().join("bad.toml"),
        cfg.replace("[run]\n", "[run]\nt_fianl = 1.0\n"),
    )
    .unwrap();
    let o = swbench(dir.path(), &["run", "sw", "--config", "bad.toml"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_fianl"));
    assert_eq!(code(&swbench(dir.path(), &["run", "sw", "--preset", "nope"])), 1);
    assert_eq!(code(&swbench(dir.path(), &["sweep", "nope"])), 1);
}

#[test]
fn blow_up_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"
name = "collapse"

[grid]
dim = 2
n = 32

[initial]
family = "near-vacuum"
rho_min = 1e-3
a_u = 0.1

[run]
t_final = 0.05
"#;
    fs::write(dir.path().join("c.toml"), cfg).unwrap();
    let o = swbench(dir.path(), &["run", "sw", "--config", "c.toml"]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).contains("BLOW-UP"));
    let summary = fs::read_to_string(dir.path().join("runs/collapse/summary.json")).unwrap();
    assert!(summary.contains("BlowUp"));
}

#[test]
fn inadmissible_auto_horizon_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = swbench(dir.path(), &["run", "sw", "--preset", "trig", "--T", "auto"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    assert!(stdout(&o).contains("first violated inequality: H0"));
}

#[test]
fn sweeps_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = swbench(dir.path(), &["sweep", "damping"]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("runs/damping/damping.csv").is_file());

    let o = swbench(
        dir.path(),
        &["sweep", "uniqueness", "--grid", "32", "--n", "4,8", "--T", "0.05"],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let table = fs::read_to_string(dir.path().join("runs/band-limited-uniqueness/uniqueness.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(table.starts_with("n,n_ref,beta_delta,"));

    let o = swbench(dir.path(), &["sweep", "convergence", "--T", "0.05"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(dir.path().join("runs/trig-convergence/convergence.json").is_file());
}
