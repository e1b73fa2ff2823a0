use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn cra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cra"))
        .args(args)
        .env_remove("CRA_SOLVE_DATA")
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn k4(dir: &Path) -> PathBuf {
    let path = dir.join("k4.edges");
    std::fs::write(&path, "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
    path
}

#[test]
fn generate_rrg_writes_edges_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.edges");
    let o = cra(&["generate", "rrg", "--n", "1000", "--d", "20", "--seed", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let edges = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(edges, 10_000);
    let manifest = read_json(&dir.path().join("g.edges.manifest.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["config"]["d"], 20);
}

#[test]
fn generate_rejects_impossible_regular_graph() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad.edges");
    let o = cra(&["generate", "rrg", "--n", "5", "--d", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn generate_dbm_has_both_groups() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let o = cra(&["generate", "dbm", "--n1", "50", "--n2", "50", "--seed", "1", "--out", s(&out)]);
    assert!(o.status.success());
    let inst = read_json(&out);
    assert_eq!(inst["n1"].as_u64().unwrap() + inst["n2"].as_u64().unwrap(), 100);
    assert_eq!(inst["C"].as_array().unwrap().len(), 2500);
}

#[test]
fn solve_k4_mis() {
    let dir = tempfile::tempdir().unwrap();
    let g = k4(dir.path());
    let out = dir.path().join("run");
    let o = cra(&["solve", s(&g), "--problem", "mis", "--arch", "direct", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result = read_json(&out.join("result.json"));
    assert_eq!(result["best_cost"], -1.0);
    assert_eq!(result["feasible"], true);
    let ones = result["best_x"].as_array().unwrap().iter().filter(|v| v.as_u64() == Some(1)).count();
    assert_eq!(ones, 1);
    assert_eq!(read_json(&out.join("manifest.json"))["status"], "ok");
    assert!(String::from_utf8_lossy(&o.stdout).contains("independent set: 1 nodes"));
}

#[test]
fn flags_override_config_and_conflicts_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let g = k4(dir.path());
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "arch = \"direct\"\n[solve]\nlr = 0.5\nseeds = 1\nmax_epochs = 50\n").unwrap();
    let out = dir.path().join("run");
    let o = cra(&[
        "solve", s(&g), "--problem", "mis", "--config", s(&cfg), "--lr", "0.2", "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("--lr 0.2 overrides config value 0.5"), "{stderr}");
    let manifest = read_json(&out.join("manifest.json"));
    let solver = &manifest["config"]["solver"];
    assert_eq!(solver["optimizer"]["lr"], 0.2);
    assert_eq!(solver["max_epochs"], 50);
    assert_eq!(solver["model"]["arch"], "direct");
}

#[test]
fn validation_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = k4(dir.path());
    let g = s(&g);
    for args in [
        vec!["solve", g, "--problem", "mis", "--bogus"],
        vec!["solve", g, "--problem", "mis", "--no-anneal", "--gamma0", "-3"],
        vec!["solve", g, "--problem", "mis", "--alpha", "3"],
        vec!["solve", g, "--problem", "coloring"],
        vec!["solve", "/nonexistent/graph.edges", "--problem", "mis"],
        vec!["baseline", "dga", g, "--problem", "maxcut"],
    ] {
        let o = cra(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let bad_cfg = dir.path().join("bad.toml");
    std::fs::write(&bad_cfg, "[solve]\nlearning_rate = 1\n").unwrap();
    let o = cra(&["solve", g, "--problem", "mis", "--config", s(&bad_cfg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_lists_solver_flags() {
    let o = cra(&["solve", "--help"]);
    let help = String::from_utf8_lossy(&o.stdout);
    for flag in [
        "--gamma0", "--rate", "--alpha", "--tolerance", "--patience", "--lr", "--weight-decay",
        "--no-anneal", "--trace-every", "--jobs", "--seeds", "--max-epochs", "--arch", "--config",
    ] {
        assert!(help.contains(flag), "missing {flag}");
    }
}

#[test]
fn baselines_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let g = k4(dir.path());
    let out = dir.path().join("b");
    let o = cra(&["baseline", "dga", s(&g), "--out", s(&out)]);
    assert!(o.status.success());
    let b = read_json(&out.join("baseline.json"));
    assert_eq!(b["mean"], 0.25);
    let out = dir.path().join("e");
    let o = cra(&["exact", s(&g), "--problem", "maxcut", "--out", s(&out)]);
    assert!(o.status.success());
    let e = read_json(&out.join("exact.json"));
    assert_eq!(e["solution"]["penalized_cost"], -4.0);
    let o = cra(&["baseline", "exact", s(&g), "--problem", "mis", "--out", s(&dir.path().join("e2"))]);
    assert!(o.status.success());
}

#[test]
fn bench_partial_failure_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.toml");
    std::fs::write(
        &suite,
        "name = \"p\"\nproblem = \"mis\"\ngraph = \"rrg\"\nsizes = [30]\ndegrees = [3]\nsolvers = [\"dga\", \"exact\"]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = cra(&["bench", s(&suite), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(csv.contains(",dga,"));
    assert_eq!(read_json(&out.join("manifest.json"))["status"], "partial");
}

#[test]
fn empty_suite_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.toml");
    std::fs::write(&suite, "name = \"e\"\nproblem = \"mis\"\ngraph = \"rrg\"\nsolvers = [\"dga\"]\n").unwrap();
    let o = cra(&["bench", s(&suite), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("sweep.toml");
    std::fs::write(
        &spec,
        r#"gamma0 = [-2.0, -1.0]
rate = [0.01]
[suite]
name = "grid"
problem = "maxcut"
graph = "rrg"
sizes = [10]
degrees = [3]
solvers = ["cra-direct"]
[suite.solve]
seeds = 1
max_epochs = 400
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = cra(&["sweep", s(&spec), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("gamma0,rate,alpha,suite,"));
    // two grid points, three metric rows each
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn data_dir_resolves_instances() {
    let dir = tempfile::tempdir().unwrap();
    k4(dir.path());
    let out = dir.path().join("b");
    let o = Command::new(env!("CARGO_BIN_EXE_cra"))
        .args(["baseline", "rga", "k4.edges", "--seeds", "2", "--out", s(&out)])
        .env("CRA_SOLVE_DATA", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn plain_loop_on_dense_graph_reports_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("dense.edges");
    let o = cra(&["generate", "rrg", "--n", "200", "--d", "100", "--seed", "3", "--out", s(&g)]);
    assert!(o.status.success());
    let o = cra(&[
        "solve", s(&g), "--problem", "mis", "--no-anneal", "--arch", "gcn", "--seeds", "1",
        "--trace-every", "10", "--out", s(&dir.path().join("run")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("plateau: seed 0 stuck"), "{stdout}");
}
