use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn evotree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evotree"))
        .args(args)
        .current_dir(dir)
        .env_remove("EVOTREE_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SIM: &[&str] = &[
    "simulate",
    "--tree",
    "balanced:n=255,arity=2",
    "--evolver",
    "uniform",
    "--speedup",
    "2/1",
    "--init",
    "reversed",
    "--seed",
    "1",
];

#[test]
fn simulate_writes_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = evotree(dir.path(), SIM);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(lines.next().unwrap(), "j,D_j,A_j,dt_j,evolver_steps,max_load,step_index");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 50);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.summary.json")).unwrap()).unwrap();
    for key in ["config", "steady_state_mean_D", "final_D", "lemma_violations", "max_load_over_run"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
    assert_eq!(summary["lemma_violations"]["step_identity"], 0);
    assert_eq!(stdout(&out).trim(), fs::read_to_string(dir.path().join("run.summary.json")).unwrap().trim());
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(evotree(a.path(), SIM).status.success());
    assert!(evotree(b.path(), SIM).status.success());
    for f in ["run.csv", "run.summary.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(evotree(dir.path(), SIM).status.success());
    let csv = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    let echo = csv.lines().next().unwrap().trim_start_matches("# config: ");
    fs::write(dir.path().join("cfg.json"), echo).unwrap();
    let out = evotree(dir.path(), &["simulate", "--config", "cfg.json", "--name", "again"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv, fs::read_to_string(dir.path().join("again.csv")).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"tree": "path:n=32", "evolver": "idle", "run_length": "3", "seed": 5}"#,
    )
    .unwrap();
    let out = evotree(dir.path(), &["simulate", "--config", "cfg.json", "--iterations", "2"]);
    assert!(out.status.success());
    let s: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(s["config"]["tree"], "path:n=32");
    assert_eq!(s["config"]["run_length"], "2");
    assert_eq!(s["iterations"], 2);
}

#[test]
fn speedup_parsing() {
    let dir = tempfile::tempdir().unwrap();
    let ok = evotree(dir.path(), &["simulate", "--tree", "path:n=16", "--speedup", "3/2", "--iterations", "2"]);
    assert!(ok.status.success());
    let bad = evotree(dir.path(), &["simulate", "--speedup", "0.9"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("speedup"));
    let below = evotree(dir.path(), &["simulate", "--speedup", "1/2"]);
    assert!(!below.status.success());
}

#[test]
fn invalid_tree_spec_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = evotree(dir.path(), &["simulate", "--tree", "star:n=5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    let out = Command::new(env!("CARGO_BIN_EXE_evotree"))
        .args(["simulate", "--tree", "path:n=8", "--iterations", "1"])
        .current_dir(dir.path())
        .env("EVOTREE_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(target.join("run.csv").exists());
}

#[test]
fn adversary_script_reports_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = evotree(dir.path(), &["adversary-script", "--alpha", "2", "--beta", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("opt=28"), "{text}");
    let script = fs::read_to_string(dir.path().join("wings_a2_b3.script")).unwrap();
    let m: usize = script.lines().next().unwrap().parse().unwrap();
    assert_eq!(script.lines().count(), m + 1);
    assert!(text.contains(&format!("m={m} ")));
    assert!(dir.path().join("wings_a2_b3.tree").exists());
    assert!(dir.path().join("wings_a2_b3.roles").exists());
}

#[test]
fn script_file_replays_in_simulation() {
    let dir = tempfile::tempdir().unwrap();
    assert!(evotree(dir.path(), &["adversary-script", "--alpha", "3", "--beta", "2", "--out", "w.script"]).status.success());
    let out = evotree(
        dir.path(),
        &[
            "simulate",
            "--tree",
            "file:w.tree",
            "--evolver",
            "script:w.script",
            "--speedup",
            "3/2",
            "--iterations",
            "script-end",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(s["evolver_swaps"], s["script_length"]);
}

#[test]
fn verify_levels() {
    let dir = tempfile::tempdir().unwrap();
    let quick = evotree(dir.path(), &["verify", "--level", "quick"]);
    assert!(quick.status.success());
    assert!(stdout(&quick).contains("PASS  oracle"));
    let full = evotree(dir.path(), &["verify", "--level", "full"]);
    assert!(full.status.success());
    let text = stdout(&full);
    assert!(text.contains("wings(1,2"), "{text}");
    assert!(text.contains("wings(2,2"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn sweep_writes_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = evotree(
        dir.path(),
        &["sweep", "--sizes", "64,256,1024", "--speedups", "2/1", "--evolvers", "uniform", "--jobs", "2"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert!(lines[1].starts_with("n,c,evolver,runs,failures,steady_mean_D,D_over_n,max_load,max_load_over_sqrt_n,D_over_n2"));
    assert_eq!(lines.len(), 5);
}

#[test]
fn sweep_reports_failed_cells_but_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = evotree(dir.path(), &["sweep", "--sizes", "1,16", "--iterations", "2"]);
    assert!(!out.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn sweep_wings_fills_quadratic_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = evotree(
        dir.path(),
        &[
            "sweep",
            "--family",
            "wings:beta=4",
            "--sizes",
            "100",
            "--speedups",
            "3/2",
            "--evolvers",
            "wings-script",
            "--init",
            "exact",
            "--iterations",
            "script-end",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
    assert!(row[9].parse::<f64>().unwrap() > 0.0);
}
