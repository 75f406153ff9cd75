use std::path::Path;
use std::process::{Command, Output};

fn tbpsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbpsa")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_writes_csv_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = tbpsa(&[
        "run",
        "--algo",
        "tbpsa",
        "--fn",
        "sphere",
        "--dim",
        "5",
        "--budget",
        "20",
        "--workers",
        "20",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("evaluations=20 generations=1"));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "run_id,algorithm,objective,dimension,budget,num_workers,seed,eval_index,sigma,lambda_eff,best_fitness,reco_fitness"
    );
    assert_eq!(lines.len(), 2);
}

#[test]
fn grid_score_and_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.txt");
    std::fs::write(
        &cfg,
        "algorithms: tbpsa naive_tbpsa random_search\nobjective: fn=sphere dim=2 shift=1\nobjective: fn=rastrigin dim=2 shift=2 seed=1\nbudgets: 200\nworkers: 1 4\nseeds: 3\n",
    )
    .unwrap();
    let records = dir.path().join("records.json");
    let matrix = dir.path().join("matrix.json");
    let o = tbpsa(&["grid", p(&cfg), "--out", p(&records), "--score-out", p(&matrix)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("36 runs"));

    let rescored = dir.path().join("rescored.json");
    let o = tbpsa(&["score", p(&records), "--out", p(&rescored)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&matrix).unwrap(), std::fs::read_to_string(&rescored).unwrap());

    let csv = dir.path().join("records.csv");
    let o = tbpsa(&["export", p(&records), "--out", p(&csv)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() > 36);
}

#[test]
fn verifiers_report_pass_or_fail() {
    let o = tbpsa(&["verify-martingale", "--runs", "200", "--generations", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS log_sigma_drift"));

    let o = tbpsa(&["verify-variance", "--runs", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = tbpsa(&["verify-sigma", "--runs", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    // an impossible threshold fails with exit status 1
    let o = tbpsa(&["verify-plateau", "--runs", "30", "--budget", "2000", "--radius", "1", "--threshold", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL escape_fraction"));

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("trap.json");
    let o = tbpsa(&["verify-trap", "--runs", "30", "--budget", "500", "--threshold", "0", "--out", p(&report)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&report).unwrap().contains("retention_fraction"));
}

#[test]
fn usage_and_runtime_errors() {
    assert_eq!(tbpsa(&["run", "--algo", "nope"]).status.code(), Some(2));
    assert_eq!(tbpsa(&["run", "--budget", "0"]).status.code(), Some(2));
    assert_eq!(tbpsa(&["verify-plateau", "--radius", "-1", "--runs", "5"]).status.code(), Some(2));
    assert_eq!(tbpsa(&[]).status.code(), Some(2));
    let o = tbpsa(&["score", "/definitely/missing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/definitely/missing.json"));
}
