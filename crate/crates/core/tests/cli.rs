use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn semiheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semiheat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_scenario(verb: &str, name: &str) -> Output {
    semiheat(&[verb, "--scenario", scenario(name).to_str().unwrap()])
}

#[test]
fn classify_reaction_blowup() {
    let o = run_scenario("classify", "reaction_blowup.scn");
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("classification: BlowupReaction\n"), "{s}");
    assert!(s.contains("(21): holds, exact"));
    assert!(s.contains("(211): holds, exact"));
}

#[test]
fn classify_small_data_lists_five_hypotheses() {
    let s = stdout(&run_scenario("classify", "small_data.scn"));
    assert!(s.starts_with("classification: GlobalSmallData\n"), "{s}");
    for label in ["(1.12):", "(1.12b):", "(1.12a):", "(1.13):", "(1.14):"] {
        assert!(s.contains(&format!("{label} holds")), "{label} in {s}");
    }
}

#[test]
fn malformed_expression_exits_2_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, "problem.u0 = 1\nproblem.f = \"s^\"\n").unwrap();
    let o = semiheat(&["classify", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax error at offset 2"));
}

#[test]
fn unknown_key_and_missing_file_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, "problem.u0 = 1\nproblem.colour = red\n").unwrap();
    assert_eq!(semiheat(&["classify", "--scenario", path.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("none.scn");
    let o = semiheat(&["simulate", "--scenario", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("none.scn"));
}

#[test]
fn simulate_reaction_summary_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = semiheat(&[
        "--out",
        dir.path().to_str().unwrap(),
        "simulate",
        "--scenario",
        scenario("reaction_blowup.scn").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("T_num=1.00±"), "{s}");
    assert!(s.trim_end().ends_with(", T_b=1.00, T_num ≤ T_b: PASS"), "{s}");
    let csv = std::fs::read_to_string(dir.path().join("series.csv")).unwrap();
    assert!(csv.starts_with("t,sup_norm,mass\n"));
    assert!(csv.lines().count() > 10);
}

#[test]
fn simulate_global_and_step_floor() {
    let o = run_scenario("simulate", "linear_growth.scn");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "ReachedHorizon t=5");
    let o = run_scenario("simulate", "step_floor.scn");
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("StepFloorHit"));
}

#[test]
fn snapshots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("s.scn");
    std::fs::write(&scn, "problem.u0 = \"1 + cos(pi*x)\"\ngrid.n = 17\nsim.t_end = 0.1\noutput.snapshot_times = 0, 0.05\n")
        .unwrap();
    let o = semiheat(&["--out", dir.path().to_str().unwrap(), "simulate", "--scenario", scn.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s0 = std::fs::read_to_string(dir.path().join("snapshot_000.csv")).unwrap();
    assert!(s0.starts_with("x,u\n0,2\n"), "{s0}");
    assert_eq!(s0.lines().count(), 18);
    assert!(dir.path().join("snapshot_001.csv").exists());
}

#[test]
fn verify_kernel_passes() {
    let o = semiheat(&["verify-kernel", "--length", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for g in ["G1", "G2", "G3", "G4", "G5"] {
        assert!(s.contains(&format!("{g}: PASS")), "{s}");
    }
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn sweep_columns() {
    let s = stdout(&run_scenario("sweep", "sweep_alpha.scn"));
    let tb: Vec<f64> = column(&s, "T_b").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(tb, [2.0, 1.0, 0.5]);
    let s = stdout(&run_scenario("sweep", "sweep_flux.scn"));
    assert_eq!(column(&s, "classification"), ["Inconclusive", "Inconclusive", "BlowupBoundary"]);
}

#[test]
fn sweep_is_deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for w in ["1", "8"] {
        let out = dir.path().join(w);
        let o = semiheat(&[
            "--out",
            out.to_str().unwrap(),
            "--workers",
            w,
            "sweep",
            "--scenario",
            scenario("sweep_flux.scn").to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        bodies.push(std::fs::read(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn analyze_verbs() {
    let o = semiheat(&["analyze", "comparison", "--scenario", scenario("comparison.scn").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("comparison: PASS"));
    let o = semiheat(&["analyze", "m-series", "--scenario", scenario("boundary_blowup.scn").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decreasing: true"));
    let o = semiheat(&["analyze", "family", "--seed", "11"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("0 violations in 10 pairs"));
}

#[test]
fn supersolution_requires_small_data_class() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.scn");
    let text = std::fs::read_to_string(scenario("reaction_blowup.scn")).unwrap();
    std::fs::write(&path, text + "analysis.supersolution_a = 0.5\n").unwrap();
    let o = semiheat(&["analyze", "supersolution", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not GlobalSmallData"));
}
