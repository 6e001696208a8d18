use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cureassess"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn simulate_to(dir: &Path, seed: &str) -> String {
    let path = dir.join(format!("sim{seed}.csv"));
    let p = path.to_str().unwrap();
    let out = run(&["simulate", "--n", "1000", "--seed", seed, "--time-unit", "years", "--out", p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    p.to_string()
}

#[test]
fn all_censored_input_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.csv");
    std::fs::write(&p, "time,event\n1,0\n2,0\n3,0\n").unwrap();
    let out = run(&["assess", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no events: fitting undefined"));
    assert!(out.stdout.is_empty());
}

#[test]
fn json_verdict_and_restrict_flip() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate_to(dir.path(), "11");

    let out = run(&["assess", &p, "--format", "json", "--time-unit", "years"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "appropriate");
    assert_eq!(doc["appropriate"], true);
    assert_eq!(doc["dataset"]["time_unit"], "years");

    let out = run(&["assess", &p, "--format", "json", "--restrict", "0.345"]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_ne!(doc["verdict"], "appropriate");
    assert_eq!(doc["config"]["restrict"], 0.345);
}

#[test]
fn text_report_has_three_steps() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate_to(dir.path(), "11");
    let out = run(&["assess", &p, "--families", "weibull,exponential"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let a = text.find("Step 1: Clinical judgment").unwrap();
    let b = text.find("Step 2: Visual evidence").unwrap();
    let c = text.find("Step 3: Quantitative evidence").unwrap();
    assert!(a < b && b < c);
    assert!(!text.contains("gamma"));
}

#[test]
fn plots_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let p = simulate_to(dir.path(), "5");
    let svg1 = dir.path().join("a.svg");
    let svg2 = dir.path().join("b.svg");
    for s in [&svg1, &svg2] {
        let out = run(&["assess", &p, "--families", "weibull", "--plot", "svg", "--plot-path", s.to_str().unwrap()]);
        assert!(out.status.code() != Some(1));
    }
    let a = std::fs::read(&svg1).unwrap();
    assert_eq!(a, std::fs::read(&svg2).unwrap());
    assert!(a.starts_with(b"<svg"));

    let out = run(&["km", &p, "--plot", "csv"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("time,survival,n_at_risk,n_events\n0,1,1000,0\n"));
}

#[test]
fn simulate_is_seeded_and_restrict_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read_to_string(simulate_to(dir.path(), "3")).unwrap();
    let out = run(&["simulate", "--n", "1000", "--seed", "3", "--time-unit", "years"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), a);

    let src = dir.path().join("sim3.csv");
    let once = dir.path().join("r1.csv");
    let twice = dir.path().join("r2.csv");
    for (from, to) in [(&src, &once), (&once, &twice)] {
        let out = run(&["restrict", from.to_str().unwrap(), "--restrict", "2", "--out", to.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let r1 = std::fs::read_to_string(&once).unwrap();
    assert_eq!(r1, std::fs::read_to_string(&twice).unwrap());
    for line in r1.lines().skip(1) {
        let (t, e) = line.split_once(',').unwrap();
        let t: f64 = t.parse().unwrap();
        assert!(t <= 2.0);
        if t == 2.0 {
            assert_eq!(e, "0");
        }
    }
    assert_eq!(r1.lines().count(), 1001);
}

#[test]
fn truth_file_and_custom_design() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.json");
    let out = run(&[
        "simulate", "--n", "50", "--family", "gamma", "--params", "shape=2,rate=1",
        "--censoring", "exponential:0.1", "--cure-fraction", "0.2", "--truth", truth.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(truth).unwrap()).unwrap();
    assert_eq!(t["subjects"].as_array().unwrap().len(), 50);
    assert_eq!(t["config"]["latency"]["family"], "gamma");
    assert_eq!(t["config"]["latency"]["shape"], 2.0);
}

#[test]
fn usage_and_input_errors_exit_one() {
    assert_eq!(run(&["assess"]).status.code(), Some(1));
    assert_eq!(run(&["assess", "x.csv", "--format", "xml"]).status.code(), Some(1));
    let out = run(&["assess", "/nonexistent/file.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/file.csv"));
    let out = run(&["simulate", "--params", "shape=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_cell_names_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.csv");
    std::fs::write(&p, "days,status\n10,1\nabc,0\n").unwrap();
    let out = run(&["km", p.to_str().unwrap(), "--time-col", "days", "--event-col", "status"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 2") && err.contains("days"), "{err}");
}
