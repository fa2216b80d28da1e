use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hopfdde::cli::Report;
use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_hopfdde");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn published() -> Value {
    json!({"a1": 0.13, "a2": 0.13, "a12": 0.06, "b1": 0.2, "b2": 0.4, "a": 4.0, "n": 3, "alpha": 0.2, "tau": 0.1})
}

fn demo() -> Value {
    json!({"a1": 0.1, "a2": 0.2, "a12": 1.0, "b1": 1.0, "b2": 0.5, "a": 100.0, "n": 8, "alpha": 0.2, "tau": 1.0})
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn equilibrium_json_has_published_y10() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("published.json");
    let out = run(&["equilibrium", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let y10 = v["equilibrium"]["y10"].as_f64().unwrap();
    assert!((y10 - 21.03417191).abs() < 1e-6, "y10 {y10}");
}

#[test]
fn reports_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("published.json");
    for cmd in ["equilibrium", "stability", "normalform"] {
        let out = run(&[cmd, "--config", cfg.to_str().unwrap()], dir.path());
        let report: Report = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        let again: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(report, again);
    }
}

#[test]
fn pretty_output_is_text() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("published.json");
    let out = run(&["equilibrium", "--pretty", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(serde_json::from_str::<Value>(&text).is_err());
    assert!(text.contains("y10"));
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["equilibrium"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config"));
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("real_n.json", json!({"params": {"n": 2.5}})),
        ("unknown.json", json!({"params": {"gamma": 1.0}})),
        ("negative.json", json!({"params": {"b1": -1.0}})),
        ("alpha.json", json!({"params": {"alpha": 1.5}})),
    ];
    for (name, cfg) in cases {
        let path = write_config(dir.path(), name, &cfg);
        let out = run(&["equilibrium", "--config", path.to_str().unwrap()], dir.path());
        assert_eq!(out.status.code(), Some(1), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    std::fs::write(dir.path().join("broken.json"), "{\"params\": ").unwrap();
    let out = run(&["equilibrium", "--config", "broken.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["bifurcate"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn stability_without_certified_point_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("published.json");
    let out = run(&["stability", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let v = stdout_json(&out);
    assert!(v["hopf_points"].as_array().unwrap().is_empty());
    assert!(v["selected"].is_null());
}

#[test]
fn normalform_needs_a_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.json", &json!({"params": published()}));
    let out = run(&["normalform", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("evaluate_at"));
}

#[test]
fn normalform_at_certified_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "c.json", &json!({"params": demo()}));
    let out = run(&["normalform", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["source"], "certified");
    assert!(v["comparison"].is_null());
    assert_eq!(v["variants"].as_array().unwrap().len(), 2);
}

#[test]
fn alpha_one_has_no_delay_hopf() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = published();
    p["alpha"] = json!(1.0);
    let path = write_config(dir.path(), "c.json", &json!({"params": p}));
    let out = run(&["stability", "--config", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let messages: Vec<&str> = v["messages"].as_array().unwrap().iter().map(|m| m.as_str().unwrap()).collect();
    assert!(messages.contains(&"no delay-induced Hopf (h=0)"), "{messages:?}");
}

#[test]
fn equilibrium_x10_is_inverse_b1() {
    let dir = tempfile::tempdir().unwrap();
    let mut p = published();
    p["b1"] = json!(0.5);
    let path = write_config(dir.path(), "c.json", &json!({"params": p}));
    let v = stdout_json(&run(&["equilibrium", "--config", path.to_str().unwrap()], dir.path()));
    assert!((v["equilibrium"]["x10"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

fn polylines(svg: &str) -> usize {
    svg.matches("<polyline").count()
}

#[test]
fn simulate_writes_csv_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let (dt, t_end, decimation) = (1e-2, 20.0, 7usize);
    let cfg = json!({
        "params": published(),
        "simulate": {"dt": dt, "t_end": t_end, "decimation": decimation},
    });
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = run(&["simulate", "--config", path.to_str().unwrap(), "--out-prefix", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("run_trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,y1,x2,y2");
    let expected = (t_end / dt / decimation as f64 + 1e-9).floor() as usize + 1;
    assert_eq!(lines.count(), expected);

    for name in ["run_y1.svg", "run_y2.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(polylines(&svg), 1, "{name}");
    }

    let first = std::fs::read(dir.path().join("run_y1.svg")).unwrap();
    let again = run(&["simulate", "--config", path.to_str().unwrap(), "--out-prefix", "run"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first, std::fs::read(dir.path().join("run_y1.svg")).unwrap());
}

#[test]
fn simulate_overlay_adds_waveform() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "params": demo(),
        "simulate": {"dt": 1e-2, "t_end": 60.0, "tau_factor": 1.05, "overlay_waveform": true},
    });
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = run(&["simulate", "--config", path.to_str().unwrap(), "--out-prefix", "ov"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("ov_y1.svg")).unwrap();
    assert_eq!(polylines(&svg), 2);
    assert_eq!(stdout_json(&out)["overlay"], true);
}

#[test]
fn scan_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "params": published(),
        "scan": {"tau_range": {"lo": 0.1, "hi": 0.3, "steps": 1, "relative_to_tau0": false}, "dt": 1e-2, "t_end": 100.0},
    });
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = run(&["scan", "--config", path.to_str().unwrap(), "--out-prefix", "one"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["rows"].as_array().unwrap().len(), 1);
    let csv = std::fs::read_to_string(dir.path().join("one_scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn scan_below_critical_delay_decays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "params": demo(),
        "scan": {"tau_range": {"lo": 0.3, "hi": 0.8, "steps": 4}, "dt": 1e-2, "t_end": 400.0},
    });
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = Command::new(BIN)
        .args(["scan", "--config", path.to_str().unwrap(), "--out-prefix", "low"])
        .current_dir(dir.path())
        .env("HOPFDDE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["threads"], 2);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["classification"], "decay", "{row}");
    }
}
