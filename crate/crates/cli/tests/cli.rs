use std::path::PathBuf;
use std::process::{Command, Output};

use cqrel::channel::CQChannel;
use cqrel::duality::VerificationRecord;
use cqrel::exponents::ExponentReport;

fn cqrel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqrel"))
        .args(args)
        .env_remove("CQREL_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cqrel-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn bsc_e0(s: f64, p: f64) -> f64 {
    let g = (p.powf(1.0 / (1.0 + s)) + (1.0 - p).powf(1.0 / (1.0 + s))).log2();
    s - (1.0 + s) * g
}

#[test]
fn csv_header_and_bsc_values() {
    let o = cqrel(&["exponents", "--channel", "bsc:0.1", "--rates", "0.1,0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("R,E_lower,E_upper,s_lower,s_upper,vacuous_flag"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 2);
    // Random coding at R = 0.1 sits on the straight-line part: E0(1) − R.
    let e: f64 = rows[0][1].parse().unwrap();
    assert!((e - (bsc_e0(1.0, 0.1) - 0.1)).abs() < 1e-9, "{e}");
    // Above the critical rate both bounds agree.
    assert_eq!(rows[1][1], rows[1][2]);
    for row in &rows {
        assert_eq!(row.len(), 6);
        assert_eq!(row[5], "0");
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["exponents", "--channel", "pure2:0.4", "--rates", "0:0.6:0.1"];
    let a = cqrel(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_cqrel"))
        .args(args)
        .env("CQREL_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_mirrors_reports() {
    let o = cqrel(&["exponents", "--channel", "depol-out:0.2", "--rates", "0.2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let reports: Vec<ExponentReport> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r.rate == 0.2));
}

#[test]
fn spec_file_round_trip_and_output_flag() {
    let spec = scratch("bsc.json");
    std::fs::write(&spec, serde_json::to_string(&CQChannel::bsc(0.1).unwrap().to_spec(None)).unwrap()).unwrap();
    let out = scratch("curve.csv");
    let o = cqrel(&["exponents", "--channel", spec.to_str().unwrap(), "--rates", "0.1,0.3", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let builtin = stdout(&cqrel(&["exponents", "--channel", "bsc:0.1", "--rates", "0.1,0.3"]));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), builtin);
}

#[test]
fn validation_reports_state_index() {
    let mut spec = CQChannel::bsc(0.1).unwrap().to_spec(None);
    spec.states[1][0][1] = [0.3, 0.0];
    let path = scratch("bad.json");
    std::fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    let o = cqrel(&["exponents", "--channel", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("state 1"));
}

#[test]
fn exit_codes() {
    assert_eq!(cqrel(&["exponents"]).status.code(), Some(2));
    assert_eq!(cqrel(&["exponents", "--channel", "bsc:0.1", "--rates", "x"]).status.code(), Some(2));
    assert_eq!(cqrel(&["exponents", "--channel", "bsc:2"]).status.code(), Some(3));
    assert_eq!(cqrel(&["simulate", "--channel", "bsc:0.1", "--n", "9", "--m", "1"]).status.code(), Some(4));
    assert_eq!(cqrel(&["exponents", "--channel", "/nonexistent/w.json"]).status.code(), Some(5));
    let garbled = scratch("garbled.json");
    std::fs::write(&garbled, "{").unwrap();
    assert_eq!(cqrel(&["exponents", "--channel", garbled.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn simulate_pure_pair_passes() {
    let o = cqrel(&["simulate", "--channel", "pure2:0.5", "--n", "2", "--m", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["exhaustive"], true);
}

#[test]
fn verify_emits_passing_records() {
    let o = cqrel(&["verify", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let records: Vec<VerificationRecord> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(records.len() > 40);
    assert!(records.iter().all(|r| r.pass));
    assert_eq!(o.stdout, cqrel(&["verify", "--seed", "7"]).stdout);
}

#[test]
fn pa_and_dc_run() {
    let o = cqrel(&["pa", "--state", "depol-out:0.2", "--n", "3", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = cqrel(&["dc", "--state", "pure2:0.3", "--n", "3", "--k", "1", "--prior", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["error"].as_f64().unwrap() <= 1.0);
    assert_eq!(cqrel(&["dc", "--state", "pure2:0.3", "--n", "3", "--k", "1", "--prior", "0.9,0.5"]).status.code(), Some(3));
}
