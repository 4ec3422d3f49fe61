use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn xbar(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xbar"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&xbar(&["analytic"], d)), 0);
    assert_eq!(code(&xbar(&["--set", "device.r_off=5e3", "analytic"], d)), 2);
    assert_eq!(code(&xbar(&["--set", "device.nope=1", "analytic"], d)), 2);
    fs::write(d.join("bad.json"), "{\"channel\": 3").unwrap();
    assert_eq!(code(&xbar(&["--config", "bad.json", "analytic"], d)), 2);
    assert_eq!(code(&xbar(&["design-rules", "--k-max", "10"], d)), 3);
    assert_eq!(code(&xbar(&["figures", "fig99"], d)), 4);
}

#[test]
fn design_rules_default_chain() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&xbar(&["design-rules", "--n-rows", "1024", "--t-pw", "us"], dir.path()));
    assert_eq!(v["m_tol"], 12);
    assert!((v["k"].as_f64().unwrap() - 16.686).abs() < 1e-9);
}

#[test]
fn mc_brackets_analytic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "mc", "--n-r", "64", "--f", "50", "--t-pw", "1e-4", "--m-tol", "3", "--duration", "5",
        "--seed", "3",
    ];
    let v = json(&xbar(&args, dir.path()));
    let p = v["p_analytic"].as_f64().unwrap();
    let est = &v["estimate"];
    assert!(est["ci_low"].as_f64().unwrap() <= p && p <= est["ci_high"].as_f64().unwrap());
    assert_eq!(est["n_trials"], 50_000);
    assert_eq!(json(&xbar(&args, dir.path())), v);
}

#[test]
fn solve_profile_and_oracle_agree() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("inst.json"), r#"{"on_rows": [1, 5], "active_rows": [1, 2, 5]}"#).unwrap();
    let set = ["--set", "channel.n_rows=8"];
    let fast = json(&xbar(&[&set[..], &["solve", "inst.json"]].concat(), d));
    let dense = json(&xbar(&[&set[..], &["solve", "inst.json", "--oracle"]].concat(), d));
    let (a, b) = (fast["i_sl"].as_f64().unwrap(), dense["i_sl"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-12 * a);

    let csv = xbar(&[&set[..], &["solve", "inst.json", "--csv"]].concat(), d);
    assert_eq!(code(&csv), 0);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("row,active,state,drive_drop_v,sl_voltage_v,ir_drop_v,branch_current_a")
    );
    assert_eq!(lines.count(), 8);

    fs::write(d.join("oob.json"), r#"{"on_rows": [9]}"#).unwrap();
    assert_ne!(code(&xbar(&[&set[..], &["solve", "oob.json"]].concat(), d)), 0);
}

#[test]
fn emulate_trace_header_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("m.csv"), "0,1,0\n1,0,1\n").unwrap();
    fs::write(d.join("t.csv"), "input_index,start_s\n0,0\n1,5e-7\n").unwrap();
    for mode in ["ideal", "solver"] {
        let out = xbar(
            &[
                "--out", "trace.csv", "emulate", "--matrix", "m.csv", "--trains", "t.csv",
                "--t-pw", "1e-6", "--duration", "3e-6", "--mode", mode,
            ],
            d,
        );
        let summary = json(&out);
        assert_eq!(summary["channels_fired"], serde_json::json!([0, 1, 2]));
        assert_eq!(summary["passed"], true);
        let trace = fs::read_to_string(d.join("trace.csv")).unwrap();
        assert_eq!(
            trace.lines().next(),
            Some("time_s,channel,i_sl_a,fired,expected,error_class")
        );
    }
    let poisson = xbar(
        &["emulate", "--matrix", "m.csv", "--poisson", "f=1e5", "--duration", "1e-4"],
        d,
    );
    assert_eq!(code(&poisson), 0);
}

#[test]
fn figures_are_byte_identical_across_runs_and_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for name in ["fig8", "fig10", "demo_fig2", "error_fig3"] {
        assert_eq!(code(&xbar(&["--out", "a", "--jobs", "1", "figures", name], d)), 0);
        assert_eq!(code(&xbar(&["--out", "b", "--jobs", "4", "figures", name], d)), 0);
        for file in [format!("{name}.csv"), format!("{name}.params.json")] {
            let a = fs::read(d.join("a").join(&file)).unwrap();
            let b = fs::read(d.join("b").join(&file)).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{file}");
        }
    }
}

#[test]
fn sweep_from_flags_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = xbar(&["sweep", "--axis", "channel.n_rows=64,128", "--axis", "channel.r_line=1,2.5"], d);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().starts_with("64,1,"));

    fs::write(
        d.join("cfg.json"),
        r#"{"sweep": {"table": "error", "axes": [{"path": "simulation.m_tol", "values": [5, 10, 15]}]}}"#,
    )
    .unwrap();
    let out = xbar(&["--config", "cfg.json", "--out", "err.csv", "sweep"], d);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(d.join("err.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("n_r,f_hz,t_pw_s,m_tol,p_err"));
    assert_eq!(text.lines().count(), 4);

    assert_eq!(code(&xbar(&["sweep", "--axis", "channel.bogus=1,2"], d)), 2);
}

#[test]
fn calibrate_splits_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&xbar(&["calibrate", "--total-leak", "1e-8", "--n-fets", "256"], dir.path()));
    assert!((v["i_leak_per_fet"].as_f64().unwrap() - 1e-8 / 256.0).abs() < 1e-24);
}
