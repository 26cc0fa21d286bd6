use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hslab"))
        .args(args)
        .env_remove("HSLAB_WORKERS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("missing {key} in {v}"))
}

fn error_line(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn constants_report() {
    let out = hslab(&["constants", "--n", "3", "--p", "2", "--s", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(num(&v, "p_star"), 6.0);
    assert_eq!(num(&v, "p_star_s"), 4.0);
    assert_eq!(num(&v, "mu1"), 0.25);
    assert_eq!(v["grid_m"], 4096);
    assert!(v.get("wall_time_s").is_none());
}

#[test]
fn extremal_matches_bubble_anchor() {
    let out = hslab(&["extremal", "--n", "3", "--p", "2", "--mu", "0", "--s", "0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(num(&v, "anchor_rel_gap") < 5e-3);
    assert_eq!(v["converged"], true);
}

#[test]
fn pohozaev_vanishes_at_critical_power() {
    let out = hslab(&["pohozaev", "--q", "6", "--n", "3", "--p", "2", "--s", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(num(&v, "functional_value").abs() < 1e-10);
    assert!(num(&v, "identity_residual") < 1e-6);
}

#[test]
fn exit_codes() {
    let bad = hslab(&["constants", "--p", "5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_line(&bad)["error"], "validation");

    let usage = hslab(&["constants", "--nope"]);
    assert_eq!(usage.status.code(), Some(2));
    error_line(&usage);

    let stalled = hslab(&["solve", "--s", "1", "--max-iter", "1"]);
    assert_eq!(stalled.status.code(), Some(3));
    assert_eq!(error_line(&stalled)["error"], "numerical");
    // partial report still written
    assert_eq!(json(&stalled)["converged"], false);

    let missing = hslab(&["pohozaev", "--profile-in", "/definitely/not/here.txt"]);
    assert_eq!(missing.status.code(), Some(4));
    assert_eq!(error_line(&missing)["error"], "io");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sample\nn = 4\np = 2\ns = 1.5\nm = 512\n").unwrap();
    let out = hslab(&["constants", "--config", cfg.to_str().unwrap(), "--s", "0.5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["n"], 4);
    assert_eq!(v["grid_m"], 512);
    assert_eq!(num(&v, "s"), 0.5);

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let bad = hslab(&["constants", "--config", cfg.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = |p: &Path| {
        vec![
            "sweep".to_string(),
            "--mus".into(),
            "0,0.1,0.2".into(),
            "--ss".into(),
            "0.5,1".into(),
            "--csv".into(),
            p.display().to_string(),
        ]
    };
    let run = |p: &Path| {
        let owned = args(p);
        hslab(&owned.iter().map(String::as_str).collect::<Vec<_>>())
    };
    assert!(run(&a).status.success());
    let parallel = Command::new(env!("CARGO_BIN_EXE_hslab"))
        .args(args(&b))
        .env("HSLAB_WORKERS", "3")
        .output()
        .unwrap();
    assert!(parallel.status.success());
    assert_eq!(read(&a), read(&b));

    let mut rdr = csv::Reader::from_path(&a).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(&r[col("status")], "ok");
        let phi: f64 = r[col("phi")].parse().unwrap();
        let c: f64 = r[col("threshold")].parse().unwrap();
        assert!(phi > 0.0 && phi < c);
    }
}

#[test]
fn sweep_records_failed_cells() {
    let out = hslab(&["sweep", "--mus", "0,0.5", "--ss", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let status: Vec<String> = rdr.records().map(|r| r.unwrap()[2].to_string()).collect();
    assert_eq!(status, ["ok", "error"]);
    let bad = hslab(&["sweep", "--task", "dance"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn profile_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let prof = dir.path().join("u.txt");
    let p = prof.to_str().unwrap();
    let out = hslab(&[
        "extremal",
        "--s",
        "1",
        "--mu",
        "0.1",
        "--m",
        "1024",
        "--profile-out",
        p,
    ]);
    assert!(out.status.success());
    let first = hslab(&[
        "pohozaev",
        "--s",
        "1",
        "--mu",
        "0.1",
        "--q",
        "4",
        "--profile-in",
        p,
    ]);
    let second = hslab(&[
        "pohozaev",
        "--s",
        "1",
        "--mu",
        "0.1",
        "--q",
        "4",
        "--profile-in",
        p,
    ]);
    assert!(first.status.success());
    let (a, b) = (json(&first), json(&second));
    assert_eq!(a["grid_m"], 1024);
    assert_eq!(a, b);
    // the written extremal has unit Hardy-Sobolev mass
    let text = read(&prof);
    let (grid, u) = hslab_core::io::read_profile(text.as_bytes(), None).unwrap();
    let mass = hslab_core::quadrature::weighted_power_integral(&grid, &u, 4.0, 1.0).unwrap();
    assert!((mass - 1.0).abs() < 1e-9, "{mass}");
}

#[test]
fn tables_for_scan_translate_concentrate() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.csv");
    let out = hslab(&[
        "translate",
        "--mu",
        "-1",
        "--alphas",
        "0,10,50",
        "--csv",
        t.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(read(&t).lines().count(), 4);
    assert_eq!(json(&out)["monotone"], true);

    let bad = hslab(&["translate", "--mu", "0.1"]);
    assert_eq!(bad.status.code(), Some(2));

    let c = hslab(&[
        "concentrate",
        "--s",
        "1",
        "--mu",
        "0.1",
        "--rates",
        "1,4,16",
    ]);
    assert!(c.status.success());
    let v = json(&c);
    assert!(num(&v, "sobolev_ratio") <= 1.0 + 1e-3 && num(&v, "hardy_sobolev_ratio") <= 1.0 + 1e-3);

    let s = hslab(&["scan-q", "--s", "1", "--mu", "0.1", "--q-values", "2,6"]);
    assert!(s.status.success());
    let v = json(&s);
    assert!(num(&v, "row0_collapse_ratio") < 1e-3);
    assert!(num(&v, "row1_collapse_ratio") > 1e-2);
}

#[test]
fn timing_is_opt_in() {
    let v = json(&hslab(&["constants", "--timing"]));
    assert!(num(&v, "wall_time_s") >= 0.0);
}
