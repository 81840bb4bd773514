//! End-to-end checks of the command-line binary: determinism, exit codes,
//! and file formats.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stablewalk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

#[test]
fn sample_is_deterministic_and_validates() {
    let out1 = run(&["sample", "--law", "pareto", "--alpha", "1.5", "--count", "3", "--seed", "7"]);
    let out2 = run(&["sample", "--law", "pareto", "--alpha", "1.5", "--count", "3", "--seed", "7"]);
    assert!(out1.status.success());
    assert_eq!(out1.stdout, out2.stdout);
    let text = String::from_utf8(out1.stdout).unwrap();
    assert!(text.starts_with("index,value\n"));
    assert_eq!(text.lines().count(), 4);

    let bad = run(&["sample", "--law", "pareto", "--alpha", "2.5", "--count", "1", "--seed", "0"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("1 < alpha < 2"));

    let bad = run(&[
        "sample", "--law", "perturbed", "--alpha", "1.5", "--A", "0.9", "--K", "0.3", "--count",
        "1", "--seed", "0",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("A + K"));
}

#[test]
fn norm_evaluates_known_paths() {
    let dir = tempfile::tempdir().unwrap();
    let write_path = |name: &str, f: &dyn Fn(f64) -> f64| {
        let mut text = String::from("t,value\n");
        for k in 0..=8 {
            let t = k as f64 / 8.0;
            text.push_str(&format!("{t},{}\n", f(t)));
        }
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let identity = write_path("id.csv", &|t| t);
    let out = run(&["norm", "--path-file", identity.to_str().unwrap(), "--eta", "0.25", "--p", "1.2"]);
    assert!(out.status.success());
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    // (1/(p+1) + 2/(q(q+1)))^(1/p) with q = p(1 - eta) = 0.9
    let expect = (1.0f64 / 2.2 + 2.0 / (0.9 * 1.9)).powf(1.0 / 1.2);
    assert!((value - expect).abs() <= 1e-6 * expect, "{value} vs {expect}");

    let zero = write_path("zero.csv", &|_| 0.0);
    let out = run(&["norm", "--path-file", zero.to_str().unwrap(), "--eta", "0.25", "--p", "1.2"]);
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert_eq!(value, 0.0);

    let constant = write_path("const.csv", &|_| 2.0);
    let out = run(&["norm", "--path-file", constant.to_str().unwrap(), "--eta", "0.3", "--p", "1.4"]);
    let value: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((value - 2.0).abs() < 1e-9);

    // malformed file: non-dyadic grid
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "t,value\n0,0\n0.4,1\n1,2\n").unwrap();
    let out = run(&["norm", "--path-file", bad.to_str().unwrap(), "--eta", "0.25", "--p", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("cfg.txt");
    std::fs::write(
        &p,
        "alpha = 1.5\neta = 0.2\np = 1.2\nn_values = 2,3,4\nreps = 20\n\
         n_ref_offset = 3\nseed = 11\npool_size = 100000\n",
    )
    .unwrap();
    p
}

#[test]
fn sweeps_are_worker_invariant_and_rerun_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    for cmd in ["interp-error", "moment-sweep", "rate-sweep"] {
        let d1 = dir.path().join(format!("{cmd}-w1"));
        let d2 = dir.path().join(format!("{cmd}-w8"));
        let d3 = dir.path().join(format!("{cmd}-rerun"));
        for (d, w) in [(&d1, "1"), (&d2, "8"), (&d3, "1")] {
            let out = run(&[cmd, "--config", cfg, "--out", d.to_str().unwrap(), "--workers", w]);
            assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        }
        let stem = cmd.replace('-', "_");
        for suffix in [".csv", "_summary.json", ".gp"] {
            let name = format!("{stem}{suffix}");
            assert_eq!(read(&d1, &name), read(&d2, &name), "{name} differs across workers");
            assert_eq!(read(&d1, &name), read(&d3, &name), "{name} differs across reruns");
        }
        // manifest exists and round-trips the config
        let manifest: serde_json::Value =
            serde_json::from_slice(&read(&d1, &format!("{stem}_manifest.json"))).unwrap();
        assert_eq!(manifest["config"]["alpha"], 1.5);
        assert_eq!(manifest["config"]["seed"], serde_json::Value::Null); // key is master_seed
        assert_eq!(manifest["config"]["master_seed"], 11);
        assert!(manifest["output_paths"].as_array().unwrap().len() == 4);
    }
}

#[test]
fn sweep_schemas_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "moment-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--n-values",
        "1,2",
        "--reps",
        "15",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(read(&out_dir, "moment_sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,estimate,stderr");
    // counts are 2^n for the overridden levels 1 and 2
    assert!(lines[1].starts_with("2,"));
    assert!(lines[2].starts_with("4,"));
    let summary: serde_json::Value =
        serde_json::from_slice(&read(&out_dir, "moment_sweep_summary.json")).unwrap();
    assert!(summary["bounded_ratio"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["config"]["reps"], 15);

    // invalid override rejected with exit 2
    let out = run(&[
        "moment-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--alpha",
        "2.5",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // unknown config key rejected with exit 2
    let bad_cfg = dir.path().join("bad.txt");
    std::fs::write(&bad_cfg, "omega = 1\n").unwrap();
    let out = run(&[
        "moment-sweep",
        "--config",
        bad_cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn interp_error_summary_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "interp-error",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(read(&out_dir, "interp_error.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "m,estimate,stderr");
    let summary: serde_json::Value =
        serde_json::from_slice(&read(&out_dir, "interp_error_summary.json")).unwrap();
    for key in ["slope", "predicted_slope", "r_squared", "slope_within_band"] {
        assert!(!summary[key].is_null(), "missing {key}");
    }
    let gp = String::from_utf8(read(&out_dir, "interp_error.gp")).unwrap();
    assert!(gp.contains("interp_error.csv"));
}

#[test]
fn rate_sweep_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "rate-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(read(&out_dir, "rate_sweep.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "n,m,distance_mean,distance_stderr,gap_walk,gap_stable"
    );
    assert_eq!(csv.lines().count(), 4);
    let summary: serde_json::Value =
        serde_json::from_slice(&read(&out_dir, "rate_sweep_summary.json")).unwrap();
    for key in ["kappa", "upsilon", "slope", "slope_ratio", "decay_at_least_predicted"] {
        assert!(!summary[key].is_null(), "missing {key}");
    }
}
