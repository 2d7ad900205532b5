use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adaptid::io::{
    read_autocorr, read_curve, read_eigenvalues, read_psd, read_report_document, read_trigger_log,
};
use adaptid_cli::tables::read_table;

const TABLE1_ROW: &str = r#"{
  "method": "lms_fir",
  "plant": {"b": [0.03, 0.24, 0.54, 0.8]},
  "input": {"kind": "four_level"},
  "mu": 0.045,
  "orders": {"n": 4},
  "seed": 7
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adaptid"));
    c.env_remove("ADAPTID_SEED");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_report_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "row.json", TABLE1_ROW);
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let report_path = dir.path().join("row_report.json");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let mut keys: Vec<&str> = json
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "config",
            "converged_at",
            "curve_file",
            "final_mse_db",
            "final_weights",
            "seed",
            "trigger_events"
        ]
    );
    let doc = read_report_document::<f64>(&report_path).unwrap();
    let curve = read_curve::<f64>(&dir.path().join(&doc.curve_file)).unwrap();
    assert!(!curve.is_empty());
    assert!(doc.converged_at.unwrap() < curve.len());
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "row.json", TABLE1_ROW);
    let out = dir.path().join("out");
    let read = |name: &str| std::fs::read(out.join(name)).unwrap();
    bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let first = (read("row_report.json"), read("row_curve.csv"));
    bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(first, (read("row_report.json"), read("row_curve.csv")));
}

#[test]
fn unknown_key_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        &TABLE1_ROW.replace("\"mu\"", "\"stepsize\""),
    );
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stepsize"), "{}", stderr(&o));
}

#[test]
fn divergent_step_size_exits_two_with_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "hot.json", &TABLE1_ROW.replace("0.045", "0.3"));
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("diverged at iteration"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn non_convergence_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = TABLE1_ROW.replace(
        "\"seed\": 7",
        "\"seed\": 7, \"run\": {\"max_iterations\": 20}",
    );
    let cfg = write_config(dir.path(), "short.json", &text);
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(dir.path().join("short_report.json").exists());
}

#[test]
fn usage_error_exits_one() {
    let o = bin().arg("run").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_env_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "row.json", TABLE1_ROW);
    let o = bin()
        .env("ADAPTID_SEED", "99")
        .arg("run")
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = read_report_document::<f64>(&dir.path().join("row_report.json")).unwrap();
    assert_eq!(doc.seed, Some(99));
    assert_eq!(doc.config.unwrap().seed, 99);
}

#[test]
fn hybrid_run_writes_trigger_log() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "method": "lms_ga",
      "plant": {"b": [0.03, 0.24, 0.54, 0.8]},
      "input": {"kind": "four_level"},
      "mu": 0.02,
      "orders": {"n": 4},
      "seed": 3,
      "lms_ga": {"m": 5, "d": 0.02, "gamma": 8, "gt": 1.0, "t_e": 8}
    }"#;
    let cfg = write_config(dir.path(), "hy.json", text);
    let o = bin().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let log = read_trigger_log::<f64>(&dir.path().join("hy_triggers.csv")).unwrap();
    assert!(log.iter().any(|e| e.triggered));
    assert!(log.iter().all(|e| e.iteration % 8 == 0));
}

#[test]
fn spectrum_reports_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let colored = TABLE1_ROW.replace(
        "\"kind\": \"four_level\"",
        "\"kind\": \"four_level\", \"colored\": true",
    );
    let cfg = write_config(dir.path(), "col.json", &colored);
    let o = bin().arg("spectrum").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["order"], 4);
    assert!(v["disparity"].as_f64().unwrap() > 1.2);
    assert!(v["tau"].as_f64().unwrap() > 0.0);

    let r = read_autocorr::<f64>(&dir.path().join("col_autocorr.csv")).unwrap();
    assert_eq!(r.lags.len(), 4);
    let psd = read_psd::<f64>(&dir.path().join("col_psd.csv")).unwrap();
    let eigs = read_eigenvalues::<f64>(&dir.path().join("col_eigenvalues.csv")).unwrap();
    assert_eq!(eigs.len(), 4);
    for l in eigs {
        assert!(l >= psd.min() - 1e-6 && l <= psd.max() + 1e-6);
    }
}

#[test]
fn estimate_gt_from_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("curve.csv");
    let mut text = String::from("iteration,eps_squared,mse_db_window\n");
    for i in 0..100 {
        let db = if i < 20 {
            -5.0 * i as f64
        } else if i % 2 == 0 {
            -159.0
        } else {
            -166.0
        };
        text.push_str(&format!("{i},{},{db}\n", 10f64.powf(db / 10.0)));
    }
    std::fs::write(&p, text).unwrap();
    let o = bin()
        .arg("estimate-gt")
        .arg(&p)
        .args(["--delta", "8"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["gt"].as_f64().unwrap() - 0.875).abs() < 1e-12);

    let flat = dir.path().join("rising.csv");
    let mut text = String::from("iteration,eps_squared,mse_db_window\n");
    for i in 0..100 {
        text.push_str(&format!("{i},1,{}\n", 20.0 * i as f64));
    }
    std::fs::write(&flat, text).unwrap();
    let o = bin()
        .arg("estimate-gt")
        .arg(&flat)
        .args(["--delta", "8"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reproduce_tables_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = bin()
        .arg("reproduce-tables")
        .arg("--out")
        .arg(&a)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    bin()
        .arg("reproduce-tables")
        .arg("--out")
        .arg(&b)
        .args(["--jobs", "4"])
        .status()
        .unwrap();
    for t in 1..=4 {
        let name = format!("table{t}.csv");
        assert_eq!(
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap()
        );
    }

    let t1 = read_table(&a.join("table1.csv")).unwrap();
    assert_eq!(t1.rows.len(), 9);
    assert_eq!(
        &t1.headers[..8],
        [
            "mu",
            "seed",
            "converged_at",
            "final_mse_db",
            "c1",
            "c2",
            "c3",
            "c4"
        ]
    );
    assert!(t1.column("paper_mse_db").is_some());

    let t3 = read_table(&a.join("table3.csv")).unwrap();
    for r in 0..t3.rows.len() {
        if t3.text(r, "status") == Some("converged") {
            assert!((t3.number(r, "b0").unwrap() - 0.6).abs() < 1e-4);
            assert!((t3.number(r, "a1").unwrap().abs() - 0.2).abs() < 1e-4);
        }
    }

    let t4 = read_table(&a.join("table4.csv")).unwrap();
    assert_eq!(t4.rows.len(), 6);
    for r in (0..6).step_by(2) {
        assert_eq!(t4.text(r, "method"), Some("lms"));
        assert_eq!(t4.text(r + 1, "method"), Some("lms_ga"));
        assert_eq!(t4.text(r, "seed"), t4.text(r + 1, "seed"));
        let lms = t4.number(r, "final_mse_db").unwrap();
        let hy = t4.number(r + 1, "final_mse_db").unwrap();
        assert!(hy <= lms, "seed row {r}: {hy} vs {lms}");
    }
}

#[test]
fn seed_env_changes_table_seeds() {
    let dir = tempfile::tempdir().unwrap();
    bin()
        .arg("reproduce-tables")
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    let base = read_table(&dir.path().join("table1.csv")).unwrap();
    let other = dir.path().join("other");
    bin()
        .env("ADAPTID_SEED", "5")
        .arg("reproduce-tables")
        .arg("--out")
        .arg(&other)
        .status()
        .unwrap();
    let moved = read_table(&other.join("table1.csv")).unwrap();
    assert_ne!(base.text(0, "seed"), moved.text(0, "seed"));
}
