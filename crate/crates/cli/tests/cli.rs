use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn localsyn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_localsyn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "error")
        .output()
        .expect("run localsyn")
}

const FAST: [&str; 6] = ["--horizon", "20", "--theta-points", "128", "--e-max", "3"];

#[test]
fn sweep_csv_has_header_and_one_row_per_extent() {
    let dir = tempfile::tempdir().unwrap();
    let out = localsyn(&[&["sweep", "--emit-gnuplot"][..], &FAST].concat(), dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "E,J_sl,J_io,J_inf,gap_sl,gap_io,T_used,residual_grad,status");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let mut prev = f64::INFINITY;
    for (row, e) in rows.iter().zip(1..) {
        assert_eq!(row[0], e.to_string());
        let j_sl: f64 = row[1].parse().unwrap();
        let j_io: f64 = row[2].parse().unwrap();
        assert!((j_sl - j_io).abs() <= 1e-8 * j_sl);
        assert!(j_sl <= prev);
        prev = j_sl;
        assert_eq!(row[6], "20");
        assert_eq!(row[8], "ok");
    }
    let script = fs::read_to_string(dir.path().join("sweep.gp")).unwrap();
    assert!(script.contains("'sweep.csv'"));
}

#[test]
fn param_flag_limits_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = localsyn(&[&["sweep", "--param", "sl"][..], &FAST].concat(), dir.path());
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert!(!cols[1].is_empty());
        assert!(cols[2].is_empty());
        assert!(cols[5].is_empty());
    }
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 3\n\n[plant]\nalpha = 0.9\nkappa = 0.2\n\n[sweep]\ne_min = 0\ne_max = 5\n\n[solver]\nhorizon = 20\n\n[oracle]\ntheta_points = 128\n",
    )
    .unwrap();
    let out = localsyn(&["sweep", "--config", cfg.to_str().unwrap(), "--e-max", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let extents: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(extents, ["0", "1"]);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = localsyn(&["sweep", "--e-min", "4", "--e-max", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("sweep.csv").exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[plant]\nomega = 1\n").unwrap();
    let out = localsyn(&["oracle", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = localsyn(&["oracle", "--config", "/nonexistent/run.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_localsyn"))
        .args(["oracle", "--theta-points", "128"])
        .env("LOCALSYN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_prints_cost_and_writes_integrand() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_localsyn"))
        .args(["oracle", "--theta-points", "128", "--out"])
        .arg(dir.path())
        .env("LOCALSYN_THREADS", "2")
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let j: f64 = stdout.trim().strip_prefix("J_inf = ").unwrap().parse().unwrap();
    assert!((j - 31.4108).abs() < 1e-3);
    let csv = fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 129);
    let mean: f64 = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum::<f64>()
        / 128.0;
    assert!((mean.sqrt() - j).abs() < 1e-12 * j);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = localsyn(&["verify"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.starts_with("NOTE E=0"));
    assert!(report.trim_end().ends_with("0 failed"));

    let out = localsyn(&["verify", "--inject-fault"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[FAIL]"));
}

#[test]
fn random_params_audit_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = localsyn(&["verify", "--random-params", "--seed", "9"], dir.path());
    let b = localsyn(&["verify", "--random-params", "--seed", "9"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn dump_maps_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = localsyn(&["dump-maps", "--e", "1"], dir.path());
    assert!(out.status.success());
    let path = dir.path().join("maps_E1.json");
    let text = fs::read_to_string(&path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["extent"], 1);
    for param in ["sl", "io"] {
        for stage in ["raw", "assembled"] {
            let pair = &v[param][stage];
            let blocks = pair["blocks"].as_array().unwrap();
            assert_eq!(blocks.len(), 6);
            for b in blocks {
                assert!(b["name"].is_string());
                assert!(b["out_extent"].is_u64());
                for entry in b["v"].as_array().unwrap() {
                    assert!(entry["row"].is_i64() && entry["col"].is_i64());
                    for t in entry["terms"].as_array().unwrap() {
                        let t = t.as_array().unwrap();
                        assert_eq!(t.len(), 2);
                        assert!(t[0].is_i64() && t[1].is_f64());
                    }
                }
                for entry in b["h"].as_array().unwrap() {
                    assert!(entry.get("col").is_none());
                }
            }
        }
        let assembled = &v[param]["assembled"];
        assert_eq!(assembled["input_extent"], 1);
        for b in assembled["blocks"].as_array().unwrap() {
            for entry in b["v"].as_array().unwrap().iter().chain(b["h"].as_array().unwrap()) {
                assert!(entry["terms"].as_array().unwrap().iter().all(|t| t[0].as_i64().unwrap() <= 0));
            }
        }
    }

    let again = tempfile::tempdir().unwrap();
    assert!(localsyn(&["dump-maps", "--e", "1"], again.path()).status.success());
    assert_eq!(text, fs::read_to_string(again.path().join("maps_E1.json")).unwrap());
}
