use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn summary(&self) -> Value {
        serde_json::from_str(&self.stdout).expect("summary is JSON")
    }

    fn file(&self, name: &str) -> Vec<u8> {
        fs::read(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
}

fn tilepress(dir: &Path, tag: &str, config: &str, args: &[&str]) -> Run {
    let cfg = dir.join(format!("{tag}.json"));
    fs::write(&cfg, config).unwrap();
    let out = dir.join(tag);
    let o = Command::new(env!("CARGO_BIN_EXE_tilepress"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env_remove("TILEPRESS_THREADS")
        .output()
        .expect("binary runs");
    Run {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
        out,
    }
}

const CARPET: &str = r#"{"map": {"m": 3}, "subsystem": "carpet", "levels": {"n_max": 4}}"#;
const FULL_ZERO: &str = r#"{"map": {"m": 3}, "subsystem": "full", "potential": {"constant": 0.0}, "levels": {"n_max": 3}}"#;

#[test]
fn describe_full_map() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "describe", FULL_ZERO, &["describe"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.summary();
    assert_eq!(s["deg"], 9);
    assert_eq!(s["tiles_n1"], 18);
    assert_eq!(s["pairs_n1"], 9);
    assert_eq!(s["post_card"], 4);
    assert_eq!(s["strongly_primitive"], true);
    assert!(r.out.join("describe.json").exists());
}

#[test]
fn entropy_of_carpet() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "entropy", CARPET, &["entropy"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.summary();
    assert!((s["h_top"].as_f64().unwrap() - 8f64.ln()).abs() < 1e-12);
    assert!((s["rho"].as_f64().unwrap() - 8.0).abs() < 1e-12);
    assert_eq!(s["A"], serde_json::json!([[4, 4], [4, 4]]));
}

#[test]
fn zero_potential_pressure_is_entropy() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "pressure", CARPET, &["pressure"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.summary();
    let [lo, hi] = [0, 1].map(|i| s["P_bracket"][i].as_f64().unwrap());
    assert!((lo - 8f64.ln()).abs() < 1e-12 && (hi - 8f64.ln()).abs() < 1e-12, "[{lo}, {hi}]");
    assert!((s["log_lambda"].as_f64().unwrap() - 8f64.ln()).abs() < 1e-9);
    let csv = String::from_utf8(r.file("pressure_levels.csv")).unwrap();
    assert!(csv.starts_with("n,log_z_centre,log_z_upper,rate_lower,rate_upper\r\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn verify_passes_on_carpet() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "verify", CARPET, &["verify"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(!r.stderr.contains("FAIL"), "{}", r.stderr);
    assert_eq!(r.summary()["failed"], 0);
    assert!(r.out.join("verify.csv").exists());
}

#[test]
fn injected_discontinuity_fails_gluing() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "jump", CARPET, &["verify", "--inject-discontinuity", "0.5"]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert!(r.stderr.contains("FAIL gluing"), "{}", r.stderr);
    let report: Value = serde_json::from_slice(&r.file("verify.json")).unwrap();
    let gluing = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "gluing").unwrap();
    assert_eq!(gluing["pass"], false);
}

#[test]
fn rate_check_names_flat_curve() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "flat", FULL_ZERO, &["verify", "--with-rate"]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert!(r.stderr.contains("FAIL rate"), "{}", r.stderr);
}

#[test]
fn over_capacity_suggests_smaller_level() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "cap", FULL_ZERO, &["tiles", "--n-max", "9"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("try --n-max"), "{}", r.stderr);
}

#[test]
fn bad_config_reports_position() {
    let d = TempDir::new().unwrap();
    let r = tilepress(d.path(), "bad", "{\n  \"map\": {\"m\": 3},\n  \"bogus\": 1\n}", &["describe"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 3"), "{}", r.stderr);
    let r = tilepress(d.path(), "m1", r#"{"map": {"m": 1}}"#, &["describe"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"map": {"m": 3}, "subsystem": "carpet", "potential": {"cos_cos": 0.3, "signed_sine": 0.2},
                 "grid": {"G": 33}, "levels": {"n_max": 3}}"#;
    let a = tilepress(d.path(), "t1", cfg, &["gibbs", "--threads", "1"]);
    let b = tilepress(d.path(), "t4", cfg, &["gibbs", "--threads", "4"]);
    let c = tilepress(d.path(), "t4b", cfg, &["gibbs", "--threads", "4"]);
    for r in [&a, &b, &c] {
        assert_eq!(r.code, 0, "{}", r.stderr);
    }
    for name in ["tile_measures.csv", "gibbs.json"] {
        assert_eq!(a.file(name), b.file(name), "{name}");
        assert_eq!(b.file(name), c.file(name), "{name}");
    }
}

#[test]
fn format_list_is_honoured() {
    let d = TempDir::new().unwrap();
    let cfg = r#"{"map": {"m": 3}, "subsystem": "carpet", "levels": {"n_max": 2}, "output": {"formats": ["json"]}}"#;
    let r = tilepress(d.path(), "json_only", cfg, &["pressure"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.out.join("pressure.json").exists());
    assert!(!r.out.join("pressure_levels.csv").exists());
}
