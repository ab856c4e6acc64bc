use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const MINIMAL: &str = r#"
horizon = 10
seeds = 3
[domain]
shape = "ball"
dim = 2
radius = 1.0
[environment]
kind = "constant"
[[algorithm]]
kind = "tp_vr_opt"
predictor = "zero"
tuning = { mode = "manual", eta = 0.1, delta = 0.1 }
"#;

const SWEEP: &str = r#"
horizon = 2000
seeds = 4
[domain]
shape = "ball"
dim = 4
radius = 1.0
[environment]
kind = "linear_rademacher"
s_target = 10.0
[[algorithm]]
kind = "tp_vr_opt"
predictor = "zero"
tuning = { mode = "static", sensitivity = "oracle" }
[sweep]
axis = "s_target"
values = [10.0, 100.0, 1000.0]
"#;

fn bco(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bco"))
        .args(args)
        .current_dir(dir)
        .env_remove("BCO_SEED")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn minimal_run_has_zero_regret() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "min.toml", MINIMAL);
    let o = bco(&["run", &cfg, "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("out/summary.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "static_regret").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[col].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn runs_are_byte_identical_across_repeats_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let text = SWEEP.split("[sweep]").next().unwrap().replace("seeds = 4", "seeds = 6");
    let cfg = write_config(dir.path(), "run.toml", &text);
    for (out, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let o = bco(&["run", &cfg, "--out", out, "--workers", workers], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let read = |d: &str| fs::read(dir.path().join(d).join("summary.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_eq!(read("a"), read("c"));
    let manifest = |d: &str| fs::read(dir.path().join(d).join("manifest.json")).unwrap();
    assert_eq!(manifest("a"), manifest("c"));
}

#[test]
fn delta_at_least_in_radius_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &MINIMAL.replace("delta = 0.1", "delta = 1.0"));
    let o = bco(&["run", &cfg, "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("0 < delta < r"), "{}", stderr(&o));
}

#[test]
fn unknown_config_keys_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", &MINIMAL.replace("horizon = 10", "horizon = 10\nhorizn = 3"));
    assert_eq!(bco(&["run", &cfg], dir.path()).status.code(), Some(2));
}

#[test]
fn seed_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "min.toml", MINIMAL);
    let o = Command::new(env!("CARGO_BIN_EXE_bco"))
        .args(["run", &cfg, "--out", "out"])
        .current_dir(dir.path())
        .env("BCO_SEED", "40")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("out/summary.csv")).unwrap();
    let seeds: Vec<String> = rdr.records().map(|r| r.unwrap()[3].to_string()).collect();
    assert_eq!(seeds, ["40", "41", "42"]);
}

#[test]
fn sweep_writes_one_row_per_grid_point_and_a_valid_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.toml", SWEEP);
    let o = bco(&["sweep", &cfg, "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let text = fs::read_to_string(out.join("sweep-tp_vr_opt-zero.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "env_param,seeds,mean_regret,stderr,mean_S_T,mean_P_T");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("100.0,4,"));
    let svg = fs::read_to_string(out.join("sweep.svg")).unwrap();
    assert!(roxmltree::Document::parse(&svg).is_ok());

    // every artifact is in the manifest with its hash
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["complete"], true);
    let listed = manifest["artifacts"].as_array().unwrap();
    let on_disk = walk(&out).into_iter().filter(|p| !p.ends_with("manifest.json")).count();
    assert_eq!(listed.len(), on_disk);
    for a in listed {
        let bytes = fs::read(out.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
}

fn walk(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p.to_string_lossy().into_owned());
        }
    }
    out
}

#[test]
fn sweep_with_one_point_refuses_to_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "one.toml", &SWEEP.replace("[10.0, 100.0, 1000.0]", "[10.0]"));
    let o = bco(&["sweep", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least 3"));
}

#[test]
fn failed_slope_assertion_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{SWEEP}expected_slope = {{ low = 2.0, high = 3.0 }}\n");
    let cfg = write_config(dir.path(), "slope.toml", &text);
    let o = bco(&["sweep", &cfg, "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(dir.path().join("out/sweep.svg").exists());
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bco(&["verify", "nonsense"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("geometry"));
    let o = bco(&["verify", "geometry"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("sphere covariance") && table.contains("projection idempotence") && table.contains("[PASS]"));
}

#[test]
fn run_refuses_sweep_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.toml", SWEEP);
    assert_eq!(bco(&["run", &cfg], dir.path()).status.code(), Some(2));
}
