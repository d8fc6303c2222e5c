//! End-to-end runs of the `tamed` binary on temporary output directories.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn tamed(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tamed"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| v.to_string().parse().unwrap())
}

#[test]
fn help_documents_exit_codes() {
    let o = Command::new(env!("CARGO_BIN_EXE_tamed"))
        .arg("--help")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    for line in [
        "2  usage",
        "3  window truncation",
        "4  hypothesis refused",
        "5  verification failure",
    ] {
        assert!(text.contains(line), "missing `{line}` in help");
    }
}

#[test]
fn plane_growth_fits_quadratic_area() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("plane.toml");
    let o = tamed(&["growth", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("growth.csv")).unwrap();
    assert!(csv.starts_with("r,area,perimeter,total_curvature,min_grad_R\n"));
    assert_eq!(csv.lines().count(), 9);
    let fit = json(&dir.path().join("growth_fit.json"));
    assert_eq!(fit["schema_version"], 1);
    assert_eq!(fit["kind"], "growth_fit");
    assert!((num(&fit["report"]["fit"]["p_area"]) - 2.0).abs() <= 0.01);
    assert!(fit["report"]["verdicts"]["quadratic_area"].as_bool().unwrap());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = [
        "tamed",
        "--surface",
        "enneper",
        "--radii",
        "2:40:6:log",
        "--resolution",
        "96",
    ];
    assert_eq!(code(&tamed(&args, a.path())), 0);
    assert_eq!(code(&tamed(&args, b.path())), 0);
    let (x, y) = (
        fs::read(a.path().join("tamed.json")).unwrap(),
        fs::read(b.path().join("tamed.json")).unwrap(),
    );
    assert_eq!(x, y);
}

#[test]
fn reports_carry_config_hash_and_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let o = tamed(
        &[
            "gauss-bonnet",
            "--surface",
            "plane",
            "--radii",
            "2:6:2",
            "--resolution",
            "64",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let r = json(&dir.path().join("gauss_bonnet.json"));
    assert_eq!(r["meta"]["config_hash"].as_str().unwrap().len(), 64);
    assert!((num(&r["meta"]["tolerances"]["gauss_bonnet"]) - 0.02).abs() < 1e-15);
    assert!(num(&r["report"]["gb_residual"]) < 0.02);

    let other = tempfile::tempdir().unwrap();
    tamed(
        &[
            "gauss-bonnet",
            "--surface",
            "plane",
            "--radii",
            "2:6:2",
            "--resolution",
            "64",
            "--seed",
            "7",
        ],
        other.path(),
    );
    let s = json(&other.path().join("gauss_bonnet.json"));
    assert_ne!(r["meta"]["config_hash"], s["meta"]["config_hash"]);
}

#[test]
fn catenoid_sandwich_middle_is_four_pi() {
    let dir = tempfile::tempdir().unwrap();
    let o = tamed(&["chern-osserman", "--surface", "catenoid"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("chern_osserman.json"));
    let middle = num(&r["report"]["middle"]);
    assert!((middle / (4.0 * PI) - 1.0).abs() <= 0.05, "middle = {middle}");
    assert_eq!(r["report"]["chi"], 0);
}

#[test]
fn untamed_surface_is_refused_with_hypothesis_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = tamed(
        &["chern-osserman", "--surface", "helicoid(1)", "--resolution", "64"],
        dir.path(),
    );
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis"));
}

#[test]
fn ball_inside_core_is_refused_with_hypothesis_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = tamed(
        &[
            "tone",
            "--surface",
            "catenoid",
            "--radii",
            "1:2:2",
            "--resolution",
            "32",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn uncovered_radius_exits_with_truncation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.toml");
    fs::write(&cfg, "[surface]\nname = \"plane\"\nwindow = [-1.0, 1.0, -1.0, 1.0]\n").unwrap();
    let o = tamed(
        &["growth", "--config", cfg.to_str().unwrap(), "--radii", "0.5:3:3"],
        dir.path(),
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn schema_errors_name_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[analysis]\nc = 0.5\ntail = 0.3\n").unwrap();
    let o = tamed(&["growth", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("tail"), "{err}");

    fs::write(&cfg, "[analysis]\nc = 1.5\n").unwrap();
    let o = tamed(&["growth", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("analysis.c"));

    let o = tamed(&["growth", "--radii", "8:1:4"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn flow_writes_one_table_per_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = tamed(&["flow", "--surface", "catenoid", "--resolution", "128"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&dir.path().join("flow.json"));
    assert_eq!(summary["report"]["lines"].as_array().unwrap().len(), 20);
    assert!(summary["report"]["holds"].as_bool().unwrap());
    let t = fs::read_to_string(dir.path().join("flow_019.csv")).unwrap();
    assert!(t.starts_with("t,u,v,r,psi,sin_beta\n"));
}

#[test]
fn tone_table_and_json_agree() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = configs().join("catenoid_tone.toml");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(
        code(&tamed(&["tone", "--config", cfg, "--resolution", "96"], a.path())),
        0
    );
    assert_eq!(
        code(&tamed(
            &["tone", "--config", cfg, "--resolution", "96", "--format", "json"],
            b.path()
        )),
        0
    );
    let csv = fs::read_to_string(a.path().join("tone.csv")).unwrap();
    assert!(csv.starts_with("r,lambda1_mesh,lambda1_barta,l_used,H0,v_at_tc,prefactor\n"));
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let j = json(&b.path().join("tone.json"));
    let est = j["report"].as_array().unwrap();
    assert_eq!(rows.len(), est.len());
    for (row, e) in rows.iter().zip(est) {
        assert_eq!(row[1].parse::<f64>().unwrap(), num(&e["lambda1_mesh"]));
        assert!(num(&e["lambda1_mesh"]) <= num(&e["lambda1_barta"]));
    }
}

#[test]
fn list_names_the_catalog() {
    let o = Command::new(env!("CARGO_BIN_EXE_tamed")).arg("list").output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("catenoid") && text.contains("hyperboloid_sheet(1)"));
}

/// The shipped default configuration runs the whole acceptance suite; the exit
/// status is 0 exactly when every criterion passed, 5 otherwise.
#[test]
fn verify_all_exit_status_reflects_the_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.toml");
    let o = tamed(&["verify-all", "--config", cfg.to_str().unwrap()], dir.path());
    let report = json(&dir.path().join("verify.json"));
    let criteria = report["report"].as_array().unwrap();
    assert_eq!(criteria.len(), 12);
    let failed: Vec<i64> = criteria
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["id"].as_i64().unwrap())
        .collect();
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
            .count(),
        12
    );
    println!("{stdout}");
    if failed.is_empty() {
        assert_eq!(code(&o), 0);
    } else {
        assert_eq!(code(&o), 5, "failed criteria {failed:?}");
        for id in failed {
            assert!(stdout.contains(&format!("FAIL {id:>2}")));
        }
    }
}
