use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gcf_core::body::volume;
use gcf_core::sphere::unit_ball_volume;
use gcf_core::{build_grid, ConvexBody};
use serde_json::Value;
use tempfile::TempDir;

const TRACE_HEADER: &str = "t,dt,volume,entropy,firey_entropy,chow_entropy,min_u,max_u,min_k,max_k,max_trace_a,\
soliton_residual,entropy_point_norm,dissipation,violations,epoch,max_grad,min_u_over_k,newton_slack";

fn gcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcf")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn shape(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.path().join(name);
    let mut full = vec!["shape"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["-o", path_str(&path)]);
    let out = gcf(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn body_of(snapshot: &Value) -> ConvexBody {
    let resolution = serde_json::from_value(snapshot["resolution"].clone()).unwrap();
    let dim = snapshot["dim"].as_u64().unwrap() as usize;
    let support = serde_json::from_value(snapshot["support"].clone()).unwrap();
    ConvexBody::new(build_grid(dim, resolution).unwrap(), support).unwrap()
}

#[test]
fn normalized_ellipsoid_has_unit_ball_volume() {
    let dir = TempDir::new().unwrap();
    let p = shape(&dir, "e.json", &["--dim", "2", "--ellipsoid", "1.2,1.0,0.8333", "--normalize"]);
    let snap = json(&p);
    assert_eq!(snap["schema_version"], 1);
    assert_eq!(snap["metadata"]["spec"]["kind"], "ellipsoid");
    let v = volume(&body_of(&snap));
    assert!(((v - unit_ball_volume(2)) / v).abs() <= 1e-12);
}

#[test]
fn shape_validation_exit_codes() {
    assert_eq!(code(&gcf(&["shape", "--dim", "1", "--harmonic", "3:0.1"])), 0);
    let out = gcf(&["shape", "--dim", "2", "--ellipsoid", "5,1,0.04"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("under-resolved"));
    assert_eq!(code(&gcf(&["shape", "--dim", "1", "--harmonic", "2:0.5"])), 2);
    assert_eq!(code(&gcf(&["shape", "--dim", "1"])), 2);
    assert_eq!(code(&gcf(&["shape", "--dim", "3", "--ball", "1"])), 2);
}

#[test]
fn analyze_unit_ball_and_ellipse() {
    let dir = TempDir::new().unwrap();
    let ball = shape(&dir, "b.json", &["--dim", "2", "--ball", "1"]);
    let out = gcf(&["analyze", path_str(&ball)]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["all_pass"], true);
    for key in ["entropy", "firey_entropy", "chow_entropy"] {
        assert!(r["report"][key].as_f64().unwrap().abs() <= 1e-10);
    }

    let ellipse = shape(&dir, "e.json", &["--dim", "1", "--ellipsoid", "1.4,0.714285714285714", "--normalize"]);
    let report = dir.path().join("r.json");
    assert_eq!(code(&gcf(&["analyze", path_str(&ellipse), "-o", path_str(&report)])), 0);
    let r = json(&report)["report"].clone();
    let (ec, e, ef) = (r["chow_entropy"].as_f64().unwrap(), r["entropy"].as_f64().unwrap(), r["firey_entropy"].as_f64().unwrap());
    assert!(ec > e && e >= ef && ef >= 0.0, "{ec} {e} {ef}");
}

#[test]
fn corrupted_and_missing_snapshots_are_io_errors() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"schema_version\": 1, \"dim\":").unwrap();
    assert_eq!(code(&gcf(&["analyze", path_str(&bad)])), 3);
    assert_eq!(code(&gcf(&["analyze", path_str(&dir.path().join("none.json"))])), 3);

    let p = shape(&dir, "b.json", &["--dim", "1", "--n", "32", "--ball", "1"]);
    let mut snap = json(&p);
    snap["support"][3] = Value::from(-1.0);
    fs::write(&bad, snap.to_string()).unwrap();
    assert_eq!(code(&gcf(&["analyze", path_str(&bad)])), 2);
}

#[test]
fn flow_of_the_unit_ball_is_constant_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let ball = shape(&dir, "b.json", &["--dim", "1", "--n", "64", "--ball", "1"]);
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = gcf(&["flow", path_str(&ball), "--t-end", "1", "--out-dir", path_str(&out_dir)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let a = run("a");
    let trace = fs::read_to_string(a.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), TRACE_HEADER);
    let mut rdr = csv::Reader::from_path(a.join("trace.csv")).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let get = |i: usize| rec[i].parse::<f64>().unwrap();
        assert!((get(6) - 1.0).abs() <= 1e-12 && (get(7) - 1.0).abs() <= 1e-12);
        assert_eq!(get(14), 0.0);
        rows += 1;
    }
    assert!(rows > 2);
    let summary = json(&a.join("summary.json"));
    assert_eq!(summary["termination"], "time_limit");
    assert_eq!(json(&a.join("final.json"))["metadata"]["t"], 1.0);
    let manifest = json(&a.join("manifest.json"));
    for p in manifest["outputs"].as_array().unwrap() {
        assert!(Path::new(p.as_str().unwrap()).exists());
    }

    let b = run("b");
    for f in ["trace.csv", "final.json", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn soliton_tolerance_stops_the_flow_early() {
    let dir = TempDir::new().unwrap();
    let e = shape(&dir, "e.json", &["--dim", "1", "--n", "64", "--ellipsoid", "1.1,0.9090909090909091"]);
    let out_dir = dir.path().join("f");
    let out = gcf(&[
        "flow", path_str(&e), "--normalize", "--t-end", "20", "--soliton-tol", "1e-5", "--out-dir", path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&out_dir.join("summary.json"));
    assert_eq!(s["termination"], "soliton");
    assert!(s["final_time"].as_f64().unwrap() < 20.0);
    assert_eq!(s["monitors"]["entries"].as_array().unwrap().iter().filter(|e| e["pass"] == false).count(), 0);
}

#[test]
fn unnormalized_flow_reports_harnack_monitors() {
    let dir = TempDir::new().unwrap();
    let e = shape(&dir, "e.json", &["--dim", "1", "--n", "64", "--ellipsoid", "1.2,0.8"]);
    let out_dir = dir.path().join("f");
    let out = gcf(&[
        "flow", path_str(&e), "--mode", "unnormalized", "--t-end-fraction", "0.9", "--stride", "5",
        "--out-dir", path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let s = json(&out_dir.join("summary.json"));
    let h = &s["harnack"];
    assert_eq!(h["monotone_pass"], true);
    // V decreases at rate ω₁ = 2π, so T = V₀ / 2π.
    let t_exact = std::f64::consts::PI * 1.2 * 0.8 / (2.0 * std::f64::consts::PI);
    assert!((h["extinction_estimate"].as_f64().unwrap() - t_exact).abs() <= 0.01 * t_exact);
    assert!((s["final_time"].as_f64().unwrap() - 0.9 * t_exact).abs() <= 1e-9);
}

#[test]
fn stiff_flow_exits_with_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let b = shape(&dir, "b.json", &["--dim", "1", "--n", "32", "--ball", "0.2"]);
    let out_dir = dir.path().join("f");
    let out = gcf(&[
        "flow", path_str(&b), "--mode", "unnormalized", "--t-end", "1", "--fixed-dt", "10", "--out-dir", path_str(&out_dir),
    ]);
    assert_eq!(code(&out), 4);
    assert!(out_dir.join("final.json").exists());
    assert!(json(&out_dir.join("summary.json"))["termination"].as_str().unwrap().starts_with("stiff"));
}

#[test]
fn normalized_flow_rejects_wrong_volume() {
    let dir = TempDir::new().unwrap();
    let b = shape(&dir, "b.json", &["--dim", "1", "--n", "32", "--ball", "2"]);
    let out = gcf(&["flow", path_str(&b), "--t-end", "1", "--out-dir", path_str(&dir.path().join("f"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_reports_and_rejects_exterior_points() {
    let dir = TempDir::new().unwrap();
    let ball = shape(&dir, "b.json", &["--dim", "2", "--ball", "1"]);
    let out = gcf(&["oracle", path_str(&ball), "--samples", "20000"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["pass"], true);

    let e = shape(&dir, "e.json", &["--dim", "1", "--ellipsoid", "1.3,0.7692307692307692"]);
    let out = gcf(&["oracle", path_str(&e), "--z", "0.1,-0.05", "--samples", "50000", "--seed", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["log_integral"]["z_score"].as_f64().unwrap() <= 3.0);

    assert_eq!(code(&gcf(&["oracle", path_str(&ball), "--z", "1.5,0,0"])), 2);
    assert_eq!(code(&gcf(&["oracle", path_str(&ball), "--z", "0,0"])), 2);
}

#[test]
fn soliton_command_converges_on_an_ellipse() {
    let dir = TempDir::new().unwrap();
    let e = shape(&dir, "e.json", &["--dim", "1", "--n", "64", "--ellipsoid", "1.15,0.9"]);
    let fin = dir.path().join("fin.json");
    let out = gcf(&["soliton", path_str(&e), "--final-snapshot", path_str(&fin)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["converged"], true);
    assert_eq!(r["dual_bound_pass"], true);
    assert!(body_of(&json(&fin)).support().iter().all(|u| (u - 1.0).abs() < 1e-3));
}

#[test]
fn verify_subset_negative_control_and_bad_names() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("v.json");
    let manifest = dir.path().join("m.json");
    let out = gcf(&[
        "verify", "--dim", "1", "--only", "entropy-chain,sigma-k", "-o", path_str(&report), "--manifest",
        path_str(&manifest),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&report);
    assert_eq!(r["passed"], 2);
    assert_eq!(r["checks"].as_array().unwrap().len(), 2);
    assert!(json(&manifest)["seeds"].as_array().unwrap().len() >= 20);

    let out = gcf(&["verify", "--dim", "1", "--only", "entropy-chain", "--inject-bug", "mis-scaled-k"]);
    assert_eq!(code(&out), 1);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["failed"], 1);

    assert_eq!(code(&gcf(&["verify", "--only", "no-such-check"])), 2);
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let e = shape(&dir, "e.json", &["--dim", "2", "--random", "9"]);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_gcf"))
            .env("GCF_THREADS", threads)
            .args(["oracle", path_str(&e), "--samples", "30000"])
            .output()
            .unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&run("zero")), 2);
}
