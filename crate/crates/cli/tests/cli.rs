use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use dvdm_core::schemes::step_size_bounds;

fn dvdm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dvdm"))
        .args(args)
        .current_dir(dir)
        .env_remove("DVDM_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn soliton_config() -> Value {
    json!({
        "equation": {"family": "kdv", "alpha": 6.0, "beta": -1.0},
        "grid": {"L": 40.0, "K": 800, "T": 1.0, "M": 2000},
        "initial": {"soliton": {"c": 1.0, "x0": 20.0}},
        "solver": {"method": "newton", "tol": 1e-14, "max_iter": 50},
        "outputs": {"diagnostics_path": "diag.csv"}
    })
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text.lines().last().expect("error line on stderr");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON: {line}: {e}"))
}

#[test]
fn soliton_benchmark_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.json", &soliton_config());
    let out = dvdm(&["run", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let text = fs::read_to_string(dir.path().join("diag.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "step,time,mass,energy,l2,sup_norm,iterations,contraction_estimate,update_norm"
    );
    assert_eq!(lines.len(), 2001);
    let rows: Vec<Vec<f64>> = lines[1..]
        .iter()
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect())
        .collect();
    assert!(rows.iter().all(|r| r.len() == 9));
    assert_eq!(rows[1999][0], 2000.0);
    assert!((rows[1999][1] - 1.0).abs() < 1e-12);
    let (m0, e0) = (rows[0][2], rows[0][3]);
    for r in &rows {
        assert!((r[2] - m0).abs() <= 1e-12 * m0.abs());
        assert!((r[3] - e0).abs() <= 1e-10 * e0.abs());
        assert!(r[5] <= 1.0);
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("run: kdv K=800 M=2000 completed"));
}

#[test]
fn json_diagnostics_and_snapshots() {
    let dir = TempDir::new().unwrap();
    let mut cfg = soliton_config();
    cfg["grid"] = json!({"L": 40.0, "K": 200, "T": 0.5, "M": 10});
    cfg["outputs"] = json!({
        "diagnostics_path": "diag.json",
        "timeseries_path": "out/states.json",
        "format": "json",
        "state_stride": 4
    });
    fs::create_dir(dir.path().join("out")).unwrap();
    let path = write_config(dir.path(), "run.json", &cfg);
    let out = dvdm(&["--quiet", "run", &path], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());

    let diag: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("diag.json")).unwrap()).unwrap();
    let rows = diag.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[9]["step"], 10);
    assert!(rows[0]["iterations"].as_u64().unwrap() >= 1);

    let states: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/states.json")).unwrap())
            .unwrap();
    assert_eq!(states["grid"]["K"], 200);
    assert_eq!(states["grid"]["dx"], 0.2);
    assert_eq!(states["equation"]["family"], "kdv");
    assert_eq!(states["complete"], true);
    let steps: Vec<u64> = states["snapshots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["step"].as_u64().unwrap())
        .collect();
    assert_eq!(steps, vec![0, 4, 8, 10]);
    let first = states["snapshots"][0]["values"].as_array().unwrap();
    assert_eq!(first.len(), 200);
    assert_eq!(first[100].as_f64().unwrap(), 0.5);
}

#[test]
fn config_errors_exit_1() {
    let dir = TempDir::new().unwrap();

    let mut small = soliton_config();
    small["grid"]["K"] = json!(4);
    let out = dvdm(
        &["run", &write_config(dir.path(), "k.json", &small)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "config");
    assert_eq!(err["field"], "K");

    let mut unknown = soliton_config();
    unknown["solver"]["tolerance"] = json!(1e-10);
    let out = dvdm(
        &["run", &write_config(dir.path(), "u.json", &unknown)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("tolerance"));

    let mut top = soliton_config();
    top["extra"] = json!(true);
    let out = dvdm(
        &["run", &write_config(dir.path(), "t.json", &top)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));

    let mut no_p = soliton_config();
    no_p["equation"] = json!({"family": "gkdv", "alpha": 1.0, "beta": -1.0});
    no_p["initial"] = json!({"samples": vec![0.1; 800]});
    let out = dvdm(
        &["run", &write_config(dir.path(), "p.json", &no_p)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "equation.p");

    let mut gamma = soliton_config();
    gamma["equation"]["gamma"] = json!(0.5);
    let out = dvdm(
        &["run", &write_config(dir.path(), "g.json", &gamma)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));

    let mut short = soliton_config();
    short["initial"] = json!({"samples": [0.0, 1.0, 2.0]});
    let out = dvdm(
        &["run", &write_config(dir.path(), "s.json", &short)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "initial");

    let mut no_out = soliton_config();
    no_out["outputs"] = json!({});
    let out = dvdm(
        &["run", &write_config(dir.path(), "o.json", &no_out)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));

    let out = dvdm(&["run", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = dvdm(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn guard_violation_echoes_bounds() {
    let dir = TempDir::new().unwrap();
    let mut cfg = soliton_config();
    cfg["grid"]["M"] = json!(100);
    cfg["solver"] =
        json!({"method": "fixed_point", "guard": {"q": 2.0, "r": 1.0, "enforce": true}});
    let out = dvdm(
        &["run", &write_config(dir.path(), "g.json", &cfg)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "guard_violation");
    let b = step_size_bounds(2.0, 1.0, 0.05, 6.0, -1.0).unwrap();
    assert_eq!(err["eps1"].as_f64().unwrap(), b.eps1);
    assert_eq!(err["eps2"].as_f64().unwrap(), b.eps2);
    assert_eq!(err["dt"].as_f64().unwrap(), 0.01);
    assert!(!dir.path().join("diag.csv").exists());
}

#[test]
fn non_convergence_exits_2_with_partial_output() {
    let dir = TempDir::new().unwrap();
    let mut cfg = soliton_config();
    cfg["grid"]["M"] = json!(100);
    cfg["solver"] = json!({"method": "fixed_point", "max_iter": 30});
    cfg["outputs"]["timeseries_path"] = json!("states.json");
    let out = dvdm(
        &["run", &write_config(dir.path(), "nc.json", &cfg)],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"], "non_convergence");
    assert_eq!(err["step"], 0);
    let text = fs::read_to_string(dir.path().join("diag.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    let states: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("states.json")).unwrap()).unwrap();
    assert_eq!(states["complete"], false);
    assert_eq!(states["snapshots"].as_array().unwrap().len(), 1);
}

#[test]
fn initial_data_from_file() {
    let dir = TempDir::new().unwrap();
    fs::create_dir(dir.path().join("cfg")).unwrap();
    let k = 64;
    let u: Vec<f64> = (0..k)
        .map(|i| 0.3 * (2.0 * std::f64::consts::PI * i as f64 / k as f64).cos())
        .collect();
    fs::write(
        dir.path().join("cfg/u0.json"),
        serde_json::to_string(&u).unwrap(),
    )
    .unwrap();
    let cfg = json!({
        "equation": {"family": "ostrovsky", "alpha": 1.0, "beta": -1.0, "gamma": 0.5},
        "grid": {"L": 20.0, "K": k, "T": 0.5, "M": 50},
        "initial": {"file": "u0.json"},
        "solver": {"method": "newton", "tol": 1e-13},
        "outputs": {"diagnostics_path": "diag.csv"}
    });
    let path = write_config(&dir.path().join("cfg"), "run.json", &cfg);
    let out = dvdm(&["run", &path], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("cfg/diag.csv")).unwrap();
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn soliton_sweep_is_second_order() {
    let dir = TempDir::new().unwrap();
    let mut cfg = soliton_config();
    cfg["grid"] = json!({"L": 40.0, "K": 200, "T": 80.0, "M": 400});
    cfg["solver"]["tol"] = json!(1e-13);
    cfg["outputs"] = json!({"table_path": "table.csv"});
    let path = write_config(dir.path(), "sweep.json", &cfg);
    let out = Command::new(env!("CARGO_BIN_EXE_dvdm"))
        .args(["--quiet", "sweep", &path, "--levels", "4"])
        .env("DVDM_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "dx,dt,h1_error,order_estimate,K,M,max_sup,status");
    assert_eq!(lines.len(), 5);
    for l in &lines[3..] {
        let order: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!((1.8..=2.2).contains(&order), "{order}");
    }
    assert!(lines[1..].iter().all(|l| l.ends_with(",converged")));
}

#[test]
fn linear_sweep_against_spectral_reference() {
    let dir = TempDir::new().unwrap();
    let k = 32;
    let u: Vec<f64> = (0..k)
        .map(|i| {
            let x = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            0.4 * x.sin() + 0.2 * (2.0 * x).cos()
        })
        .collect();
    let cfg = json!({
        "equation": {"family": "kdv", "alpha": 0.0, "beta": -1.0},
        "grid": {"L": 20.0, "K": k, "T": 1.0, "M": 8},
        "initial": {"samples": u},
        "solver": {"method": "newton", "tol": 1e-13}
    });
    let path = write_config(dir.path(), "lin.json", &cfg);
    let out = dvdm(&["sweep", &path, "--levels", "3"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let order: f64 = lines[3].split(',').nth(3).unwrap().parse().unwrap();
    assert!((1.8..=2.2).contains(&order), "{order}");
}

#[test]
fn sweep_failures() {
    let dir = TempDir::new().unwrap();
    let mut cfg = soliton_config();
    cfg["grid"] = json!({"L": 40.0, "K": 200, "T": 1.0, "M": 10});
    cfg["solver"] = json!({"method": "fixed_point", "max_iter": 3});
    cfg["outputs"] = json!({});
    let path = write_config(dir.path(), "f.json", &cfg);

    let out = dvdm(&["sweep", &path, "--levels", "1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "levels");

    let out = dvdm(&["sweep", &path, "--levels", "2"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.contains(",NaN,") && l.contains("failed")));

    let out = Command::new(env!("CARGO_BIN_EXE_dvdm"))
        .args(["sweep", &path])
        .env("DVDM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "DVDM_THREADS");
}

#[test]
fn check_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dvdm(&["check", "operators"], dir.path());
    let b = dvdm(&["check", "operators"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 7);
    assert!(text.lines().last().unwrap().contains("passed"));

    let c = dvdm(&["check", "bounds", "--seed", "7"], dir.path());
    assert_eq!(c.status.code(), Some(0));
    let text = String::from_utf8(c.stdout).unwrap();
    assert!(text.contains("PASS modified_energy_kdv"));
    assert!(text.contains("seed=7"));

    let quiet = dvdm(&["--quiet", "check", "invariants"], dir.path());
    assert_eq!(quiet.status.code(), Some(0));
    assert!(quiet.stdout.is_empty());
}

#[test]
fn unknown_scope_exits_1() {
    let dir = TempDir::new().unwrap();
    let out = dvdm(&["check", "everything"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "scope");
}
