use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn willmore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = willmore(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn energy_field(json: &str, key: &str) -> f64 {
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    v[key].as_f64().unwrap()
}

#[test]
fn disk_energy() {
    let dir = TempDir::new().unwrap();
    let disk = path(&dir, "disk.obj");
    ok(&["construct", "disk", "--n", "48", "-o", &disk]);
    assert!(Path::new(&path(&dir, "disk.json")).exists());
    let e = ok(&["energy", &disk]);
    assert!(energy_field(&e, "W").abs() < 1e-12);
    assert!((energy_field(&e, "G") - 2.0 * PI).abs() < 1e-9);
}

#[test]
fn clifford_energy() {
    let dir = TempDir::new().unwrap();
    let t = path(&dir, "clifford.off");
    ok(&["construct", "clifford", "--res", "128", "-o", &t]);
    let w = energy_field(&ok(&["energy", &t]), "W");
    assert!((w - 2.0 * PI * PI).abs() <= 0.01 * 2.0 * PI * PI, "{w}");
}

#[test]
fn broken_mesh_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "broken.obj");
    std::fs::write(&bad, "v 0 0 0\nv 1 0 0\nf 1 2 3\n").unwrap();
    let out = willmore(&["energy", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("topology"));
}

#[test]
fn transform_off_surface_and_singular() {
    let dir = TempDir::new().unwrap();
    let disk = path(&dir, "disk.obj");
    ok(&["construct", "disk", "--n", "32", "-o", &disk]);
    let map = path(&dir, "inv.json");
    std::fs::write(&map, r#"[{"inv": {"r": 1.0, "c": [0.0, 0.0, 2.0]}}]"#).unwrap();
    let out = path(&dir, "out.obj");
    ok(&["transform", &map, &disk, "-o", &out]);
    let e = ok(&["energy", &out]);
    let wg = energy_field(&e, "W") + energy_field(&e, "G");
    assert!((wg - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{wg}");

    std::fs::write(&map, r#"[{"inv": {"r": 1.0, "c": [0.0, 0.0, 0.0]}}]"#).unwrap();
    let res = willmore(&["transform", &map, &disk, "-o", &out]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn minimize_decreases_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let b = path(&dir, "bumpy.obj");
    ok(&["construct", "bumpy-disk", "--n", "32", "--seed", "3", "--amplitude", "0.3", "-o", &b]);
    let args = ["minimize", b.as_str(), "--pinned", "--max-iters", "20"];
    let csv = ok(&args);
    let w: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(w.len() > 2);
    assert!(w.windows(2).all(|p| p[1] < p[0]));

    let serial: Vec<&str> = std::iter::once("--serial").chain(args).collect();
    assert_eq!(ok(&serial), ok(&serial));
    assert_eq!(ok(&serial), csv);
}

#[test]
fn monotonicity_csv() {
    let dir = TempDir::new().unwrap();
    let s = path(&dir, "sphere.obj");
    ok(&["construct", "sphere", "--subdivisions", "3", "-o", &s]);
    let csv = ok(&["monotonicity", &s, "--center", "0,0,0.2", "--radii", "0.5,1,1.5"]);
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("rho,"));
    let bad = willmore(&["monotonicity", &s, "--center", "0,0,0", "--radii", "1,0.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn biharmonic_json_and_cap() {
    let dir = TempDir::new().unwrap();
    let bvp = path(&dir, "bvp.json");
    std::fs::write(
        &bvp,
        r#"{"sigma": 0.5, "r_outer": 1.0,
            "value": {"cos": [0.1, 0.0, 0.05], "sin": [0.0, 0.0, 0.0]},
            "normal": {"cos": [0.0, 0.0, 0.0], "sin": [0.0, 0.02, 0.0]}}"#,
    )
    .unwrap();
    let cap = path(&dir, "cap.obj");
    let out = ok(&["biharmonic", &bvp, "--cap", &cap, "--n-angular", "64", "--n-rings", "16"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["hessian_energy"].as_f64().unwrap() > 0.0);
    assert!(Path::new(&cap).exists());
}

#[test]
fn badpoints_and_invert_check() {
    let dir = TempDir::new().unwrap();
    let s = path(&dir, "sphere.obj");
    ok(&["construct", "sphere", "--subdivisions", "3", "-o", &s]);
    let r: serde_json::Value = serde_json::from_str(&ok(&["badpoints", &s, "--eps", "10"])).unwrap();
    assert!(r["candidates"].as_array().unwrap().iter().all(|c| !c["flagged"].as_bool().unwrap()));
    let inv: serde_json::Value = serde_json::from_str(&ok(&["invert-check", &s, "--point", "0,0,1"])).unwrap();
    let drop = inv["w_before"].as_f64().unwrap() - inv["w_after"].as_f64().unwrap();
    assert!((drop - 4.0 * PI).abs() < 0.05 * 4.0 * PI, "{drop}");
}

#[test]
fn every_subcommand_has_help() {
    for sub in [
        "energy", "construct", "transform", "minimize", "monotonicity", "biharmonic", "badpoints", "invert-check",
    ] {
        ok(&[sub, "--help"]);
    }
}
