use std::f64::consts::{FRAC_PI_3, PI};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphere-re"))
        .args(args)
        .env_remove("SPHERE_RE_JOBS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

/// Writes a minimal check report so `verify --input` can launch it.
fn write_report(dir: &TempDir, name: &str, positions: [[f64; 3]; 3], omega_sq: f64) -> String {
    let rep = serde_json::json!({
        "classification": "euler-meridian",
        "masses": [1.0, 1.0, 1.0],
        "sigma": [0.0, 0.0, 0.0],
        "potential": "cotangent",
        "tol": 1e-9,
        "omega_sq": omega_sq,
        "positions": positions,
    });
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string(&rep).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn help_documents_exit_codes() {
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for line in [
        "0  relative",
        "1  invalid",
        "2  not a",
        "3  integration",
        "4  drift",
    ] {
        assert!(text.contains(line), "{text}");
    }
}

#[test]
fn check_isosceles_lagrange() {
    let o = run(&[
        "check",
        "--masses",
        "1,1,1",
        "--sigma",
        "1.0472,1.33240,1.33240",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["classification"], "lagrange");
    assert!((v["omega_sq"].as_f64().unwrap() - 3.85072).abs() < 1e-3);
}

#[test]
fn check_equilateral_right_angle() {
    let o = run(&[
        "check",
        "--masses",
        "1,1,1",
        "--sigma",
        "1.5708,1.5708,1.5708",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["classification"], "lagrange");
    assert!((v["omega_sq"].as_f64().unwrap() - 3.0).abs() < 1e-4);
    for c in v["solution"]["cos_theta"].as_array().unwrap() {
        assert!((c.as_f64().unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-4);
    }
}

#[test]
fn check_unequal_equilateral_is_not_an_re() {
    let o = run(&[
        "check",
        "--masses",
        "1,2,3",
        "--sigma",
        "2.0944,2.0944,2.0944",
    ]);
    assert_eq!(code(&o), 2);
    let v = json(&o);
    assert_eq!(v["classification"], "not-an-RE");
    assert!(v["residual"].as_f64().unwrap() > 0.0);
    assert!(v["reason"].as_str().is_some());
}

#[test]
fn check_euler_and_fixed_point() {
    let o = run(&[
        "check",
        "--masses",
        "1,1,1",
        "--sigma",
        "1.5707963267948966,0.7853981633974483,0.7853981633974483",
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["classification"], "euler-meridian");
    assert!((v["omega_sq"].as_f64().unwrap() - 6.0).abs() < 1e-9);

    let t = format!("{0},{0},{0}", 2.0 * PI / 3.0);
    let o = run(&["check", "--masses", "1,1,1", "--sigma", &t]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["classification"], "fixed-point");
}

#[test]
fn input_errors_exit_one() {
    let o = run(&["check", "--masses", "1,1,1", "--sigma", "60,60,60"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degrees"));

    let o = run(&["check", "--masses", "1,1,1", "--sigma", "3.0,0.5,0.5"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma12 <= sigma23 + sigma31"));

    assert_eq!(
        code(&run(&["check", "--masses", "1,0,1", "--sigma", "1,1,1"])),
        1
    );
    assert_eq!(code(&run(&["check", "--masses", "1,1,1"])), 1);
    assert_eq!(
        code(&run(&[
            "check",
            "--masses",
            "1,1,1",
            "--sigma",
            "1,1,1",
            "--potential",
            "nope"
        ])),
        1
    );
    assert_eq!(code(&run(&["euler-scan", "--grid", "8"])), 1);
}

#[test]
fn repulsive_has_no_lagrange_solution() {
    let o = run(&[
        "check",
        "--masses",
        "1,1,1",
        "--sigma",
        "1.5708,1.5708,1.5708",
        "--potential",
        "cotangent-repulsive",
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["classification"], "not-an-RE");
}

#[test]
fn scans_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_owned();
    for (i, jobs) in ["1", "4", "4"].iter().enumerate() {
        let out = p(&format!("e{i}.csv"));
        assert_eq!(
            code(&run(&[
                "euler-scan",
                "--grid",
                "128",
                "--jobs",
                jobs,
                "--out",
                &out
            ])),
            0
        );
        let out = p(&format!("l{i}.csv"));
        assert_eq!(
            code(&run(&[
                "lagrange-scan",
                "--grid",
                "128",
                "--jobs",
                jobs,
                "--out",
                &out
            ])),
            0
        );
    }
    for stem in ["e", "l"] {
        let a = std::fs::read(p(&format!("{stem}0.csv"))).unwrap();
        for i in 1..3 {
            assert_eq!(
                a,
                std::fs::read(p(&format!("{stem}{i}.csv"))).unwrap(),
                "{stem}{i}"
            );
        }
    }
    let o = run(&[
        "check",
        "--masses",
        "1,1,1",
        "--sigma",
        "1.5708,1.5708,1.5708",
    ]);
    assert_eq!(
        o.stdout,
        run(&[
            "check",
            "--masses",
            "1,1,1",
            "--sigma",
            "1.5708,1.5708,1.5708"
        ])
        .stdout
    );
}

#[test]
fn jobs_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_sphere-re"))
        .args(["lagrange-scan", "--grid", "16"])
        .env("SPHERE_RE_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_sphere-re"))
        .args(["lagrange-scan", "--grid", "16"])
        .env("SPHERE_RE_JOBS", "two")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn euler_scan_shape() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("e.csv");
    assert_eq!(
        code(&run(&["euler-scan", "--out", out.to_str().unwrap()])),
        0
    );
    let rows = csv_rows(&out);
    let ac = 1.8124516;
    let mut scalene = 0;
    for r in rows.iter().filter(|r| r[1] == "scalene") {
        scalene += 1;
        let (a, y) = (f(&r[3]), f(&r[4]));
        let x = y + a / 2.0;
        let arcs = [-a, a - x, x].map(|t: f64| t.cos().clamp(-1.0, 1.0).acos());
        let big = arcs.into_iter().fold(0.0, f64::max);
        assert!(big > PI / 2.0 && big < ac + 1e-3, "{big}");
    }
    assert!(scalene > 50);
    assert!(rows.iter().any(|r| r[1] == "isosceles"));
}

#[test]
fn lagrange_scan_landmarks() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("l.csv");
    assert_eq!(
        code(&run(&[
            "lagrange-scan",
            "--grid",
            "240",
            "--out",
            out.to_str().unwrap()
        ])),
        0
    );
    let rows = csv_rows(&out);
    // pi/3 is node 80 of 240
    let at = |s12: f64| -> Vec<&Vec<String>> {
        rows.iter()
            .filter(|r| r[0] == "isosceles" && (f(&r[1]) - s12).abs() < 1e-9)
            .collect()
    };
    assert!(at(FRAC_PI_3)
        .iter()
        .any(|r| (f(&r[2]) - 1.33240).abs() < 1e-4));
    // point symmetry about (pi/2, pi/2), wherever the mirrored shape is
    // still a triangle (sigma12 < 2 sigma < 2pi - sigma12) with some margin
    let window = |s12: f64, s: f64| {
        s12 > 0.05 && s12 < PI - 0.05 && s12 + 0.01 < 2.0 * s && 2.0 * s < 2.0 * PI - s12 - 0.01
    };
    let mirrored = |r: &&Vec<String>| window(PI - f(&r[1]), PI - f(&r[2]));
    for r in rows.iter().filter(|r| r[0] == "isosceles").filter(mirrored) {
        let (s12, s, w) = (f(&r[1]), f(&r[2]), f(&r[3]));
        let mirror = at(PI - s12);
        assert!(
            mirror
                .iter()
                .any(|m| (f(&m[2]) - (PI - s)).abs() < 1e-8 && (f(&m[3]) - w).abs() < 1e-6 * w),
            "no mirror for ({s12}, {s})"
        );
    }
    let right: Vec<_> = rows.iter().filter(|r| r[0] == "right-angle").collect();
    assert_eq!(right.len(), 3);
    for r in right {
        let (s12, s) = (f(&r[1]), f(&r[2]));
        assert!((s12.cos() - s.cos() * s.cos()).abs() < 1e-9);
    }
    assert!(rows.iter().any(|r| r[0] == "equilateral"));
}

#[test]
fn verify_round_trip_and_sensitivity() {
    let dir = TempDir::new().unwrap();
    let rep = dir.path().join("rep.json");
    let rep = rep.to_str().unwrap();
    let sigma = "1.5707963267948966,1.5707963267948966,1.5707963267948966";
    assert_eq!(
        code(&run(&[
            "check", "--masses", "1,1,1", "--sigma", sigma, "--out", rep
        ])),
        0
    );

    let traj = dir.path().join("traj.csv");
    let o = run(&[
        "verify",
        "--input",
        rep,
        "--trajectory",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(json(&o)["passed"].as_bool().unwrap());
    let text = std::fs::read_to_string(&traj).unwrap();
    assert!(text.starts_with("t,q1x"));
    assert!(text.lines().count() > 200);

    let o = run(&["verify", "--input", rep, "--omega-sq-scale", "1.05"]);
    assert_eq!(code(&o), 4);
    assert!(json(&o)["report"]["shape_drift"].as_f64().unwrap() > 1e-3);

    // inline solve, then verify
    let o = run(&[
        "verify", "--masses", "1,1,1", "--sigma", sigma, "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("omega_sq,"));
    let o = run(&["verify", "--masses", "1,2,3", "--sigma", sigma]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_with_verify_flag() {
    let o = run(&[
        "check",
        "--masses",
        "1,1,1",
        "--sigma",
        "1.5707963267948966,1.5707963267948966,1.5707963267948966",
        "--verify",
    ]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["verification"]["shape_drift"].as_f64().unwrap() < 1e-6);
}

#[test]
fn fixed_point_stays_put() {
    let dir = TempDir::new().unwrap();
    let s = (2.0 * PI / 3.0).sin_cos();
    let path = write_report(
        &dir,
        "fp.json",
        [[0.0, 0.0, 1.0], [s.0, 0.0, s.1], [-s.0, 0.0, s.1]],
        0.0,
    );
    let o = run(&["verify", "--input", &path, "--periods", "10"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["report"]["rotation_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn collision_exits_three() {
    let dir = TempDir::new().unwrap();
    let e = 0.01f64;
    let path = write_report(
        &dir,
        "c.json",
        [[0.0, 0.0, 1.0], [e.sin(), 0.0, e.cos()], [1.0, 0.0, 0.0]],
        0.0,
    );
    let o = run(&["verify", "--input", &path]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blew up"));
}

/// Every 16th row of both scans passes `verify` at default settings. Rows
/// are read from the JSON output so positions keep full precision.
#[test]
fn sampled_scan_rows_verify() {
    let dir = TempDir::new().unwrap();
    let e = json(&run(&["euler-scan", "--format", "json"]));
    let l = json(&run(&["lagrange-scan", "--format", "json"]));
    let points: Vec<&Value> = e["polylines"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| p["points"].as_array().unwrap())
        .collect();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (n, p) in points.iter().enumerate().step_by(16) {
        let th: Vec<f64> = p["theta"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t.as_f64().unwrap())
            .collect();
        let q = [0, 1, 2].map(|k| [th[k].sin(), 0.0, th[k].cos()]);
        let path = write_report(
            &dir,
            &format!("e{n}.json"),
            q,
            p["omega_sq"].as_f64().unwrap(),
        );
        let o = run(&["verify", "--input", &path]);
        checked += 1;
        if code(&o) != 0 {
            failures.push(format!(
                "euler point {n} (a {}, y {}): exit {} {}",
                p["a"],
                p["y"],
                code(&o),
                String::from_utf8_lossy(&o.stderr).trim()
            ));
        }
    }
    for (n, r) in l.as_array().unwrap().iter().enumerate().step_by(16) {
        let sigma = format!("{0},{1},{1}", r["sigma12"], r["sigma"]);
        let o = run(&["verify", "--masses", "1,1,1", "--sigma", &sigma]);
        checked += 1;
        if code(&o) != 0 {
            failures.push(format!("lagrange row {n} ({sigma}): exit {}", code(&o)));
        }
    }
    assert!(checked > 100, "{checked}");
    assert!(
        failures.is_empty(),
        "{} of {checked}:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
