use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use koopman_spectra::moments::{atomic_moments, combine};
use koopman_spectra::{AtomList, Complex64, MomentSequence};
use serde_json::Value;

fn kspec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kspec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = kspec(args, out);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn write_moments(dir: &Path, m: &MomentSequence) -> String {
    let p = dir.join("input_moments.json");
    fs::write(&p, serde_json::to_string(m).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn cd_on_cat_map_tracks_the_density() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &[
            "cd",
            "--system",
            "catmap",
            "--observable",
            "f1",
            "-M",
            "100000",
            "-N",
            "100",
        ],
        dir.path(),
    );
    let z = read_json(&dir.path().join("zeta.json"));
    let (theta, values) = (floats(&z["theta"]), floats(&z["values"]));
    assert_eq!(theta.len(), 1001);
    let dev = theta
        .iter()
        .zip(&values)
        .map(|(t, v)| (v - 1.25 - (2.0 * std::f64::consts::PI * t).cos()).abs())
        .fold(0.0, f64::max);
    assert!(dev <= 0.15, "{dev}");
    assert!(dir.path().join("atoms.json").exists());
    assert_eq!(
        read_json(&dir.path().join("peaks.json")),
        Value::Array(vec![])
    );
}

#[test]
fn moments_of_a_constant_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("const.csv");
    let mut text = String::from("index,re,im\n");
    for i in 0..10 {
        text.push_str(&format!("{i},1.5,-2\n"));
    }
    fs::write(&input, text).unwrap();
    ok(
        &[
            "moments",
            "--system",
            "file",
            "--input",
            input.to_str().unwrap(),
            "-N",
            "2",
        ],
        dir.path(),
    );
    let m: MomentSequence =
        serde_json::from_str(&fs::read_to_string(dir.path().join("moments.json")).unwrap())
            .unwrap();
    assert_eq!(m.values(), &[Complex64::new(6.25, 0.0); 3]);
}

#[test]
fn cdf_on_exact_moments() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = atomic_moments(&AtomList::new(vec![(0.25, 0.5), (0.7, 0.2)]).unwrap(), 40);
    let m = combine(&atoms, &MomentSequence::lebesgue(40, 1.0), 1).unwrap();
    let input = write_moments(dir.path(), &m);
    let stdout = ok(
        &["cdf", "--system", "moments", "--input", &input, "-N", "40"],
        dir.path(),
    );
    assert!(stdout.contains("quadrature residual"));
    let q = read_json(&dir.path().join("quadrature.json"));
    assert!(q["residual"].as_f64().unwrap() <= 1e-8);
    let weights = floats(&q["weights"]);
    assert_eq!(weights.len(), 401);
    assert!(weights.iter().all(|&w| w >= 0.0));
    let last = |name: &str| {
        *floats(&read_json(&dir.path().join(name))["values"])
            .last()
            .unwrap()
    };
    assert!((last("cdf_cesaro.json") - 1.7).abs() <= 1e-12);
    assert!((last("cdf_quadrature.json") - 1.7).abs() <= 1e-8);
    // F_ζ misses most of the atomic mass; the rest is leakage that fades with N.
    let fz = last("cdf_zeta.json");
    assert!(fz > 0.95 && fz < 1.5, "{fz}");
    let ind = read_json(&dir.path().join("indicator.json"));
    assert_eq!(floats(&ind["values"]).len(), 1000);
}

#[test]
fn usage_and_data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["cd", "--observable", "f9"],
        &["cd", "--system", "file"],
        &["cd", "--system", "file", "--input", "/nonexistent/traj.csv"],
        &["moments", "-M", "50", "-N", "50"],
        &["cd", "--ts", "0.5"],
        &["project", "-M", "100", "-N", "5"],
        &["cd", "--bogus-flag"],
    ];
    for args in cases {
        let o = kspec(args, dir.path());
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // |m_1| > m_0 cannot come from a measure.
    let m = MomentSequence::new(vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]).unwrap();
    let input = write_moments(dir.path(), &m);
    let o = kspec(
        &["cd", "--system", "moments", "--input", &input, "-N", "1"],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        ok(
            &["simulate", "--system", "lorenz", "-M", "500", "--seed", "9"],
            dir,
        );
        ok(
            &[
                "cdf", "--system", "catmap", "-M", "3000", "-N", "20", "--seed", "9",
            ],
            dir,
        );
        ok(
            &[
                "dmd",
                "--system",
                "catmap",
                "--observable",
                "f2",
                "-M",
                "3000",
                "-N",
                "10",
            ],
            dir,
        );
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8, "{names:?}");
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
    let c = tempfile::tempdir().unwrap();
    ok(
        &[
            "simulate", "--system", "lorenz", "-M", "500", "--seed", "10",
        ],
        c.path(),
    );
    assert_ne!(
        fs::read(a.path().join("trajectory.csv")).unwrap(),
        fs::read(c.path().join("trajectory.csv")).unwrap()
    );
}

#[test]
fn check_validates_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = ok(&["cd", "-M", "2000", "-N", "10", "--check"], p);
    assert!(out.contains("checked 3 artifact(s)"), "{out}");
    let out = ok(
        &["partition", "-M", "2000", "-N", "10", "-K", "4", "--check"],
        p,
    );
    assert!(out.contains("checked 1 artifact(s)"), "{out}");
    let out = ok(
        &[
            "project",
            "-M",
            "500",
            "-N",
            "10",
            "--interval",
            "0.1",
            "0.3",
            "--check",
        ],
        p,
    );
    assert!(out.contains("corresponds to input sample i + 10"));
    assert!(out.contains("checked 1 artifact(s)"), "{out}");
}

#[test]
fn projection_of_a_rotation_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("rot.csv");
    let mut text = String::from("index,re,im\n");
    for i in 0..200 {
        let a = 2.0 * std::f64::consts::PI * 0.3 * i as f64;
        text.push_str(&format!("{i},{:?},{:?}\n", a.cos(), a.sin()));
    }
    fs::write(&input, text).unwrap();
    let path = input.to_str().unwrap();
    let args = [
        "project", "--system", "file", "--input", path, "-N", "20", "--theta", "0.3",
    ];
    ok(&args, dir.path());
    let back =
        koopman_spectra::dynamics::load_trajectory(&dir.path().join("projected.csv"), 1.0).unwrap();
    assert_eq!(back.len(), 160);
    for (j, z) in back.samples().iter().enumerate() {
        let a = 2.0 * std::f64::consts::PI * 0.3 * (j + 20) as f64;
        assert!((z - Complex64::new(a.cos(), a.sin())).norm() <= 1e-10);
    }
}
