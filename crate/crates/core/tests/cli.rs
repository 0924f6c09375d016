use std::path::Path;
use std::process::{Command, Output};

use kanvex::gam::{gam_relaxation_min, Mpgam};
use tempfile::tempdir;

fn kanvex(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kanvex"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn envelope_summaries() {
    let dir = tempdir().unwrap();
    let o = kanvex(&["envelope", "--coeffs", "9,-24.5,22,-8,1", "--interval", "0.25", "3.75"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("1 bitangent\n"), "{text}");
    assert!(text.contains("slope -0.500000 "), "{text}");

    let o = kanvex(&["envelope", "--coeffs", "0,0,1", "--interval", "-1", "1"], dir.path());
    assert!(stdout(&o).starts_with("0 bitangents; envelope = p"));
}

#[test]
fn envelope_outputs() {
    let dir = tempdir().unwrap();
    let o = kanvex(
        &[
            "envelope", "--coeffs", "0,1.5,1.3,0,-0.7,0,0.08,0,-0.0025", "--interval", "-4.1", "4.4",
            "--out", "env.json", "--csv", "env.csv", "--samples", "2001",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let mut rows = csv::Reader::from_path(dir.path().join("env.csv")).unwrap();
    assert_eq!(rows.headers().unwrap(), vec!["x", "p", "env", "concave_env"]);
    let mut n = 0;
    for r in rows.records() {
        let r = r.unwrap();
        let v: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
        let slack = 1e-9 * (1.0 + v[1].abs());
        assert!(v[2] <= v[1] + slack && v[1] <= v[3] + slack, "{v:?}");
        n += 1;
    }
    assert_eq!(n, 2001);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("env.json")).unwrap()).unwrap();
    assert_eq!(json["domain"], serde_json::json!([-4.1, 4.4]));
    assert!(!json["bitangents"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempdir().unwrap();
    for args in [
        &["envelope", "--coeffs", "x", "--interval", "0", "1"][..],
        &["envelope", "--coeffs", "1,2,3"],
        &["envelope", "--coeffs", "0,0,1", "--interval", "1", "0"],
        &["pkan", "relax", "--model", "missing.json"],
        &["frobnicate"],
    ] {
        let o = kanvex(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn gen_is_deterministic() {
    let dir = tempdir().unwrap();
    for out in ["a", "b"] {
        let o = kanvex(&["pkan", "gen", "--count", "50", "--seed", "0", "--out", out], dir.path());
        assert!(o.status.success());
    }
    let mut names: Vec<_> = std::fs::read_dir(dir.path().join("a")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 50);
    for name in names {
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b);
    }
    assert!(dir.path().join("a/pkan_L4_W4_I4_N4_s49.json").exists());
}

#[test]
fn relax_on_convex_chain() {
    let dir = tempdir().unwrap();
    // x -> x^2 -> y + y^2 on [-1, 1]; minimum 0 at x = 0
    std::fs::write(
        dir.path().join("chain.json"),
        r#"{ "dims": [1, 1, 1], "box": [[-1, 1]], "layers": [[[[0, 0, 1]]], [[[0, 1, 1]]]] }"#,
    )
    .unwrap();
    let o = kanvex(&["pkan", "relax", "--model", "chain.json", "--out", "report.json"], dir.path());
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "optimal");
    let grid_min = (0..=10_000)
        .map(|k| {
            let y = (-1.0 + k as f64 / 5000.0f64).powi(2);
            y + y * y
        })
        .fold(f64::INFINITY, f64::min);
    assert!((report["lower_bound"].as_f64().unwrap() - grid_min).abs() < 1e-5);
}

#[test]
fn gap_rows_are_sandwiched() {
    let dir = tempdir().unwrap();
    let o = kanvex(
        &[
            "pkan", "gap", "--layers", "1,2", "--width", "2", "--inputs", "2", "--degree", "3", "--count", "3",
            "--samples", "500", "--out", "gap.csv",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rows = csv::Reader::from_path(dir.path().join("gap.csv")).unwrap();
    let headers = rows.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (relax, upper, gap) = (col("f_relax"), col("f_upper"), col("relative_gap"));
    let mut n = 0;
    for r in rows.records() {
        let r = r.unwrap();
        let f_relax: f64 = r[relax].parse().unwrap();
        let f_upper: f64 = r[upper].parse().unwrap();
        assert!(f_relax <= f_upper + 1e-6);
        assert!(r[gap].parse::<f64>().unwrap().is_finite());
        assert_eq!(&r[col("sandwich")], "true");
        n += 1;
    }
    assert_eq!(n, 6);
    assert!(dir.path().join("gap.csv.timing.csv").exists());
}

#[test]
fn gam_check() {
    let dir = tempdir().unwrap();
    std::fs::write(
        dir.path().join("quad.json"),
        r#"{ "components": [[0, 0, 1]], "link": [0, 1], "box": [[-1, 1]] }"#,
    )
    .unwrap();
    let o = kanvex(&["gam", "check", "--model", "quad.json"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    let diff: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("difference"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(diff.abs() < 1e-15, "{text}");
    assert!(text.trim_end().ends_with("PASS"));

    let g = Mpgam::generate_random(3, 5, 4);
    std::fs::write(dir.path().join("random.json"), g.to_json().unwrap()).unwrap();
    let o = kanvex(&["gam", "check", "--model", "random.json"], dir.path());
    assert!(o.status.success());
    let exact = gam_relaxation_min(&g, 1e-12).unwrap().0;
    assert!(stdout(&o).contains(&format!("{exact:.16e}")));

    // the component sum spans [-1, 1], where x^2 turns around
    std::fs::write(
        dir.path().join("square.json"),
        r#"{ "components": [[0, 1]], "link": [0, 0, 1], "box": [[-1, 1]] }"#,
    )
    .unwrap();
    let o = kanvex(&["gam", "check", "--model", "square.json"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("changes sign near 0"));
}
