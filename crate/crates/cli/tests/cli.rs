use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler-lab"))
        .args(args)
        .env("FINSLER_LAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn klein_curvature_passes_against_minus_one() {
    let out = lab(&["curvature", "--metric", "klein", "--samples", "20"]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert_eq!(r["lambda"], -1.0);
    assert!(r["einstein_residual"].as_f64().unwrap() < 1e-5);
    assert!(r["min_g_eigenvalue"].as_f64().unwrap() > 0.0);
    assert_eq!(r["per_sample"].as_array().unwrap().len(), 20);
}

#[test]
fn euclidean_curvature_is_zero() {
    let r = json(&lab(&["curvature", "--metric", "euclidean", "--samples", "5"]));
    for key in ["k_min", "k_max", "max_k_spread", "einstein_residual"] {
        assert_eq!(r[key], 0.0, "{key}");
    }
}

#[test]
fn bryant_curvature_is_an_experiment() {
    let out = lab(&["curvature", "--metric", "bryant", "--eps", "0.8", "--samples", "5"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["passed"].is_null());
}

#[test]
fn wrong_constant_is_an_assertion_failure() {
    let out = lab(&["curvature", "--metric", "klein", "--samples", "5", "--lambda", "0"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&lab(&["curvature", "--metric", "nope"])), 2);
    assert_eq!(code(&lab(&["curvature"])), 2);
    assert_eq!(code(&lab(&["ode", "--lambda", "1"])), 2);
    assert_eq!(code(&lab(&["geodesic", "--metric", "klein", "--x0", "3,0"])), 2);
    assert_eq!(code(&lab(&["geodesic", "--metric", "klein", "--x0", "a,b"])), 2);
    assert_eq!(code(&lab(&["frobnicate"])), 2);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_finsler-lab"))
        .args(["ode", "--lambda", "0", "--lambdat", "0", "--a", "1", "--b", "0"])
        .env("FINSLER_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad_threads), 2);
}

#[test]
fn funk_projective_report() {
    let out = lab(&[
        "projective",
        "--base",
        "euclidean",
        "--cand",
        "funk+",
        "--samples",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let r = json(&out);
    assert!(r["rapcsak_residual"].as_f64().unwrap() < 1e-7);
    assert!((r["fitted_lambda_tilde"].as_f64().unwrap() + 0.25).abs() < 1e-8);
    assert!(r["xi_relation_residual"].as_f64().unwrap() < 1e-7);
}

#[test]
fn euclidean_geodesic_is_a_straight_line() {
    let out = lab(&[
        "geodesic",
        "--metric",
        "euclidean",
        "--x0",
        "0,0",
        "--y0",
        "1,0",
        "--tspan",
        "0,1",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,v1,v2,f_speed"));
    let mut last_t = -1.0;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        // 17 significant digits: one leading digit and 16 after the point.
        assert!(cols
            .iter()
            .all(|c| c.split('e').next().unwrap().trim_start_matches('-').len() == 18));
        let v: Vec<f64> = cols.iter().map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - v[0]).abs() < 1e-12 && v[2].abs() < 1e-12);
        assert!((v[5] - 1.0).abs() < 1e-12);
        last_t = v[0];
    }
    assert_eq!(last_t, 1.0);
}

#[test]
fn ode_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("case.json");
    let out = lab(&[
        "ode",
        "--lambda",
        "0",
        "--lambdat",
        "1",
        "--a",
        "1",
        "--b",
        "0",
        "--samples",
        "11",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["interval"][0], "-inf");
    assert_eq!(r["interval"][1], "inf");
    assert_eq!(r["closed_form"], "quadratic");
    assert!((r["length_forward"]["value"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("case.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    for row in rows {
        // f^2 = 1 + t^2, F~ = 1 / f^2, and the integrator agrees.
        assert!((row[1] * row[1] - 1.0 - row[0] * row[0]).abs() < 1e-10 * (1.0 + row[0] * row[0]));
        assert!((row[2] * row[1] * row[1] - 1.0).abs() < 1e-12);
        assert!((row[3] - row[1]).abs() < 1e-8 * row[1]);
    }
}

#[test]
fn config_keys_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.toml");
    std::fs::write(
        &cfg,
        "metric = \"euclidean\"\nsamples = 3\n\n[curvature]\nmetric = \"klein\"\n",
    )
    .unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["curvature", "--config", cfg.to_str().unwrap()];
        args.extend_from_slice(extra);
        json(&lab(&args))
    };
    let r = run(&[]);
    assert_eq!(r["metric"], "klein");
    assert_eq!(r["samples"], 3);
    let r = run(&["--samples", "4", "--metric", "spherical"]);
    assert_eq!(r["metric"], "spherical");
    assert_eq!(r["samples"], 4);

    std::fs::write(&cfg, "metrik = \"klein\"\n").unwrap();
    assert_eq!(code(&lab(&["curvature", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(
        code(&lab(&[
            "curvature",
            "--config",
            Path::new("/nonexistent.toml").to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn runs_are_deterministic() {
    let args = ["curvature", "--metric", "funk+", "--samples", "30"];
    let a = lab(&args);
    let single = Command::new(env!("CARGO_BIN_EXE_finsler-lab"))
        .args(args)
        .env("FINSLER_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, single.stdout);
    let g = ["geodesic", "--metric", "klein", "--x0", "0.1,0.2", "--y0", "1,0.5"];
    assert_eq!(lab(&g).stdout, lab(&g).stdout);
}
