use std::path::{Path, PathBuf};
use std::process::Command;

use hinf_cli::format::load_system;
use hinf_core::model::{nullspace_bases, DEFAULT_RANK_TOL};
use hinf_core::systems::smith_predictor;
use hinf_core::transfer::{eval_ga, eval_transfer, GaArgument};
use num_complex::Complex64;
use serde_json::Value;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn hinf(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_hinf")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let r = hinf(args);
    assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn norm_of_tsh_is_four_at_infinity() {
    let v = json(&["norm", path_str(&example("tsh.json"))]);
    assert!((v["strong_norm"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    assert_eq!(v["frequency"], "inf");
    assert!((v["standard_peak"].as_f64().unwrap() - 2.5788).abs() <= 1e-3);
}

#[test]
fn norm_of_smith_is_finite_frequency_peak() {
    let v = json(&["norm", path_str(&example("smith.json"))]);
    assert!((v["strong_norm"].as_f64().unwrap() - 1.3308).abs() <= 2e-3);
    assert!(v["frequency"].as_f64().unwrap().is_finite());
    assert_eq!(v["asymptotic_norm"].as_f64().unwrap(), 0.0);
}

#[test]
fn norm_of_first_order() {
    let v = json(&["norm", path_str(&example("first_order.json"))]);
    assert_eq!(v["strong_norm"].as_f64().unwrap(), 1.0);
    assert_eq!(v["frequency"].as_f64().unwrap(), 0.0);
}

#[test]
fn config_echoes_flags() {
    let f = example("one_delay.json");
    let v = json(&[
        "norm",
        path_str(&f),
        "--N",
        "12",
        "--axis-tol",
        "1e-7",
        "--corrector-tol",
        "1e-11",
        "--grid-density",
        "64",
        "--rank-tol",
        "1e-9",
        "--max-iter",
        "30",
    ]);
    let c = &v["config"];
    assert_eq!(c["N"], 12);
    assert_eq!(c["axis_tol"].as_f64().unwrap(), 1e-7);
    assert_eq!(c["corrector_tol"].as_f64().unwrap(), 1e-11);
    assert_eq!(c["rank_tol"].as_f64().unwrap(), 1e-9);
    assert_eq!(c["max_iter"], 30);
    let v = json(&["norm", path_str(&example("tsh.json")), "--grid-density", "64"]);
    assert_eq!(v["config"]["grid_density"], 64);
    assert_eq!(json(&["norm", path_str(&example("tsh.json"))])["config"]["grid_density"], 128);
}

#[test]
fn extrema_of_first_order() {
    let v = json(&["extrema", path_str(&example("first_order.json"))]);
    let ex = v["extrema"].as_array().unwrap();
    assert_eq!(ex.len(), 1);
    assert_eq!(ex[0]["omega"].as_f64().unwrap(), 0.0);
    assert!((ex[0]["xi"].as_f64().unwrap() - 1.0).abs() < 1e-14);
}

fn extrema_of(file: &str, extra: &[&str]) -> Vec<(f64, f64)> {
    let path = example(file);
    let mut args = vec!["extrema", path_str(&path)];
    args.extend_from_slice(extra);
    json(&args)["extrema"].as_array().unwrap().iter().map(|p| (p["omega"].as_f64().unwrap(), p["xi"].as_f64().unwrap())).collect()
}

#[test]
fn extrema_of_tsh_peak() {
    let peak = extrema_of("tsh.json", &[]).iter().map(|p| p.1).fold(0.0, f64::max);
    assert!((peak - 2.5788).abs() <= 1e-3, "{peak}");
}

#[test]
fn corrected_frequencies_agree_across_n() {
    let coarse = extrema_of("tsh.json", &["--N", "10"]);
    let fine = extrema_of("tsh.json", &["--N", "30"]);
    assert!(!coarse.is_empty());
    for (w, _) in coarse {
        let d = fine.iter().map(|(v, _)| (v - w).abs()).fold(f64::INFINITY, f64::min);
        assert!(d <= 1e-6, "{w} off by {d}");
    }
}

#[test]
fn include_unconverged_is_a_superset() {
    let a = extrema_of("smith.json", &[]);
    let b = extrema_of("smith.json", &["--include-unconverged"]);
    assert!(b.len() >= a.len());
    assert!(a.iter().all(|p| b.contains(p)));
}

#[test]
fn output_is_deterministic() {
    for cmd in ["norm", "extrema"] {
        for f in ["tsh.json", "smith.json"] {
            let p = example(f);
            let (a, b) = (hinf(&[cmd, path_str(&p)]), hinf(&[cmd, path_str(&p)]));
            assert_eq!(a.code, 0);
            assert_eq!(a.stdout, b.stdout);
        }
    }
}

#[test]
fn bode_first_order_rows() {
    let r = hinf(&["bode", path_str(&example("first_order.json")), "--wmin", "0", "--wmax", "1", "--points", "2"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "omega,magnitude\n0,1\n1,0.7071067811865476\n");
}

#[test]
fn bode_log_spacing() {
    let r = hinf(&["bode", path_str(&example("one_delay.json")), "--wmin", "0.01", "--wmax", "100", "--points", "5", "--log"]);
    assert_eq!(r.code, 0);
    let ws: Vec<f64> = r.stdout.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    for (w, e) in ws.iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
        assert!((w / e - 1.0).abs() < 1e-12);
    }
    assert_eq!(hinf(&["bode", path_str(&example("one_delay.json")), "--wmin", "0", "--log"]).code, 1);
}

fn bode_at(file: &str, w: &str) -> f64 {
    let r = hinf(&["bode", path_str(&example(file)), "--wmin", w, "--wmax", "1e9", "--points", "2"]);
    assert_eq!(r.code, 0);
    r.stdout.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap()
}

#[test]
fn bode_tsh_dc_and_high_frequency() {
    assert!((bode_at("tsh.json", "0") - 2.1 / 1.125).abs() < 1e-14);
    let w = 1e6;
    let g = bode_at("tsh.json", "1e6");
    let sys = load_system(&example("tsh.json")).unwrap();
    let bases = nullspace_bases(&sys, DEFAULT_RANK_TOL).unwrap();
    let ga = eval_ga(&sys, &bases, GaArgument::Frequency(Complex64::new(0.0, w))).unwrap().norm();
    assert!((g - ga).abs() <= 0.05, "{g} vs {ga}");
}

#[test]
fn convert_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["first_order.json", "one_delay.json", "tsh.json", "smith.json"] {
        let once = hinf(&["convert", path_str(&example(f))]);
        assert_eq!(once.code, 0);
        let p = dir.path().join(f);
        std::fs::write(&p, &once.stdout).unwrap();
        let twice = hinf(&["convert", path_str(&p)]);
        assert_eq!(once.stdout, twice.stdout, "{f}");
    }
}

#[test]
fn converted_smith_keeps_transfer_and_norm() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("smith_ddae.json");
    std::fs::write(&p, hinf(&["convert", path_str(&example("smith.json"))]).stdout).unwrap();
    let converted = load_system(&p).unwrap();
    let reference = smith_predictor();
    for k in 0..50 {
        let s = Complex64::new(0.0, 1e-4 * 1.25f64.powi(k));
        let (a, b) = (eval_transfer(&converted, s).unwrap(), eval_transfer(&reference, s).unwrap());
        assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{s}: {a} vs {b}");
    }
    let v = json(&["norm", path_str(&p)]);
    assert!((v["strong_norm"].as_f64().unwrap() - 1.3308).abs() <= 2e-3);
}

#[test]
fn delay_free_lft_converts_to_block_structure() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("lag.json");
    std::fs::write(&p, r#"{"type": "lft", "F": [[2]], "A": [[-1]], "B1": [[1]], "C1": [[3]]}"#).unwrap();
    let v = json(&["convert", path_str(&p)]);
    assert_eq!(v["type"], "ddae");
    let e = v["E"].as_array().unwrap();
    assert!(e.len() > 1);
    for (i, row) in e.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            let expected = if (i, j) == (0, 0) { 2.0 } else { 0.0 };
            assert_eq!(x.as_f64().unwrap(), expected);
        }
    }
}

fn fixture(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn exit_codes_for_malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cases = [
        ("truncated.json", "{\"type\": \"ddae\", \"E\": [[1]]", 4),
        ("unknown_type.json", r#"{"type": "tf", "num": [1]}"#, 4),
        ("bad_shape.json", r#"{"type": "ddae", "E": [[1]], "terms": [{"delay": 0, "A": [[-1, 0]]}], "B": [[1]], "C": [[1]]}"#, 4),
        ("negative_delay.json", r#"{"type": "ddae", "E": [[1]], "terms": [{"delay": -1, "A": [[-1]]}], "B": [[1]], "C": [[1]]}"#, 4),
        ("huge.json", r#"{"type": "ddae", "E": [[1]], "terms": [{"delay": 0, "A": [[-1e999]]}], "B": [[1]], "C": [[1]]}"#, 4),
        (
            "noncausal.json",
            r#"{"type": "ddae", "E": [[1, 0], [0, 0]], "terms": [{"delay": 0, "A": [[-1, 0], [0, 0]]}], "B": [[1], [1]], "C": [[1, 1]]}"#,
            2,
        ),
        ("integrator.json", r#"{"type": "ddae", "E": [[1]], "terms": [{"delay": 0, "A": [[0]]}], "B": [[1]], "C": [[1]]}"#, 3),
        (
            "oscillator.json",
            r#"{"type": "ddae", "E": [[1, 0], [0, 1]], "terms": [{"delay": 0, "A": [[0, 1], [-1, 0]]}], "B": [[0], [1]], "C": [[1, 0]]}"#,
            3,
        ),
    ];
    for (name, text, code) in cases {
        let p = fixture(d, name, text);
        for cmd in ["norm", "extrema"] {
            let r = hinf(&[cmd, path_str(&p)]);
            assert_eq!(r.code, code, "{cmd} {name}: {}", r.stderr);
            assert!(r.stdout.is_empty());
            assert!(!r.stderr.is_empty());
        }
    }
    assert_eq!(hinf(&["convert", path_str(&fixture(d, "t.json", "[1, 2"))]).code, 4);
    assert_eq!(hinf(&["norm", path_str(&d.join("missing.json"))]).code, 1);
    assert_eq!(hinf(&["norm"]).code, 1);
    assert_eq!(hinf(&["norm", path_str(&example("tsh.json")), "--N", "0"]).code, 1);
    assert_eq!(hinf(&["--help"]).code, 0);
}
