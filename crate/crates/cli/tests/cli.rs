use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gap")).args(args).output().expect("run gap")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

#[test]
fn ball_table_contains_exact_value_above_every_lower_bound() {
    let o = gap(&["bound", "--body", "ball", "--radius", "1", "--dim", "4", "--potential", "uniform", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    let bounds = v["runs"][0]["bounds"].as_array().unwrap();
    let exact = bounds.iter().find(|b| b["method"] == "exact_ball").unwrap()["value"].as_f64().unwrap();
    assert!((exact - 5.289587527091358).abs() < 1e-12);
    for b in bounds.iter().filter(|b| b["kind"] == "lower" && b["assumptions_ok"] == true) {
        assert!(b["value"].as_f64().unwrap() <= exact, "{b}");
    }
}

#[test]
fn box_table_has_exact_row() {
    let o = gap(&["bound", "--body", "box", "--half-width", "1", "--dim", "6", "--potential", "uniform"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("exact_box")).expect("exact row");
    assert!(row.contains(&gapcert::report::format_f64(std::f64::consts::PI.powi(2) / 4.0)));
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["bound", "--body", "{\"kind\":\"ball\""],
        vec!["bound", "--body", "{\"kind\":\"ball\",\"radius\":1,\"dim\":2,\"color\":1}"],
        vec!["bound", "--body", "torus", "--dim", "3"],
        vec!["bound", "--body", "ball"],
        vec!["bound", "--body", "ball", "--dim", "3", "--potential", "radial_power"],
        vec!["bound", "--body", "ball", "--dim", "3", "--radius", "-1"],
        vec!["bound", "--nonsense"],
        vec!["certify", "--body", "ball", "--dim", "3"],
        vec!["gsa", "--body", "box", "--csv", "/nonexistent/file.csv"],
    ] {
        let o = gap(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn no_applicable_bound_exits_three() {
    // uniform weight on an unbounded complement: every method refuses
    let o = gap(&["bound", "--body", "ball_complement", "--radius", "1", "--dim", "6"]);
    assert_eq!(code(&o), 3);
    let w = r#"{"kind":"per_coordinate_cos","beta":1.2}"#;
    let o = gap(&["certify", "--body", "lp_ball", "--p", "3", "--dim", "2", "--weight", w]);
    assert_eq!(code(&o), 3);
}

#[test]
fn validate_sweep_and_alarm() {
    let o = gap(&["validate", "--body", "ball", "--dim", "2..6", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    let runs = v["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 5);
    for r in runs {
        assert_eq!(r["sandwich_ok"], true);
        assert!(r["checks"].as_array().unwrap().len() > 5);
    }
    let o = gap(&["validate", "--body", "box", "--dim", "3", "--inflate-lower", "1.1", "--json"]);
    assert_eq!(code(&o), 4);
    let v = json_of(&o);
    assert!(v["runs"][0]["checks"].as_array().unwrap().iter().any(|c| c["ok"] == false));
}

#[test]
fn validate_gaussian_complement_reports_both_bounds_and_numeric() {
    let o = gap(&[
        "validate",
        "--body",
        "ball_complement",
        "--radius",
        "1",
        "--dim",
        "10",
        "--potential",
        "gaussian",
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let run = &json_of(&o)["runs"][0];
    let methods: Vec<&str> = run["bounds"].as_array().unwrap().iter().map(|b| b["method"].as_str().unwrap()).collect();
    assert!(methods.contains(&"gaussian_complement") && methods.contains(&"bcgm"));
    assert_eq!(run["references"][0]["name"], "sturm_radial");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let body = r#"{"kind":"orlicz","potentials":[{"form":"asym_power","p_plus":2,"p_minus":3}],"box_bound":1,"dim":2}"#;
    for out in [&a, &b] {
        let o = gap(&["validate", "--body", body, "--seed", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

fn numbers(v: &Value, out: &mut Vec<f64>) {
    match v {
        Value::Number(n) => out.push(n.as_f64().unwrap()),
        Value::Array(a) => a.iter().for_each(|x| numbers(x, out)),
        Value::Object(m) => m.values().for_each(|x| numbers(x, out)),
        _ => {}
    }
}

#[test]
fn table_numbers_round_trip_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = gap(&["validate", "--body", "lp_ball", "--p", "4", "--dim", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let mut js = Vec::new();
    numbers(&v, &mut js);
    let text = stdout(&o);
    let mut seen = 0;
    for tok in text.split(|c: char| c.is_whitespace() || c == '=') {
        if tok.contains('e') {
            if let Ok(x) = tok.parse::<f64>() {
                assert!(js.iter().any(|y| y.to_bits() == x.to_bits()), "{tok} not in JSON");
                seen += 1;
            }
        }
    }
    assert!(seen > 10);
}

#[test]
fn spec_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("p.json");
    std::fs::write(
        &spec,
        r#"{"body":{"kind":"ball","radius":2,"dim":3},"potential":{"kind":"uniform"},
            "weight":{"kind":"radial_poly","coeffs":[12,0,-1]},"options":{"seed":1}}"#,
    )
    .unwrap();
    let o = gap(&["certify", "--spec", spec.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_of(&o);
    let value = v["runs"][0]["report"]["value"].as_f64().unwrap();
    assert!((value - 2.0 * 3.0 / 12.0).abs() < 1e-9, "{value}");
    let o = gap(&["bound", "--spec", spec.to_str().unwrap(), "--dim", "5", "--json"]);
    assert_eq!(json_of(&o)["runs"][0]["dim"], 5);
    std::fs::write(&spec, r#"{"body":{"kind":"ball","radius":2,"dim":3},"extra":true}"#).unwrap();
    assert_eq!(code(&gap(&["bound", "--spec", spec.to_str().unwrap()])), 2);
}

/// Midpoint tensor grid on [−1, 1]², f = 3x₁ + x₂.
fn write_csv(path: &Path, m: usize) {
    let mut s = String::from("x1,x2,f,g1,g2\n");
    let at = |i: usize| -1.0 + (2 * i + 1) as f64 / m as f64;
    for i in 0..m {
        for j in 0..m {
            let (x1, x2) = (at(i), at(j));
            s.push_str(&format!("{x1},{x2},{},{},{}\n", 3.0 * x1 + x2, 3.0, 1.0));
        }
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn gsa_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    write_csv(&csv, 50);
    let o = gap(&["gsa", "--body", "box", "--csv", csv.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_of(&o);
    let r = &v["report"];
    assert_eq!(r["lambda_used"]["method"], "exact_box");
    let s: Vec<f64> = r["sobol_upper"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    // additive linear f: true total indices 0.9 and 0.1, bound scales them by 12/pi^2
    let k = 12.0 / std::f64::consts::PI.powi(2);
    assert!((s[0] / (0.9 * k) - 1.0).abs() < 0.02 && (s[1] / (0.1 * k) - 1.0).abs() < 0.02, "{s:?}");
    let o = gap(&["gsa", "--body", "box", "--csv", csv.to_str().unwrap(), "--lambda", "payne_weinberger", "--json"]);
    let loose = json_of(&o)["report"]["sobol_upper"][0].as_f64().unwrap();
    assert!(loose > s[0]);
    let o = gap(&["gsa", "--body", "box", "--csv", csv.to_str().unwrap(), "--lambda", "orlicz"]);
    assert_eq!(code(&o), 3);
}
