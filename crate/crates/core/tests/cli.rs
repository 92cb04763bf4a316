use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::Command;

use holonomy_lab::cli::main_with_args;
use serde_json::Value;

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Runs the CLI in-process; returns (exit code, stdout, stderr).
fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("holonomy-lab").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = cli(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn invariant<'a>(report: &'a Value, label: &str) -> &'a Value {
    report["invariants"]
        .as_array()
        .unwrap()
        .iter()
        .find(|i| i["label"] == label)
        .unwrap_or_else(|| panic!("no invariant {label}"))
}

#[test]
fn static_preset_reports_nodal_x1_and_x12_phase_pi() {
    let r = json(&["run", "--scenario", "bell-static", "--epsilon", "0.5", "--steps", "2000", "--format", "json"]);
    let x1 = invariant(&r, "X1");
    assert_eq!(x1["phase"], "undefined");
    assert!(x1["support_overlap"].as_f64().unwrap() < 1e-9);
    let x12 = invariant(&r, "X12");
    let nu = x12["phase"].as_f64().unwrap();
    assert!((nu.abs() - std::f64::consts::PI).abs() < 1e-8, "{nu}");
    let trace = x12["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 2);
    assert!((trace[0].as_f64().unwrap() + 5.0 / 9.0).abs() < 1e-10);
}

#[test]
fn rotating_preset_at_zero_epsilon_includes_interferometric_phases() {
    let r = json(&["run", "--scenario", "bell-rotating", "--epsilon", "0", "--steps", "1000", "--format", "json"]);
    let gammas = r["interferometric"].as_array().unwrap();
    assert_eq!(gammas.len(), 2);
    assert_eq!(gammas[0]["phase"], "undefined");
    assert!(gammas[1]["phase"].is_number());
    assert_eq!(r["paths"][0]["rank"], 1);
}

#[test]
fn non_unit_trace_file_exits_1_naming_the_trace() {
    let (code, out, err) = cli(&["run", "--scenario", &scenario("invalid_trace.toml")]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("trace"), "{err}");
    assert!(err.contains("states[1].matrix"), "{err}");
}

#[test]
fn malformed_files_exit_1_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "format_version = 1\ndimension = \n").unwrap();
    let (code, _, err) = cli(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");

    std::fs::write(
        &path,
        "format_version = 1\ndimension = 2\n[[states]]\npreset = \"maximally-mixed\"\n[evolution]\nkind = \"warp\"\n",
    )
    .unwrap();
    let (code, _, err) = cli(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("evolution.kind"), "{err}");
}

#[test]
fn numerical_failures_exit_2() {
    // A pure state sent to an orthogonal one in a single sample step.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("jump.toml");
    std::fs::write(
        &path,
        r#"
format_version = 1
dimension = 2
[[states]]
preset = "basis"
index = 1
[evolution]
kind = "sampled"
times = [0.0, 1.0]
unitaries = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]
"#,
    )
    .unwrap();
    let (code, _, err) = cli(&["run", "--scenario", path.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("transition probability"), "{err}");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(cli(&["run"]).0, 1);
    assert_eq!(cli(&["run", "--scenario", "no-such-preset"]).0, 1);
    assert_eq!(cli(&["run", "--scenario", "bell-static", "--epsilon", "-1"]).0, 1);
    assert_eq!(cli(&["run", "--scenario", "bell-static", "--format", "yaml"]).0, 1);
    assert_eq!(cli(&["verify", "--only", "no-such-group"]).0, 1);
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep"));
}

#[test]
fn identical_inputs_give_byte_identical_output() {
    for format in ["json", "csv", "text"] {
        let args = ["run", "--scenario", "bell-rotating", "--steps", "500", "--dump-isometry", "--format", format];
        let a = cli(&args);
        let b = cli(&args);
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1, "{format}");
    }
    let file = scenario("qubit_observable.toml");
    assert_eq!(cli(&["run", "--scenario", &file, "--format", "json"]).1, cli(&["run", "--scenario", &file, "--format", "json"]).1);
}

fn json_leaves(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| json_leaves(&join(prefix, k), v, out)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, v)| json_leaves(&join(prefix, &i.to_string()), v, out)),
        Value::String(s) => {
            out.insert(prefix.to_owned(), s.clone());
        }
        other => {
            out.insert(prefix.to_owned(), other.to_string());
        }
    }
}

fn join(prefix: &str, k: &str) -> String {
    if prefix.is_empty() {
        k.to_owned()
    } else {
        format!("{prefix}.{k}")
    }
}

#[test]
fn json_and_csv_carry_identical_numbers() {
    for base in [
        vec!["run", "--scenario", "bell-static", "--steps", "400", "--dump-isometry"],
        vec!["run", "--scenario", "bell-rotating", "--epsilon", "2", "--steps", "400"],
    ] {
        let mut j = base.clone();
        j.extend(["--format", "json"]);
        let mut c = base.clone();
        c.extend(["--format", "csv"]);
        let (_, json_text, _) = cli(&j);
        let (_, csv_text, _) = cli(&c);

        let mut from_json = BTreeMap::new();
        json_leaves("", &serde_json::from_str(&json_text).unwrap(), &mut from_json);
        let mut lines = csv_text.lines();
        assert_eq!(lines.next(), Some("key,value"));
        let from_csv: BTreeMap<String, String> = lines
            .map(|l| {
                let (k, v) = l.split_once(',').unwrap();
                (k.to_owned(), v.trim_matches('"').to_owned())
            })
            .collect();
        // The CSV text of numbers equals the JSON text exactly.
        let numeric = from_csv.iter().filter(|(_, v)| v.parse::<f64>().is_ok()).count();
        assert!(numeric > 100);
        assert_eq!(from_json, from_csv);
    }
}

#[test]
fn printed_numbers_have_at_most_twelve_significant_digits() {
    let (_, csv, _) = cli(&["run", "--scenario", "bell-rotating", "--steps", "300", "--format", "csv"]);
    for line in csv.lines().skip(1) {
        let value = line.rsplit(',').next().unwrap();
        if value.parse::<f64>().is_err() {
            continue;
        }
        let mantissa = value.trim_start_matches('-').split(['e', 'E']).next().unwrap();
        let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
        let significant = digits.trim_start_matches('0').trim_end_matches('0');
        assert!(significant.len() <= 12, "{line}");
    }
}

fn sweep_csv(args: &[&str]) -> Vec<Vec<String>> {
    let (code, out, err) = cli(args);
    assert_eq!(code, 0, "{err}");
    out.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn epsilon_sweep_keeps_x1_traceless() {
    let rows = sweep_csv(&[
        "sweep", "--scenario", "bell-static", "--param", "epsilon", "--values", "0,0.25,0.5,1,2", "--format", "csv",
    ]);
    assert_eq!(
        rows[0],
        [
            "epsilon",
            "abs_trace_x1",
            "abs_trace_x12",
            "nu_x12",
            "support_overlap_x1",
            "support_overlap_x12",
            "closed_form_error",
            "wall_time_ms"
        ]
    );
    let eps: Vec<f64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(eps, [0.0, 0.25, 0.5, 1.0, 2.0]);
    for r in &rows[1..] {
        assert!(r[1].parse::<f64>().unwrap() < 1e-10);
    }
}

#[test]
fn steps_sweep_converges_monotonically() {
    let rows = sweep_csv(&[
        "sweep", "--scenario", "bell-rotating", "--param", "steps", "--values", "250,500,1000,2000", "--format", "csv",
    ]);
    let errors: Vec<f64> = rows[1..].iter().map(|r| r[6].parse().unwrap()).collect();
    assert_eq!(errors.len(), 4);
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
}

#[test]
fn sweep_edge_cases() {
    let rows = sweep_csv(&["sweep", "--scenario", "bell-static", "--param", "u", "--format", "csv"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "u");

    let (code, _, err) = cli(&["sweep", "--scenario", "bell-static", "--param", "omega", "--values", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("omega"));

    let (code, _, _) = cli(&["sweep", "--scenario", "bell-static", "--param", "steps", "--values", "2.5"]);
    assert_eq!(code, 1);
}

#[test]
fn sweep_output_ignoring_wall_time_is_deterministic() {
    let args = ["sweep", "--scenario", "bell-rotating", "--param", "u", "--values", "2,1,0.5", "--format", "csv"];
    let strip = |rows: Vec<Vec<String>>| -> Vec<Vec<String>> {
        rows.into_iter().map(|mut r| {
            r.pop();
            r
        })
        .collect()
    };
    let a = strip(sweep_csv(&args));
    assert_eq!(a, strip(sweep_csv(&args)));
    let u: Vec<&str> = a[1..].iter().map(|r| r[0].as_str()).collect();
    assert_eq!(u, ["2.0", "1.0", "0.5"]);
}

#[test]
fn sweeps_work_on_scenario_files() {
    let rows = sweep_csv(&[
        "sweep", "--scenario", &scenario("bell_static.toml"), "--param", "epsilon", "--values", "0.5,1", "--format", "csv",
    ]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][6], "undefined");
    let (code, _, err) = cli(&["sweep", "--scenario", &scenario("bell_static.toml"), "--param", "u", "--values", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("evolution.u"), "{err}");
}

#[test]
fn file_and_preset_agree() {
    let preset = json(&["run", "--scenario", "bell-static", "--format", "json", "--steps", "2000"]);
    let file = json(&["run", "--scenario", &scenario("bell_static.toml"), "--format", "json"]);
    for label in ["X1", "X12"] {
        assert_eq!(invariant(&preset, label)["operator"], invariant(&file, label)["operator"], "{label}");
    }
    assert!(invariant(&file, "X12")["isometry"].is_array());
}

#[test]
fn every_sample_scenario_runs() {
    for name in ["bell_static.toml", "bell_rotating.toml", "qubit_observable.toml", "sampled_qutrit.toml"] {
        let (code, out, err) = cli(&["run", "--scenario", &scenario(name), "--format", "text"]);
        assert_eq!(code, 0, "{name}: {err}");
        assert!(out.contains("X1"));
    }
}

#[test]
fn tolerance_flag_and_environment() {
    let r = json(&["run", "--scenario", "bell-static", "--steps", "100", "--tol", "1e-7", "--format", "json"]);
    assert_eq!(r["tol"].as_f64(), Some(1e-7));
    assert_eq!(cli(&["run", "--scenario", "bell-static", "--tol", "-1"]).0, 1);

    let bin = env!("CARGO_BIN_EXE_holonomy-lab");
    let out = Command::new(bin)
        .args(["run", "--scenario", "bell-static", "--steps", "100", "--format", "json"])
        .env("HOLONOMY_LAB_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(out.status.success());
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["tol"].as_f64(), Some(1e-6));

    let bad = Command::new(bin)
        .args(["run", "--scenario", "bell-static"])
        .env("HOLONOMY_LAB_TOL", "tiny")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn binary_exit_codes_and_output_file() {
    let bin = env!("CARGO_BIN_EXE_holonomy-lab");
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let status = Command::new(bin)
        .args(["run", "--scenario", "bell-static", "--steps", "200", "--format", "json", "--output"])
        .arg(&target)
        .status()
        .unwrap();
    assert!(status.success());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(r["n_steps"], 200);

    let bad = Command::new(bin)
        .args(["run", "--scenario", &scenario("invalid_trace.toml")])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("trace"));
}

#[test]
fn verify_single_group_is_deterministic_per_seed() {
    let a = cli(&["verify", "--only", "gauge-invariance", "--seed", "5"]);
    let b = cli(&["verify", "--only", "gauge-invariance", "--seed", "5"]);
    assert_eq!(a.0, 0, "{}", a.1);
    assert_eq!(a.1, b.1);
    assert!(a.1.starts_with("PASS gauge-invariance/"));
    let c = cli(&["verify", "--only", "gauge-invariance", "--seed", "6"]);
    assert_ne!(a.1, c.1);

    let j = json(&["verify", "--only", "polar-uniqueness", "--format", "json"]);
    assert_eq!(j["passed"], true);
    assert_eq!(j["properties"][0]["cases"], 200);
}
