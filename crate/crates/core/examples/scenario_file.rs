//! Describing a run in a TOML scenario file and reading the report back.

use holonomy_lab::report::{run_scenario, Format};
use holonomy_lab::scenario_file::ScenarioFile;

const SCENARIO: &str = r#"
format_version = 1
name = "qutrit-loop"
dimension = 3

[[states]]
eigenvalues = [0.5, 0.3, 0.2]
eigenvectors = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

[[states]]
eigenvalues = [0.2, 0.5, 0.3]
eigenvectors = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

[evolution]
kind = "static"
hamiltonian = [[0, 1, 0], [1, 0, [0, -1]], [0, [0, 1], 0]]
duration = 2.0

[grid]
n_steps = 800

[observables]
shift = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]

[[invariants]]
path = [1, 2]

[[invariants]]
label = "X12 against shift"
path = [1, 2]
observable = "shift"
isometry = true
"#;

fn main() {
    let file = ScenarioFile::parse(SCENARIO).expect("valid scenario");
    let scenario = match file.build(None) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let report = run_scenario(&scenario, false).expect("transport succeeds");
    print!("{}", report.encode(Format::Text));

    // Validation errors name the field they concern.
    let broken = SCENARIO.replace("[0.2, 0.5, 0.3]", "[0.2, 0.5, 0.2]");
    let err = ScenarioFile::parse(&broken).unwrap().build(None).unwrap_err();
    println!("\nrejected: {err}");
}
