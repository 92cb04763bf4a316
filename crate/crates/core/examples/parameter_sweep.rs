//! Drives the command-line front end in-process: an ε sweep of the static
//! example as CSV, ready for plotting.

use holonomy_lab::cli::main_with_args;

fn main() {
    let values: Vec<String> = (0..=8).map(|k| format!("{}", k as f64 * 0.25)).collect();
    let values = values.join(",");
    let args = [
        "holonomy-lab", "sweep", "--scenario", "bell-static", "--param", "epsilon", "--values", &values, "--format", "csv",
    ];
    let code = main_with_args(args, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
