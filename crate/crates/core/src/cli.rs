//! Command-line front end: `run`, `sweep` and `verify`.
//!
//! Exit codes: 0 success (an undefined phase is still a success), 1 parse or
//! validation error, 2 numerical failure, 3 property-suite failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::linalg::DEFAULT_TOL;
use crate::report::{num, phase, pretty, run_bell, run_scenario, scalar_text, Format, RunReport};
use crate::scenario_file::ScenarioFile;
use crate::scenarios::{BellScenario, Variant};
use crate::verify;

pub const TOL_ENV: &str = "HOLONOMY_LAB_TOL";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "holonomy-lab",
    version,
    about = "Uhlmann holonomy and off-diagonal invariants along density-operator paths"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transport the scenario's states and report the requested invariants.
    Run(RunArgs),
    /// Repeat a run over a list of values of one parameter.
    Sweep(SweepArgs),
    /// Run the seeded property suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Preset name (`bell-static`, `bell-rotating`) or path to a TOML file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Drive scale of the rotating variant.
    #[arg(long, allow_negative_numbers = true)]
    pub u: Option<f64>,
    /// Numerical tolerance; defaults to the file's value, then $HOLONOMY_LAB_TOL, then 1e-9.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Include the holonomy isometry of every invariant.
    #[arg(long)]
    pub dump_isometry: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// `epsilon`, `steps` or `u`.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values; empty for a header-only table.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    pub values: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Run a single property group.
    #[arg(long)]
    pub only: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a).and_then(|s| emit(&a.output, &s, out)).map(|_| EXIT_OK),
        Command::Sweep(a) => cmd_sweep(a).and_then(|s| emit(&a.output, &s, out)).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(a).and_then(|(s, code)| emit(&a.output, &s, out).map(|_| code)),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.exit_code()
        }
    }
}

fn emit(o: &OutputArgs, text: &str, out: &mut dyn Write) -> CmdResult<()> {
    match &o.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("output {}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(format!("stdout: {e}"))),
    }
}

fn env_tol() -> CmdResult<Option<f64>> {
    match std::env::var(TOL_ENV) {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Failure::Input(format!("{TOL_ENV}: not a number: {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// A scenario preset or file with the command-line overrides applied.
#[derive(Debug, Clone)]
pub enum Target {
    Bell(BellScenario),
    File(Box<ScenarioFile>, Option<f64>),
}

impl Target {
    /// Resolves `--scenario` and applies `--epsilon/--steps/--u/--tol`.
    pub fn resolve(a: &ScenarioArgs) -> CmdResult<Self> {
        let flag_tol = a.tol;
        if let Some(t) = flag_tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Failure::Input(format!("tol: must be positive, got {t}")));
            }
        }
        let variant = match a.scenario.as_str() {
            "bell-static" => Some(Variant::Static),
            "bell-rotating" => Some(Variant::Rotating),
            _ => None,
        };
        let mut target = match variant {
            Some(v) => {
                let tol = match flag_tol {
                    Some(t) => t,
                    None => env_tol()?.unwrap_or(DEFAULT_TOL),
                };
                Target::Bell(BellScenario::new(0.5, v).with_tol(tol))
            }
            None => {
                let path = PathBuf::from(&a.scenario);
                if !path.exists() {
                    return Err(Failure::Input(format!(
                        "scenario: {:?} is neither a preset (bell-static, bell-rotating) nor an existing file",
                        a.scenario
                    )));
                }
                let file = ScenarioFile::load(&path).map_err(|e| Failure::Input(e.0))?;
                let tol = match flag_tol {
                    Some(t) => Some(t),
                    None if file.tolerances.tol.is_some() => None,
                    None => env_tol()?,
                };
                Target::File(Box::new(file), tol)
            }
        };
        if let Some(e) = a.epsilon {
            target.set("epsilon", e)?;
        }
        if let Some(n) = a.steps {
            target.set("steps", n as f64)?;
        }
        if let Some(u) = a.u {
            target.set("u", u)?;
        }
        Ok(target)
    }

    pub fn set(&mut self, param: &str, value: f64) -> CmdResult<()> {
        match self {
            Target::Bell(b) => match param {
                "epsilon" => b.epsilon = value,
                "steps" => b.n_steps = steps_value(value)?,
                "u" => b.u = value,
                other => return Err(unknown_parameter(other)),
            },
            Target::File(f, _) => match param {
                "epsilon" => f.override_epsilon(value),
                "steps" => f.override_steps(steps_value(value)?),
                "u" => f.override_u(value),
                other => return Err(unknown_parameter(other)),
            }
            .map_err(|e| Failure::Input(e.0))?,
        }
        Ok(())
    }

    /// Validates, then runs. Validation failures map to exit 1, failures of
    /// the numerical pipeline to exit 2.
    pub fn run(&self, dump_isometry: bool) -> CmdResult<RunReport> {
        match self {
            Target::Bell(b) => {
                b.validate().map_err(|e| Failure::Input(bell_field_message(&e)))?;
                Ok(run_bell(b, dump_isometry)?)
            }
            Target::File(f, tol) => {
                let scenario = f.build(*tol).map_err(|e| Failure::Input(e.0))?;
                Ok(run_scenario(&scenario, dump_isometry)?)
            }
        }
    }
}

fn bell_field_message(e: &Error) -> String {
    let field = match e {
        Error::NegativeWeight(_) => "epsilon",
        Error::InvalidGrid(_) => "steps",
        _ => "u",
    };
    format!("{field}: {e}")
}

fn steps_value(v: f64) -> CmdResult<usize> {
    if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Failure::Input(format!("steps: {v} is not a non-negative integer")))
    }
}

fn unknown_parameter(p: &str) -> Failure {
    Failure::Input(format!("param: unknown parameter {p:?} (expected epsilon, steps or u)"))
}

pub fn cmd_run(a: &RunArgs) -> CmdResult<String> {
    let report = Target::resolve(&a.scenario)?.run(a.dump_isometry)?;
    Ok(report.encode(a.output.format))
}

pub const SWEEP_COLUMNS: [&str; 7] = [
    "abs_trace_x1",
    "abs_trace_x12",
    "nu_x12",
    "support_overlap_x1",
    "support_overlap_x12",
    "closed_form_error",
    "wall_time_ms",
];

/// One sweep row as ordered `(column, value)` pairs, the first column being
/// the swept parameter.
pub fn sweep_row(param: &str, value: f64, report: &RunReport, wall_ms: f64) -> CmdResult<Vec<(String, Value)>> {
    let x1 = report
        .invariants
        .iter()
        .find(|r| r.path == [1])
        .ok_or_else(|| Failure::Input("invariants: sweeps need the invariant of path [1]".into()))?;
    let x12 = report
        .invariants
        .iter()
        .find(|r| r.path == [1, 2])
        .ok_or_else(|| Failure::Input("invariants: sweeps need the invariant of path [1, 2]".into()))?;
    let closed_form = report
        .closed_form_errors
        .iter()
        .filter(|(k, _)| matches!(k.as_str(), "x1" | "x2" | "x12"))
        .map(|(_, v)| *v)
        .reduce(f64::max);
    let param_value = if param == "steps" {
        Value::from(value as u64)
    } else {
        num(value)
    };
    let values = [
        num(x1.trace.norm()),
        num(x12.trace.norm()),
        phase(x12.phase),
        num(x1.support_overlap),
        num(x12.support_overlap),
        phase(closed_form),
        num(wall_ms),
    ];
    let mut row = vec![(param.to_owned(), param_value)];
    row.extend(SWEEP_COLUMNS.iter().map(|c| c.to_string()).zip(values));
    Ok(row)
}

fn parse_values(param: &str, raw: &str) -> CmdResult<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v: f64 = s
                .parse()
                .map_err(|_| Failure::Input(format!("values: {s:?} is not a number")))?;
            if param == "steps" {
                steps_value(v)?;
            }
            Ok(v)
        })
        .collect()
}

pub fn cmd_sweep(a: &SweepArgs) -> CmdResult<String> {
    if !matches!(a.param.as_str(), "epsilon" | "steps" | "u") {
        return Err(unknown_parameter(&a.param));
    }
    let values = parse_values(&a.param, &a.values)?;
    let base = Target::resolve(&a.scenario)?;
    let mut targets = Vec::with_capacity(values.len());
    for v in &values {
        let mut t = base.clone();
        t.set(&a.param, *v)?;
        targets.push(t);
    }
    // Rows run in parallel; `collect` keeps input order.
    let rows = targets
        .par_iter()
        .zip(values.par_iter())
        .map(|(t, v)| {
            let start = Instant::now();
            let report = t.run(false)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            sweep_row(&a.param, *v, &report, ms)
        })
        .collect::<CmdResult<Vec<_>>>()?;

    let mut header = vec![a.param.clone()];
    header.extend(SWEEP_COLUMNS.iter().map(|c| c.to_string()));
    Ok(match a.output.format {
        Format::Json => pretty(&Value::Array(
            rows.into_iter()
                .map(|r| Value::Object(r.into_iter().collect::<Map<_, _>>()))
                .collect(),
        )),
        Format::Csv => {
            let mut s = header.join(",");
            s.push('\n');
            for r in &rows {
                let cells: Vec<String> = r.iter().map(|(_, v)| scalar_text(v)).collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let cells: Vec<Vec<String>> = std::iter::once(header)
                .chain(rows.iter().map(|r| r.iter().map(|(_, v)| scalar_text(v)).collect()))
                .collect();
            let widths: Vec<usize> = (0..cells[0].len())
                .map(|j| cells.iter().map(|r| r[j].len()).max().unwrap_or(0))
                .collect();
            let mut s = String::new();
            for r in &cells {
                let line: Vec<String> = r
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect();
                s.push_str(line.join("  ").trim_end());
                s.push('\n');
            }
            s
        }
    })
}

/// Returns the encoded outcomes and the exit code (3 if anything failed).
pub fn cmd_verify(a: &VerifyArgs) -> CmdResult<(String, i32)> {
    let outcomes = verify::run(a.seed, a.only.as_deref()).map_err(|e| match e {
        Error::InvalidArgument(m) => Failure::Input(format!("only: {m}")),
        other => Failure::Numerical(other.to_string()),
    })?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let code = if failed == 0 { EXIT_OK } else { EXIT_VERIFY };
    let text = match a.output.format {
        Format::Text => {
            let mut s: String = outcomes.iter().map(|o| o.line() + "\n").collect();
            s.push_str(&format!(
                "{} properties, {} passed, {} failed (seed {})\n",
                outcomes.len(),
                outcomes.len() - failed,
                failed,
                a.seed
            ));
            s
        }
        Format::Json => pretty(&json!({
            "seed": a.seed,
            "passed": failed == 0,
            "properties": outcomes.iter().map(verify_json).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut s = String::from("group,property,observed,bound,kind,cases,passed\n");
            for o in &outcomes {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    o.group,
                    o.property,
                    scalar_text(&num(o.observed)),
                    scalar_text(&num(o.bound)),
                    if o.at_least { "min" } else { "max" },
                    o.cases,
                    o.passed
                ));
            }
            s
        }
    };
    Ok((text, code))
}

fn verify_json(o: &verify::PropertyOutcome) -> Value {
    json!({
        "group": o.group,
        "property": o.property,
        "observed": num(o.observed),
        "bound": num(o.bound),
        "kind": if o.at_least { "min" } else { "max" },
        "cases": o.cases,
        "passed": o.passed,
    })
}
