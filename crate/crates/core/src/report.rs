//! Run reports and their JSON, CSV and text encodings.
//!
//! Every number is rounded to 12 significant digits once and then printed
//! with the same shortest round-trip formatter, so the JSON and CSV
//! encodings of one report carry identical numeric text. Complex numbers
//! are `[re, im]`; phases are radians in `(−π, π]`, or the token
//! `"undefined"` at a nodal point.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::evolution::density_path;
use crate::linalg::{self, CMatrix};
use crate::offdiag::{self, holonomy_isometry, nu_functional_with_threshold, OffDiagInvariant};
use crate::scenario_file::Scenario;
use crate::scenarios::{run_bell_scenario, BellScenario};
use crate::transport::{discrete_holonomy, TransportResult};

pub const UNDEFINED: &str = "undefined";
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// JSON number for `x` after rounding; non-finite values become
/// `"undefined"` rather than `null`.
pub fn num(x: f64) -> Value {
    let r = round_sig(x);
    if r.is_finite() {
        Value::from(r)
    } else {
        Value::from(UNDEFINED)
    }
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn phase(p: Option<f64>) -> Value {
    p.map_or_else(|| Value::from(UNDEFINED), num)
}

pub fn matrix(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Text of a scalar leaf, identical in every encoding.
pub fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One requested invariant with its diagnosis.
#[derive(Debug, Clone)]
pub struct InvariantRecord {
    pub label: String,
    pub path: Vec<usize>,
    pub observable: Option<String>,
    pub operator: CMatrix,
    pub trace: Complex64,
    pub phase: Option<f64>,
    pub support_overlap: f64,
    pub factorization_error: f64,
    /// Requested dump of the holonomy isometry; `Some(None)` when it is
    /// undefined because the invariant vanishes.
    pub isometry: Option<Option<CMatrix>>,
}

impl InvariantRecord {
    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("label".into(), Value::from(self.label.clone()));
        m.insert("path".into(), json!(self.path));
        m.insert(
            "observable".into(),
            Value::from(self.observable.clone().unwrap_or_else(|| "identity".into())),
        );
        m.insert("trace".into(), complex(self.trace));
        m.insert("trace_abs".into(), num(self.trace.norm()));
        m.insert("phase".into(), phase(self.phase));
        m.insert("support_overlap".into(), num(self.support_overlap));
        m.insert("factorization_error".into(), num(self.factorization_error));
        m.insert("operator".into(), matrix(&self.operator));
        if let Some(iso) = &self.isometry {
            m.insert(
                "isometry".into(),
                iso.as_ref().map_or_else(|| Value::from(UNDEFINED), matrix),
            );
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone)]
pub struct PathRecord {
    pub index: usize,
    pub rank: usize,
    pub n_steps: usize,
    pub max_parallelity_residual: f64,
}

/// Everything one `run` produces.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub dimension: usize,
    pub n_steps: usize,
    pub tau: f64,
    pub tol: f64,
    /// Named scalar parameters (`epsilon`, `u`, ...), in display order.
    pub parameters: Vec<(String, f64)>,
    pub paths: Vec<PathRecord>,
    pub invariants: Vec<InvariantRecord>,
    /// Named residuals, in display order.
    pub residuals: Vec<(String, f64)>,
    /// Named distances to closed forms, in display order.
    pub closed_form_errors: Vec<(String, f64)>,
    /// Interferometric phases `(order, trace, phase)`.
    pub interferometric: Vec<(usize, Complex64, Option<f64>)>,
}

fn named(items: &[(String, f64)]) -> Value {
    Value::Object(items.iter().map(|(k, v)| (k.clone(), num(*v))).collect())
}

impl RunReport {
    pub fn find(&self, label: &str) -> Option<&InvariantRecord> {
        self.invariants.iter().find(|r| r.label == label)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("scenario".into(), Value::from(self.scenario.clone()));
        m.insert("dimension".into(), Value::from(self.dimension));
        m.insert("n_steps".into(), Value::from(self.n_steps));
        m.insert("tau".into(), num(self.tau));
        m.insert("tol".into(), num(self.tol));
        m.insert("parameters".into(), named(&self.parameters));
        m.insert(
            "paths".into(),
            Value::Array(
                self.paths
                    .iter()
                    .map(|p| {
                        json!({
                            "index": p.index,
                            "rank": p.rank,
                            "n_steps": p.n_steps,
                            "max_parallelity_residual": num(p.max_parallelity_residual),
                        })
                    })
                    .collect(),
            ),
        );
        m.insert(
            "invariants".into(),
            Value::Array(self.invariants.iter().map(InvariantRecord::to_json).collect()),
        );
        m.insert("residuals".into(), named(&self.residuals));
        if !self.closed_form_errors.is_empty() {
            m.insert("closed_form_errors".into(), named(&self.closed_form_errors));
        }
        if !self.interferometric.is_empty() {
            m.insert(
                "interferometric".into(),
                Value::Array(
                    self.interferometric
                        .iter()
                        .map(|(order, trace, p)| {
                            json!({ "order": order, "trace": complex(*trace), "phase": phase(*p) })
                        })
                        .collect(),
                ),
            );
        }
        Value::Object(m)
    }

    pub fn encode(&self, format: Format) -> String {
        match format {
            Format::Json => pretty(&self.to_json()),
            Format::Csv => flat_csv(&self.to_json()),
            Format::Text => self.text(),
        }
    }

    fn text(&self) -> String {
        let t = |x: f64| scalar_text(&num(x));
        let z = |z: Complex64| scalar_text(&complex(z));
        let mut s = String::new();
        let _ = writeln!(
            s,
            "scenario {}  dimension {}  n_steps {}  tau {}  tol {}",
            self.scenario,
            self.dimension,
            self.n_steps,
            t(self.tau),
            t(self.tol)
        );
        for (k, v) in &self.parameters {
            let _ = writeln!(s, "  {k} = {}", t(*v));
        }
        for p in &self.paths {
            let _ = writeln!(
                s,
                "path {}: rank {}, max parallelity residual {}",
                p.index,
                p.rank,
                t(p.max_parallelity_residual)
            );
        }
        for r in &self.invariants {
            let _ = writeln!(
                s,
                "{} path {:?}{}: trace {}  |trace| {}  phase {}  support_overlap {}",
                r.label,
                r.path,
                r.observable.as_ref().map(|o| format!(" observable {o}")).unwrap_or_default(),
                z(r.trace),
                t(r.trace.norm()),
                scalar_text(&phase(r.phase)),
                t(r.support_overlap)
            );
            let rows = r.operator.nrows();
            for i in 0..rows {
                let row: Vec<String> = (0..rows).map(|j| z(r.operator[(i, j)])).collect();
                let _ = writeln!(s, "    {}", row.join("  "));
            }
            if let Some(iso) = &r.isometry {
                match iso {
                    None => {
                        let _ = writeln!(s, "  isometry {UNDEFINED}");
                    }
                    Some(u) => {
                        let _ = writeln!(s, "  isometry:");
                        for i in 0..rows {
                            let row: Vec<String> = (0..rows).map(|j| z(u[(i, j)])).collect();
                            let _ = writeln!(s, "    {}", row.join("  "));
                        }
                    }
                }
            }
        }
        if !self.residuals.is_empty() {
            let _ = writeln!(s, "residuals:");
            for (k, v) in &self.residuals {
                let _ = writeln!(s, "  {k} = {}", t(*v));
            }
        }
        if !self.closed_form_errors.is_empty() {
            let _ = writeln!(s, "closed-form errors:");
            for (k, v) in &self.closed_form_errors {
                let _ = writeln!(s, "  {k} = {}", t(*v));
            }
        }
        for (order, trace, p) in &self.interferometric {
            let _ = writeln!(
                s,
                "interferometric order {order}: trace {}  phase {}",
                z(*trace),
                scalar_text(&phase(*p))
            );
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Flattens a JSON tree into `key,value` rows with dotted keys
/// (`invariants.2.trace.0`), one row per scalar leaf.
pub fn flat_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        let key = |k: &str| {
            if prefix.is_empty() {
                k.to_owned()
            } else {
                format!("{prefix}.{k}")
            }
        };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, v)| walk(&key(k), v, out)),
            Value::Array(a) => a
                .iter()
                .enumerate()
                .for_each(|(i, v)| walk(&key(&i.to_string()), v, out)),
            leaf => {
                let _ = writeln!(out, "{prefix},{}", csv_field(&scalar_text(leaf)));
            }
        }
    }
    let mut out = String::from("key,value\n");
    walk("", v, &mut out);
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn record(
    label: String,
    path: Vec<usize>,
    x: &OffDiagInvariant,
    observable: Option<(&str, &CMatrix)>,
    dump_isometry: bool,
    tol: f64,
    threshold: f64,
) -> Result<InvariantRecord> {
    let identity = linalg::identity(x.dim());
    let a = observable.map_or(&identity, |(_, a)| a);
    let d = nu_functional_with_threshold(a, x, tol, threshold)?;
    let isometry = if dump_isometry {
        match holonomy_isometry(x, tol) {
            Ok(u) => Some(Some(u)),
            Err(Error::ZeroOperator) => Some(None),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(InvariantRecord {
        label,
        path,
        observable: observable.map(|(name, _)| name.to_owned()),
        operator: x.operator.clone(),
        trace: d.trace,
        phase: d.phase,
        support_overlap: d.support_overlap,
        factorization_error: x.factorization_error(),
        isometry,
    })
}

/// Transports every state of a file scenario and evaluates the requested
/// invariants. `dump_isometry` forces the isometry dump for all of them.
pub fn run_scenario(s: &Scenario, dump_isometry: bool) -> Result<RunReport> {
    let results: Vec<TransportResult> = s
        .states
        .par_iter()
        .map(|rho| discrete_holonomy(&density_path(rho, &s.evolution, &s.grid)?, s.tol))
        .collect::<Result<_>>()?;

    let invariants = s
        .invariants
        .iter()
        .map(|req| {
            let refs: Vec<&TransportResult> = req.path.iter().map(|&j| &results[j - 1]).collect();
            let x = offdiag::off_diagonal_invariant_labeled(&refs, req.path.clone())?;
            let obs = req
                .observable
                .as_ref()
                .map(|name| (name.as_str(), &s.observables[name]));
            record(
                req.label.clone(),
                req.path.clone(),
                &x,
                obs,
                dump_isometry || req.isometry,
                s.tol,
                s.phase_threshold,
            )
        })
        .collect::<Result<_>>()?;

    Ok(RunReport {
        scenario: s.name.clone(),
        dimension: s.dimension,
        n_steps: s.grid.n_steps(),
        tau: s.grid.duration(),
        tol: s.tol,
        parameters: vec![("phase_threshold".into(), s.phase_threshold)],
        paths: results
            .iter()
            .enumerate()
            .map(|(i, r)| PathRecord {
                index: i + 1,
                rank: r.support_rank,
                n_steps: r.n_steps,
                max_parallelity_residual: r.max_step_parallelity_residual,
            })
            .collect(),
        invariants,
        residuals: vec![],
        closed_form_errors: vec![],
        interferometric: vec![],
    })
}

/// The spin-flip example with closed-form comparisons and interferometric
/// phases included.
pub fn run_bell(b: &BellScenario, dump_isometry: bool) -> Result<RunReport> {
    let r = run_bell_scenario(b)?;
    let threshold = b.tol * 4.0;
    let wrap = |m: &CMatrix| OffDiagInvariant::from_constituents(vec![m.clone()], vec![1]);
    let x1 = wrap(&r.x1)?;
    let x2 = OffDiagInvariant::from_constituents(vec![r.x2.clone()], vec![2])?;
    let x12 = OffDiagInvariant::from_constituents(vec![r.x1.clone(), r.x2.clone()], vec![1, 2])?;
    let invariants = vec![
        record("X1".into(), vec![1], &x1, None, dump_isometry, b.tol, threshold)?,
        record("X2".into(), vec![2], &x2, None, dump_isometry, b.tol, threshold)?,
        record("X12".into(), vec![1, 2], &x12, None, dump_isometry, b.tol, threshold)?,
    ];

    let tr = &r.transport_residuals;
    let mut residuals = vec![("return_to_start".to_owned(), tr.return_to_start)];
    if let Some(g) = tr.closed_form_gauge {
        residuals.push(("closed_form_gauge_transport".into(), g));
    }
    let closed_form_errors = r
        .closed_form_errors
        .map(|e| {
            vec![
                ("x1".to_owned(), e.x1),
                ("x2".to_owned(), e.x2),
                ("x12".to_owned(), e.x12),
                ("x12_printed".to_owned(), e.x12_printed),
                ("printed_vs_product".to_owned(), e.printed_vs_product),
            ]
        })
        .unwrap_or_default();
    let mut interferometric = vec![(1, r.gamma1.trace, r.gamma1.phase())];
    if let Some(g2) = r.gamma2 {
        interferometric.push((2, g2.trace, g2.phase()));
    }
    let ranks = [(1, &r.x1), (2, &r.x2)].map(|(i, x)| (i, linalg::numerical_rank(x, b.tol)));

    Ok(RunReport {
        scenario: format!("bell-{}", b.variant),
        dimension: 4,
        n_steps: b.n_steps,
        tau: r.tau,
        tol: b.tol,
        parameters: vec![("epsilon".into(), b.epsilon), ("u".into(), b.u)],
        paths: vec![
            PathRecord {
                index: 1,
                rank: ranks[0].1,
                n_steps: b.n_steps,
                max_parallelity_residual: tr.parallelity_path1,
            },
            PathRecord {
                index: 2,
                rank: ranks[1].1,
                n_steps: b.n_steps,
                max_parallelity_residual: tr.parallelity_path2,
            },
        ],
        invariants,
        residuals,
        closed_form_errors,
        interferometric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::Variant;

    #[test]
    #[allow(clippy::approx_constant)]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(std::f64::consts::PI), 3.14159265359);
        assert_eq!(round_sig(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-0.0), 0.0);
        assert_eq!(scalar_text(&num(1e-20 / 3.0)), "3.33333333333e-21");
        assert_eq!(scalar_text(&phase(None)), UNDEFINED);
    }

    #[test]
    fn csv_rows_follow_the_json_leaves() {
        let v = json!({"a": [1.5, "undefined"], "b": {"c": num(2.0)}});
        assert_eq!(flat_csv(&v), "key,value\na.0,1.5\na.1,undefined\nb.c,2.0\n");
    }

    #[test]
    fn bell_report_carries_the_nodal_point() {
        let b = BellScenario::new(0.5, Variant::Static).with_steps(300);
        let r = run_bell(&b, true).unwrap();
        assert!(r.find("X1").unwrap().phase.is_none());
        let x12 = r.find("X12").unwrap();
        assert!((x12.phase.unwrap().abs() - std::f64::consts::PI).abs() < 1e-8);
        assert!(matches!(x12.isometry, Some(Some(_))));
        assert_eq!(r.interferometric.len(), 2);
    }
}
