//! TOML scenario files: a versioned description of states, evolution, time
//! grid and requested invariants.
//!
//! ```toml
//! format_version = 1
//! dimension = 4
//!
//! [[states]]
//! preset = "bell-mixture"
//! epsilon = 0.5
//!
//! [[states]]
//! evolved_from = 1          # U(τ) ρ1 U(τ)†
//!
//! [evolution]
//! kind = "rotating"
//! u = 1.0
//!
//! [grid]
//! n_steps = 2000
//!
//! [[invariants]]
//! path = [1, 2]
//! ```
//!
//! Complex entries are written either as a real number or as `[re, im]`.
//! Path indices are 1-based. Validation errors name the offending field.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::Error;
use crate::evolution::{EvolutionSpec, RotatingFrame, TimeGrid};
use crate::linalg::{self, c, CMatrix};
use crate::scenarios;
use crate::state::DensityOperator;

pub const FORMAT_VERSION: u32 = 1;

/// A rejected scenario file; the message starts with the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ScenarioError(pub String);

fn field_error(field: impl AsRef<str>, err: impl std::fmt::Display) -> ScenarioError {
    ScenarioError(format!("{}: {err}", field.as_ref()))
}

type Parsed<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> num_complex::Complex64 {
        match self {
            Entry::Real(re) => c(re, 0.0),
            Entry::Complex([re, im]) => c(re, im),
        }
    }
}

pub type RawMatrix = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    /// `bell-mixture`, `bell-mixture-flipped`, `maximally-mixed` or `basis`.
    pub preset: Option<String>,
    pub epsilon: Option<f64>,
    /// 1-based basis index for the `basis` preset.
    pub index: Option<usize>,
    pub eigenvalues: Option<Vec<f64>>,
    /// One inner list per eigenvector, in the order of `eigenvalues`.
    pub eigenvectors: Option<RawMatrix>,
    pub matrix: Option<RawMatrix>,
    /// 1-based index of an earlier state, evolved to the end of the grid.
    pub evolved_from: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionEntry {
    /// `static`, `rotating` or `sampled`.
    pub kind: String,
    pub hamiltonian: Option<RawMatrix>,
    pub duration: Option<f64>,
    pub u: Option<f64>,
    pub u_z: Option<f64>,
    pub u_xy: Option<f64>,
    pub omega: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub unitaries: Option<Vec<RawMatrix>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub n_steps: Option<usize>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantEntry {
    pub path: Vec<usize>,
    pub label: Option<String>,
    /// Name of an entry of `[observables]`; the identity when absent.
    pub observable: Option<String>,
    #[serde(default)]
    pub isometry: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesEntry {
    pub tol: Option<f64>,
    pub phase_threshold: Option<f64>,
}

/// The file as written, before validation. Command-line overrides are
/// applied at this level so that sweeps re-validate every row.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub name: Option<String>,
    pub dimension: usize,
    pub states: Vec<StateEntry>,
    pub evolution: EvolutionEntry,
    #[serde(default)]
    pub grid: GridEntry,
    #[serde(default)]
    pub invariants: Vec<InvariantEntry>,
    #[serde(default)]
    pub observables: BTreeMap<String, RawMatrix>,
    #[serde(default)]
    pub tolerances: TolerancesEntry,
}

#[derive(Debug, Clone)]
pub struct InvariantRequest {
    pub label: String,
    pub path: Vec<usize>,
    pub observable: Option<String>,
    pub isometry: bool,
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub dimension: usize,
    pub states: Vec<DensityOperator>,
    pub evolution: EvolutionSpec,
    pub grid: TimeGrid,
    pub invariants: Vec<InvariantRequest>,
    pub observables: BTreeMap<String, CMatrix>,
    pub tol: f64,
    pub phase_threshold: f64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Parsed<Self> {
        let file: Self = toml::from_str(text).map_err(|e| ScenarioError(e.to_string().trim_end().to_owned()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(field_error(
                "format_version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", file.format_version),
            ));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Parsed<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ScenarioError(format!("{}: {}", path.display(), e.0)))
    }

    /// Sets `epsilon` on every preset state that takes one.
    pub fn override_epsilon(&mut self, epsilon: f64) -> Parsed<()> {
        let mut applied = false;
        for s in &mut self.states {
            if matches!(s.preset.as_deref(), Some("bell-mixture" | "bell-mixture-flipped")) {
                s.epsilon = Some(epsilon);
                applied = true;
            }
        }
        if applied {
            Ok(())
        } else {
            Err(field_error("epsilon", "no state of this scenario takes an epsilon"))
        }
    }

    pub fn override_steps(&mut self, n_steps: usize) -> Parsed<()> {
        if self.evolution.kind == "sampled" {
            return Err(field_error("grid.n_steps", "sampled evolutions use their own sample times"));
        }
        self.grid.n_steps = Some(n_steps);
        Ok(())
    }

    pub fn override_u(&mut self, u: f64) -> Parsed<()> {
        if self.evolution.kind != "rotating" {
            return Err(field_error("evolution.u", "only rotating evolutions have a drive scale"));
        }
        self.evolution.u = Some(u);
        Ok(())
    }

    /// Validates every field and builds the scenario. `tol` overrides the
    /// file's own tolerance when given.
    pub fn build(&self, tol: Option<f64>) -> Parsed<Scenario> {
        let dim = self.dimension;
        if dim == 0 {
            return Err(field_error("dimension", "must be positive"));
        }
        let tol = tol.or(self.tolerances.tol).unwrap_or(linalg::DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(field_error("tolerances.tol", format!("must be positive, got {tol}")));
        }
        let phase_threshold = self.tolerances.phase_threshold.unwrap_or(tol * dim as f64);
        if !(phase_threshold >= 0.0 && phase_threshold.is_finite()) {
            return Err(field_error("tolerances.phase_threshold", "must be non-negative"));
        }

        let evolution = self.build_evolution(tol)?;
        let grid = self.build_grid(&evolution)?;
        let u_final = evolution
            .unitary_at(grid.duration())
            .map_err(|e| field_error("grid.tau", e))?;

        if self.states.is_empty() {
            return Err(field_error("states", "at least one state is required"));
        }
        let mut states: Vec<DensityOperator> = Vec::with_capacity(self.states.len());
        for (i, entry) in self.states.iter().enumerate() {
            let field = format!("states[{}]", i + 1);
            let rho = build_state(entry, &field, dim, tol, &states, &u_final)?;
            states.push(rho);
        }

        let mut observables = BTreeMap::new();
        for (name, raw) in &self.observables {
            observables.insert(name.clone(), matrix(raw, &format!("observables.{name}"), dim)?);
        }

        let invariants = if self.invariants.is_empty() {
            default_invariants(states.len())
        } else {
            self.invariants
                .iter()
                .enumerate()
                .map(|(i, inv)| {
                    let field = format!("invariants[{}]", i + 1);
                    if inv.path.is_empty() {
                        return Err(field_error(format!("{field}.path"), "must list at least one state"));
                    }
                    if let Some(&bad) = inv.path.iter().find(|&&j| j == 0 || j > states.len()) {
                        return Err(field_error(
                            format!("{field}.path"),
                            format!("index {bad} out of range 1..={}", states.len()),
                        ));
                    }
                    if let Some(name) = &inv.observable {
                        if !observables.contains_key(name) {
                            return Err(field_error(
                                format!("{field}.observable"),
                                format!("no observable named {name:?}"),
                            ));
                        }
                    }
                    Ok(InvariantRequest {
                        label: inv.label.clone().unwrap_or_else(|| default_label(&inv.path)),
                        path: inv.path.clone(),
                        observable: inv.observable.clone(),
                        isometry: inv.isometry,
                    })
                })
                .collect::<Parsed<Vec<_>>>()?
        };

        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "scenario".into()),
            dimension: dim,
            states,
            evolution,
            grid,
            invariants,
            observables,
            tol,
            phase_threshold,
        })
    }

    fn build_evolution(&self, tol: f64) -> Parsed<EvolutionSpec> {
        let e = &self.evolution;
        let dim = self.dimension;
        let only = |allowed: &[&str]| -> Parsed<()> {
            let given = [
                ("hamiltonian", e.hamiltonian.is_some()),
                ("duration", e.duration.is_some()),
                ("u", e.u.is_some()),
                ("u_z", e.u_z.is_some()),
                ("u_xy", e.u_xy.is_some()),
                ("omega", e.omega.is_some()),
                ("times", e.times.is_some()),
                ("unitaries", e.unitaries.is_some()),
            ];
            match given.iter().find(|(name, set)| *set && !allowed.contains(name)) {
                Some((name, _)) => Err(field_error(
                    format!("evolution.{name}"),
                    format!("not used by {:?} evolutions", e.kind),
                )),
                None => Ok(()),
            }
        };
        match e.kind.as_str() {
            "static" => {
                only(&["hamiltonian", "duration"])?;
                let h = e
                    .hamiltonian
                    .as_ref()
                    .ok_or_else(|| field_error("evolution.hamiltonian", "required for static evolution"))?;
                let h = matrix(h, "evolution.hamiltonian", dim)?;
                let duration = e
                    .duration
                    .ok_or_else(|| field_error("evolution.duration", "required for static evolution"))?;
                EvolutionSpec::static_hamiltonian(h, duration, tol).map_err(|err| match err {
                    Error::NotHermitian { .. } => field_error("evolution.hamiltonian", err),
                    other => field_error("evolution.duration", other),
                })
            }
            "rotating" => {
                only(&["u", "u_z", "u_xy", "omega", "duration"])?;
                let u = e.u.unwrap_or(1.0);
                if !(u > 0.0 && u.is_finite()) {
                    return Err(field_error("evolution.u", format!("must be positive, got {u}")));
                }
                if !dim.is_multiple_of(2) {
                    return Err(field_error("dimension", "rotating evolution needs an even dimension"));
                }
                let mut frame = RotatingFrame::resonant_flip(u);
                frame.ancilla_dim = dim / 2;
                frame.u_z = e.u_z.unwrap_or(frame.u_z);
                frame.u_xy = e.u_xy.unwrap_or(frame.u_xy);
                frame.omega = e.omega.unwrap_or(frame.omega);
                frame.duration = e.duration.unwrap_or(frame.duration);
                EvolutionSpec::rotating_frame(frame).map_err(|err| field_error("evolution", err))
            }
            "sampled" => {
                only(&["times", "unitaries"])?;
                let times = e
                    .times
                    .clone()
                    .ok_or_else(|| field_error("evolution.times", "required for sampled evolution"))?;
                let raw = e
                    .unitaries
                    .as_ref()
                    .ok_or_else(|| field_error("evolution.unitaries", "required for sampled evolution"))?;
                let unitaries = raw
                    .iter()
                    .enumerate()
                    .map(|(k, m)| matrix(m, &format!("evolution.unitaries[{}]", k + 1), dim))
                    .collect::<Parsed<Vec<_>>>()?;
                EvolutionSpec::sampled(times, unitaries, tol.max(1e-8)).map_err(|err| field_error("evolution", err))
            }
            other => Err(field_error(
                "evolution.kind",
                format!("unknown kind {other:?} (expected static, rotating or sampled)"),
            )),
        }
    }

    fn build_grid(&self, evolution: &EvolutionSpec) -> Parsed<TimeGrid> {
        let duration = evolution.duration();
        let tau = self.grid.tau.unwrap_or(duration);
        if !(tau > 0.0 && tau <= duration * (1.0 + 1e-12)) {
            return Err(field_error(
                "grid.tau",
                format!("must lie in (0, {duration}], got {tau}"),
            ));
        }
        match evolution {
            EvolutionSpec::Sampled { times, .. } => {
                if self.grid.n_steps.is_some() {
                    return Err(field_error("grid.n_steps", "sampled evolutions use their own sample times"));
                }
                let kept: Vec<f64> = times.iter().copied().filter(|t| *t <= tau).collect();
                TimeGrid::from_times(kept).map_err(|e| field_error("grid.tau", e))
            }
            _ => {
                let n = self.grid.n_steps.unwrap_or(TimeGrid::DEFAULT_STEPS);
                TimeGrid::uniform(tau, n).map_err(|e| field_error("grid.n_steps", e))
            }
        }
    }
}

fn default_label(path: &[usize]) -> String {
    let digits: Vec<String> = path.iter().map(|j| j.to_string()).collect();
    let sep = if path.iter().any(|&j| j > 9) { "," } else { "" };
    format!("X{}", digits.join(sep))
}

/// Every single-path invariant, then the product over all states in order.
fn default_invariants(n_states: usize) -> Vec<InvariantRequest> {
    let mut paths: Vec<Vec<usize>> = (1..=n_states).map(|j| vec![j]).collect();
    if n_states > 1 {
        paths.push((1..=n_states).collect());
    }
    paths
        .into_iter()
        .map(|path| InvariantRequest {
            label: default_label(&path),
            path,
            observable: None,
            isometry: false,
        })
        .collect()
}

fn matrix(raw: &RawMatrix, field: &str, dim: usize) -> Parsed<CMatrix> {
    if raw.len() != dim {
        return Err(field_error(field, format!("expected {dim} rows, found {}", raw.len())));
    }
    if let Some((i, row)) = raw.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(field_error(
            field,
            format!("row {} has {} entries, expected {dim}", i + 1, row.len()),
        ));
    }
    let m = CMatrix::from_fn(dim, dim, |i, j| raw[i][j].value());
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(field_error(field, Error::NonFinite));
    }
    Ok(m)
}

fn build_state(
    entry: &StateEntry,
    field: &str,
    dim: usize,
    tol: f64,
    earlier: &[DensityOperator],
    u_final: &CMatrix,
) -> Parsed<DensityOperator> {
    let kinds = [
        entry.preset.is_some(),
        entry.eigenvalues.is_some() || entry.eigenvectors.is_some(),
        entry.matrix.is_some(),
        entry.evolved_from.is_some(),
    ];
    if kinds.iter().filter(|k| **k).count() != 1 {
        return Err(field_error(
            field,
            "give exactly one of preset, eigenvalues + eigenvectors, matrix or evolved_from",
        ));
    }
    if entry.preset.is_none() && (entry.epsilon.is_some() || entry.index.is_some()) {
        return Err(field_error(field, "epsilon and index only apply to presets"));
    }
    if let Some(name) = &entry.preset {
        return preset_state(name, entry, field, dim);
    }
    if let Some(j) = entry.evolved_from {
        if j == 0 || j > earlier.len() {
            return Err(field_error(
                format!("{field}.evolved_from"),
                format!("must name an earlier state (1..={}), got {j}", earlier.len()),
            ));
        }
        return earlier[j - 1]
            .evolve(u_final)
            .map_err(|e| field_error(format!("{field}.evolved_from"), e));
    }
    if let Some(raw) = &entry.matrix {
        let m = matrix(raw, &format!("{field}.matrix"), dim)?;
        return DensityOperator::new(m, tol).map_err(|e| field_error(format!("{field}.matrix"), e));
    }
    let values = entry
        .eigenvalues
        .as_ref()
        .ok_or_else(|| field_error(format!("{field}.eigenvalues"), "required with eigenvectors"))?;
    let vectors = entry
        .eigenvectors
        .as_ref()
        .ok_or_else(|| field_error(format!("{field}.eigenvectors"), "required with eigenvalues"))?;
    if values.len() != dim {
        return Err(field_error(
            format!("{field}.eigenvalues"),
            format!("expected {dim} values, found {}", values.len()),
        ));
    }
    // Listed row by row; the operator wants them as columns.
    let v = matrix(vectors, &format!("{field}.eigenvectors"), dim)?.transpose();
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(field_error(
            format!("{field}.eigenvalues"),
            format!("trace is {total:.12}, expected 1"),
        ));
    }
    DensityOperator::from_spectrum(values, &v, tol).map_err(|e| field_error(field, e))
}

fn preset_state(name: &str, entry: &StateEntry, field: &str, dim: usize) -> Parsed<DensityOperator> {
    let needs_epsilon = matches!(name, "bell-mixture" | "bell-mixture-flipped");
    if !needs_epsilon && entry.epsilon.is_some() {
        return Err(field_error(format!("{field}.epsilon"), format!("not used by preset {name:?}")));
    }
    if name != "basis" && entry.index.is_some() {
        return Err(field_error(format!("{field}.index"), format!("not used by preset {name:?}")));
    }
    match name {
        "bell-mixture" | "bell-mixture-flipped" => {
            if dim != 4 {
                return Err(field_error("dimension", format!("preset {name:?} needs dimension 4")));
            }
            let eps = entry
                .epsilon
                .ok_or_else(|| field_error(format!("{field}.epsilon"), "required by this preset"))?;
            let rho = if name == "bell-mixture" {
                scenarios::bell_mixture(eps)
            } else {
                scenarios::bell_mixture_flipped(eps)
            };
            rho.map_err(|e| field_error(format!("{field}.epsilon"), e))
        }
        "maximally-mixed" => Ok(DensityOperator::maximally_mixed(dim)),
        "basis" => {
            let k = entry
                .index
                .ok_or_else(|| field_error(format!("{field}.index"), "required by the basis preset"))?;
            if k == 0 || k > dim {
                return Err(field_error(format!("{field}.index"), format!("out of range 1..={dim}")));
            }
            let mut v = linalg::CVector::zeros(dim);
            v[k - 1] = c(1.0, 0.0);
            DensityOperator::pure(&v, linalg::DEFAULT_TOL).map_err(|e| field_error(field, e))
        }
        other => Err(field_error(
            format!("{field}.preset"),
            format!("unknown preset {other:?} (expected bell-mixture, bell-mixture-flipped, maximally-mixed or basis)"),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BELL: &str = r#"
format_version = 1
dimension = 4

[[states]]
preset = "bell-mixture"
epsilon = 0.5

[[states]]
evolved_from = 1

[evolution]
kind = "rotating"

[grid]
n_steps = 200
"#;

    #[test]
    fn bell_file_builds_with_default_invariants() {
        let s = ScenarioFile::parse(BELL).unwrap().build(None).unwrap();
        assert_eq!(s.states.len(), 2);
        let labels: Vec<_> = s.invariants.iter().map(|i| i.label.as_str()).collect();
        assert_eq!(labels, ["X1", "X2", "X12"]);
        assert_eq!(s.grid.n_steps(), 200);
        assert!((s.grid.duration() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn complex_entries_accept_both_forms() {
        let text = r#"
format_version = 1
dimension = 2
[[states]]
matrix = [[0.5, [0, 0.5]], [[0, -0.5], 0.5]]
[evolution]
kind = "static"
hamiltonian = [[1, 0], [0, -1]]
duration = 1.0
"#;
        let s = ScenarioFile::parse(text).unwrap().build(None).unwrap();
        assert_eq!(s.states[0].matrix()[(0, 1)], c(0.0, 0.5));
        assert_eq!(s.states[0].rank(1e-9), 1);
    }

    #[test]
    fn errors_name_the_field() {
        let bad_trace = BELL.replace("evolved_from = 1", "matrix = [[0.2,0,0,0],[0,0.2,0,0],[0,0,0.2,0],[0,0,0,0.2]]");
        let err = ScenarioFile::parse(&bad_trace).unwrap().build(None).unwrap_err();
        assert!(err.0.starts_with("states[2].matrix"), "{err}");
        assert!(err.0.contains("trace"), "{err}");

        let bad_version = BELL.replace("format_version = 1", "format_version = 2");
        assert!(ScenarioFile::parse(&bad_version).unwrap_err().0.starts_with("format_version"));

        let unknown = format!("{BELL}\n[[invariants]]\npath = [1, 3]\n");
        let err = ScenarioFile::parse(&unknown).unwrap().build(None).unwrap_err();
        assert!(err.0.starts_with("invariants[1].path"), "{err}");

        let typo = BELL.replace("n_steps", "nsteps");
        assert!(ScenarioFile::parse(&typo).unwrap_err().0.contains("nsteps"));
    }

    #[test]
    fn overrides_apply_and_reject_inapplicable_parameters() {
        let mut f = ScenarioFile::parse(BELL).unwrap();
        f.override_epsilon(2.0).unwrap();
        f.override_steps(50).unwrap();
        f.override_u(2.0).unwrap();
        let s = f.build(None).unwrap();
        assert_eq!(s.grid.n_steps(), 50);
        assert!((s.grid.duration() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);

        let mut g = ScenarioFile::parse(&BELL.replace("\"rotating\"", "\"static\"")).unwrap();
        assert!(g.override_u(1.0).is_err());
    }
}
