//! Off-diagonal holonomy invariants `X = X_{j1} X_{j2} ⋯ X_{jl}` and the
//! phase functional `ν(A) = arg Tr[A X]`, with nodal-point diagnosis.
//!
//! A phase is reported as undefined, not raised as an error, when the trace
//! vanishes. A sufficient cause is that the left support (range of `XX†`) and
//! the right support (range of `X†X`) are orthogonal, which the diagnosis
//! measures as `‖P_left P_right‖`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, op_norm, polar, principal_arg, right_support_projector, support_projector, CMatrix,
    PolarSide, POLAR_AGREEMENT_TOL,
};
use crate::transport::TransportResult;

#[derive(Debug, Clone)]
pub struct OffDiagInvariant {
    pub operator: CMatrix,
    pub order: usize,
    /// Labels of the constituent paths, in product order.
    pub path_indices: Vec<usize>,
    pub constituents: Vec<CMatrix>,
}

impl OffDiagInvariant {
    pub fn dim(&self) -> usize {
        self.operator.nrows()
    }

    /// Builds the product from explicit `X^(1)` factors.
    pub fn from_constituents(constituents: Vec<CMatrix>, path_indices: Vec<usize>) -> Result<Self> {
        let first = constituents
            .first()
            .ok_or_else(|| Error::InvalidArgument("order must be at least 1".into()))?;
        let dim = linalg::check_square(first)?;
        if path_indices.len() != constituents.len() {
            return Err(Error::InvalidArgument(format!(
                "{} path labels for {} factors",
                path_indices.len(),
                constituents.len()
            )));
        }
        let mut operator = linalg::identity(dim);
        for x in &constituents {
            if x.nrows() != dim || x.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: x.nrows(),
                });
            }
            operator *= x;
        }
        Ok(Self {
            operator,
            order: constituents.len(),
            path_indices,
            constituents,
        })
    }

    /// Distance between the operator and the product of its constituents.
    pub fn factorization_error(&self) -> f64 {
        let product = self
            .constituents
            .iter()
            .fold(linalg::identity(self.dim()), |acc, x| acc * x);
        op_norm(&(product - &self.operator))
    }
}

/// `X^(l)` for the transported paths in the given order, labelled `1..=l`.
pub fn off_diagonal_invariant(results: &[&TransportResult]) -> Result<OffDiagInvariant> {
    let labels = (1..=results.len()).collect();
    off_diagonal_invariant_labeled(results, labels)
}

pub fn off_diagonal_invariant_labeled(
    results: &[&TransportResult],
    path_indices: Vec<usize>,
) -> Result<OffDiagInvariant> {
    OffDiagInvariant::from_constituents(
        results.iter().map(|r| r.invariant.clone()).collect(),
        path_indices,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodalDiagnosis {
    pub trace: Complex64,
    pub trace_magnitude: f64,
    /// `‖P_left P_right‖` of the supports of `XX†` and `X†X`.
    pub support_overlap: f64,
    /// `arg Tr[A X]` in `(-π, π]`, absent at a nodal point.
    pub phase: Option<f64>,
}

impl NodalDiagnosis {
    pub fn phase_defined(&self) -> bool {
        self.phase.is_some()
    }
}

/// `ν(A) = arg Tr[A X]`, undefined when `|Tr[A X]| <= tol * dim`.
///
/// `tol` is also the relative rank cutoff for the support projectors.
pub fn nu_functional(a: &CMatrix, x: &OffDiagInvariant, tol: f64) -> Result<NodalDiagnosis> {
    nu_functional_with_threshold(a, x, tol, tol * x.dim() as f64)
}

/// [`nu_functional`] with an explicit phase-defined threshold on `|Tr[A X]|`.
pub fn nu_functional_with_threshold(
    a: &CMatrix,
    x: &OffDiagInvariant,
    tol: f64,
    threshold: f64,
) -> Result<NodalDiagnosis> {
    linalg::check_same_dim(a, &x.operator)?;
    let trace = linalg::trace(&(a * &x.operator));
    let trace_magnitude = trace.norm();
    let left = support_projector(&x.operator, tol);
    let right = right_support_projector(&x.operator, tol);
    Ok(NodalDiagnosis {
        trace,
        trace_magnitude,
        support_overlap: op_norm(&(left * right)),
        phase: (trace_magnitude > threshold).then(|| principal_arg(trace)),
    })
}

/// Diagnosis with `A = 1`.
pub fn diagnose(x: &OffDiagInvariant, tol: f64) -> NodalDiagnosis {
    nu_functional(&linalg::identity(x.dim()), x, tol).expect("identity has matching dimension")
}

/// The common polar isometry `U = U_L = U_R` of `X`, vanishing on `Ker X`.
pub fn holonomy_isometry(x: &OffDiagInvariant, tol: f64) -> Result<CMatrix> {
    if op_norm(&x.operator) <= tol {
        return Err(Error::ZeroOperator);
    }
    let left = polar(&x.operator, PolarSide::Left, tol)?.isometry;
    let right = polar(&x.operator, PolarSide::Right, tol)?.isometry;
    let deviation = op_norm(&(&left - &right));
    if deviation > POLAR_AGREEMENT_TOL {
        return Err(Error::Inconsistent { deviation });
    }
    Ok(left)
}

/// `Y = W_{j1}†(0) W_{j2}(τ) W_{j2}†(0) ⋯ W_{jl}†(0) W_{j1}(τ)`, the cyclic
/// reordering of `X` that starts from the initial amplitude of the first path.
pub fn alternative_ordering(results: &[&TransportResult]) -> Result<CMatrix> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidArgument("order must be at least 1".into()))?;
    let dim = first.dim();
    let mut y = first.initial_amplitude.matrix().adjoint();
    for r in &results[1..] {
        if r.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.dim(),
            });
        }
        y = y * r.final_amplitude.matrix() * r.initial_amplitude.matrix().adjoint();
    }
    Ok(y * first.final_amplitude.matrix())
}
