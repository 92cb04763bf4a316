//! Interferometric off-diagonal phase
//! `γ = Φ[Tr(U ρ_{j1}^{1/l} U ρ_{j2}^{1/l} ⋯ U ρ_{jl}^{1/l})]`, `Φ[z] = z/|z|`,
//! and its side-by-side comparison with the holonomy functional `ν^(l)(1)`.
//!
//! The two quantities rest on different parallel-transport conditions: the
//! interferometric phase only needs `<ψ_k|U†U̇|ψ_k> = 0` on the common
//! eigenvectors, while the holonomy uses the full Uhlmann lift. Each pipeline
//! below runs under its own condition.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{density_path, EvolutionSpec, TimeGrid};
use crate::linalg::{self, c, hermitian_power, phase_distance, principal_arg, CMatrix};
use crate::offdiag::{diagnose, off_diagonal_invariant, NodalDiagnosis};
use crate::state::DensityOperator;
use crate::transport::{discrete_holonomy, pure_parallelity_residual, AncillaGauge};

/// States sharing one spectrum, differing by a permutation of the
/// eigenvectors they attach the eigenvalues to.
#[derive(Debug, Clone)]
pub struct PermutedFamily {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    permutations: Vec<Vec<usize>>,
}

impl PermutedFamily {
    /// Member `k` is `Σ_i λ_i |v_{π_k(i)}><v_{π_k(i)}|`.
    pub fn new(
        eigenvalues: Vec<f64>,
        eigenvectors: CMatrix,
        permutations: Vec<Vec<usize>>,
        tol: f64,
    ) -> Result<Self> {
        let dim = linalg::check_square(&eigenvectors)?;
        if eigenvalues.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: eigenvalues.len(),
            });
        }
        if eigenvalues.iter().any(|l| *l < -tol) {
            return Err(Error::InvalidState("negative eigenvalue".into()));
        }
        let total: f64 = eigenvalues.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("eigenvalues sum to {total}")));
        }
        let deviation = linalg::unitarity_deviation(&eigenvectors);
        if deviation > tol.max(1e-10) {
            return Err(Error::InvalidState(format!(
                "eigenvectors are not orthonormal (deviation {deviation:.3e})"
            )));
        }
        if permutations.is_empty() {
            return Err(Error::InvalidArgument("family needs at least one member".into()));
        }
        for p in &permutations {
            let mut seen = vec![false; dim];
            if p.len() != dim || p.iter().any(|&i| i >= dim || std::mem::replace(&mut seen[i], true)) {
                return Err(Error::InvalidArgument(format!("{p:?} is not a permutation of 0..{dim}")));
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            permutations,
        })
    }

    pub fn len(&self) -> usize {
        self.permutations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> linalg::CVector {
        self.eigenvectors.column(i).into_owned()
    }

    pub fn member(&self, k: usize) -> DensityOperator {
        let mut m = linalg::zeros(self.dim());
        for (i, lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvector(self.permutations[k][i]);
            m += linalg::projector(&v) * c(*lambda, 0.0);
        }
        DensityOperator::from_hermitian_unchecked(linalg::hermitian_part(&m))
    }

    /// Rank of the shared spectrum.
    pub fn rank(&self, tol: f64) -> usize {
        let max = self.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(*v));
        self.eigenvalues.iter().filter(|v| **v > tol * max).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterferometricPhase {
    pub trace: Complex64,
    /// `Φ[trace]`, absent when `|trace| <= tol`.
    pub factor: Option<Complex64>,
}

impl InterferometricPhase {
    pub fn phase(&self) -> Option<f64> {
        self.factor.map(principal_arg)
    }
}

/// Interferometric phase of the first `l` family members under `u_final`.
pub fn interferometric_offdiag_phase(
    u_final: &CMatrix,
    family: &PermutedFamily,
    l: usize,
    tol: f64,
) -> Result<InterferometricPhase> {
    linalg::check_square(u_final)?;
    if u_final.nrows() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            found: u_final.nrows(),
        });
    }
    let deviation = linalg::unitarity_deviation(u_final);
    if deviation > 1e-8 {
        return Err(Error::NotUnitary { deviation });
    }
    if l == 0 || l > family.len() {
        return Err(Error::InvalidArgument(format!(
            "order {l} out of range for a family of {}",
            family.len()
        )));
    }
    let mut product = linalg::identity(family.dim());
    for k in 0..l {
        let root = hermitian_power(family.member(k).matrix(), 1.0 / l as f64, linalg::DEFAULT_TOL)?;
        product = product * u_final * root;
    }
    let trace = linalg::trace(&product);
    let magnitude = trace.norm();
    Ok(InterferometricPhase {
        trace,
        factor: (magnitude > tol).then(|| trace / magnitude),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub order: usize,
    pub interferometric: InterferometricPhase,
    pub holonomy: NodalDiagnosis,
    /// `|γ − ν|` on the circle, when both phases are defined.
    pub difference: Option<f64>,
    /// `max_k |<ψ_k|U†U̇|ψ_k>|` over the grid and the family's eigenvectors.
    pub weak_transport_residual: f64,
    /// Largest consecutive parallelity residual of the Uhlmann lifts.
    pub uhlmann_parallelity_residual: f64,
    pub rank: usize,
    pub pure: bool,
}

/// Evaluates both definitions for the first `l` members transported by `spec`.
pub fn discrepancy_report(
    spec: &EvolutionSpec,
    family: &PermutedFamily,
    l: usize,
    n_steps: usize,
    tol: f64,
) -> Result<DiscrepancyReport> {
    if family.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: family.dim(),
        });
    }
    let grid = TimeGrid::uniform(spec.duration(), n_steps)?;
    let u_final = spec.unitary_at(spec.duration())?;
    let interferometric = interferometric_offdiag_phase(&u_final, family, l, tol)?;

    let identity_gauge = AncillaGauge::constant(&grid, &linalg::identity(family.dim()));
    let mut weak = 0.0_f64;
    for i in 0..family.dim() {
        let v = family.eigenvector(i);
        weak = weak.max(pure_parallelity_residual(spec, &identity_gauge, &v, &v)?);
    }

    let results = (0..l)
        .map(|k| discrete_holonomy(&density_path(&family.member(k), spec, &grid)?, tol))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<_> = results.iter().collect();
    let x = off_diagonal_invariant(&refs)?;
    let holonomy = diagnose(&x, tol);
    let difference = match (interferometric.phase(), holonomy.phase) {
        (Some(g), Some(n)) => Some(phase_distance(g, n)),
        _ => None,
    };
    let rank = family.rank(tol);
    Ok(DiscrepancyReport {
        order: l,
        interferometric,
        holonomy,
        difference,
        weak_transport_residual: weak,
        uhlmann_parallelity_residual: results
            .iter()
            .map(|r| r.max_step_parallelity_residual)
            .fold(0.0, f64::max),
        rank,
        pure: rank == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, op_norm, DEFAULT_TOL};

    fn family(values: Vec<f64>, perms: Vec<Vec<usize>>) -> PermutedFamily {
        let n = values.len();
        PermutedFamily::new(values, linalg::identity(n), perms, DEFAULT_TOL).unwrap()
    }

    #[test]
    fn identity_evolution_gives_unit_factor() {
        let f = family(vec![0.6, 0.3, 0.1], vec![vec![0, 1, 2]]);
        let g = interferometric_offdiag_phase(&linalg::identity(3), &f, 1, DEFAULT_TOL).unwrap();
        assert!((g.factor.unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn members_permute_eigenvectors() {
        let f = family(vec![0.7, 0.3], vec![vec![0, 1], vec![1, 0]]);
        assert!(op_norm(&(f.member(1).matrix() - diag_real(&[0.3, 0.7]))) < 1e-15);
    }

    #[test]
    fn invalid_families_are_rejected() {
        let id = linalg::identity(2);
        assert!(PermutedFamily::new(vec![0.7, 0.2], id.clone(), vec![vec![0, 1]], DEFAULT_TOL).is_err());
        assert!(PermutedFamily::new(vec![0.7, 0.3], id.clone(), vec![vec![0, 0]], DEFAULT_TOL).is_err());
        assert!(PermutedFamily::new(vec![0.7, 0.3], id * c(2.0, 0.0), vec![vec![0, 1]], DEFAULT_TOL).is_err());
    }

    #[test]
    fn non_unitary_evolution_is_rejected() {
        let f = family(vec![1.0, 0.0], vec![vec![0, 1]]);
        assert!(matches!(
            interferometric_offdiag_phase(&diag_real(&[1.0, 0.5]), &f, 1, DEFAULT_TOL),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn global_phase_enters_l_times() {
        let f = family(vec![0.6, 0.4], vec![vec![0, 1], vec![1, 0]]);
        let u = linalg::unitary_exp(&linalg::pauli_x(), 0.4, DEFAULT_TOL).unwrap();
        let theta = 0.3;
        let shifted = &u * Complex64::from_polar(1.0, theta);
        let a = interferometric_offdiag_phase(&u, &f, 2, DEFAULT_TOL).unwrap();
        let b = interferometric_offdiag_phase(&shifted, &f, 2, DEFAULT_TOL).unwrap();
        assert!((b.trace - a.trace * Complex64::from_polar(1.0, 2.0 * theta)).norm() < 1e-14);
    }
}
