//! Parallel transport of amplitudes along sampled density-operator paths.
//!
//! The lift is built step by step: with `A_k = rho_{k+1}^{1/2} rho_k^{1/2}`
//! and `Ũ_k` the partial isometry of its polar decomposition,
//! `W_{k+1} = rho_{k+1}^{1/2} Ũ_k ⋯ Ũ_0 P_0`. Every consecutive pair then
//! satisfies `W_k† W_{k+1} = V_k† (A_k† A_k)^{1/2} V_k ≥ 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{density_path, EvolutionSpec, TimeGrid};
use crate::linalg::{self, c, op_norm, svd_isometry, CMatrix, CVector};
use crate::state::{overlap_residual, Amplitude, DensityOperator, GaugeIsometry};

#[derive(Debug, Clone)]
pub struct TransportResult {
    /// `Ṽ(τ)`, a partial isometry on the support of `rho(0)`.
    pub relative_phase_factor: CMatrix,
    pub initial_amplitude: Amplitude,
    pub final_amplitude: Amplitude,
    /// `X = W(τ) W†(0)`.
    pub invariant: CMatrix,
    pub max_step_parallelity_residual: f64,
    pub n_steps: usize,
    pub support_rank: usize,
}

impl TransportResult {
    pub fn dim(&self) -> usize {
        self.invariant.nrows()
    }

    /// The same lift after a global gauge `W(t) ↦ W(t) S`.
    pub fn gauged(&self, s: &GaugeIsometry, tol: f64) -> Result<Self> {
        let w0 = crate::state::apply_gauge(&self.initial_amplitude, s, tol)?;
        let w1 = crate::state::apply_gauge(&self.final_amplitude, s, tol)?;
        let invariant = w1.matrix() * w0.matrix().adjoint();
        Ok(Self {
            invariant,
            initial_amplitude: w0,
            final_amplitude: w1,
            ..self.clone()
        })
    }
}

/// Samples of the ancilla gauge `B(t_k)` in `W(t) = U(t) rho^{1/2}(0) B(t)`.
#[derive(Debug, Clone)]
pub struct AncillaGauge {
    pub samples: Vec<CMatrix>,
    pub grid: TimeGrid,
    /// Set when `rho(0)` has zero eigenvalues and `B` is only fixed on its
    /// support.
    pub rank_deficient: bool,
}

impl AncillaGauge {
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> CMatrix) -> Self {
        Self {
            samples: grid.times().iter().map(|&t| f(t)).collect(),
            grid: grid.clone(),
            rank_deficient: false,
        }
    }

    pub fn constant(grid: &TimeGrid, b: &CMatrix) -> Self {
        Self::from_fn(grid, |_| b.clone())
    }
}

/// A parallel lift together with every intermediate amplitude.
#[derive(Debug, Clone)]
pub struct ParallelLift {
    pub result: TransportResult,
    pub amplitudes: Vec<CMatrix>,
}

/// Holonomy invariant and relative phase factor of a sampled path.
pub fn discrete_holonomy(path: &[DensityOperator], tol: f64) -> Result<TransportResult> {
    Ok(parallel_lift(path, tol)?.result)
}

pub fn parallel_lift(path: &[DensityOperator], tol: f64) -> Result<ParallelLift> {
    if path.len() < 2 {
        return Err(Error::PathTooShort(path.len()));
    }
    let dim = path[0].dim();
    if let Some(bad) = path.iter().find(|r| r.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let rank = path[0].rank(tol);
    let p0 = path[0].support_projector(tol);
    let w0 = path[0].sqrt() * &p0;

    let mut v = p0;
    let mut amplitudes = Vec::with_capacity(path.len());
    amplitudes.push(w0.clone());
    let mut max_residual = 0.0_f64;
    for (step, pair) in path.windows(2).enumerate() {
        let found = pair[1].rank(tol);
        if found != rank {
            return Err(Error::RankChange {
                step: step + 1,
                expected: rank,
                found,
            });
        }
        let overlap = pair[1].sqrt() * pair[0].sqrt();
        let (step_isometry, fidelity_root) = svd_isometry(&overlap, tol);
        let transition_probability = fidelity_root * fidelity_root;
        if transition_probability <= tol {
            return Err(Error::OrthogonalStep {
                step,
                transition_probability,
            });
        }
        v = step_isometry * v;
        let w = pair[1].sqrt() * &v;
        let prev = amplitudes.last().expect("seeded with W(0)");
        max_residual = max_residual.max(overlap_residual(&(prev.adjoint() * &w)));
        amplitudes.push(w);
    }
    let w_final = amplitudes.last().expect("non-empty").clone();
    let invariant = &w_final * w0.adjoint();
    Ok(ParallelLift {
        result: TransportResult {
            relative_phase_factor: v,
            initial_amplitude: Amplitude::from_matrix_unchecked(w0),
            final_amplitude: Amplitude::from_matrix_unchecked(w_final),
            invariant,
            max_step_parallelity_residual: max_residual,
            n_steps: path.len() - 1,
            support_rank: rank,
        },
        amplitudes,
    })
}

/// Three-point derivative of sampled matrices at node `k`: central inside,
/// one-sided second order at the ends.
fn derivative(samples: &[CMatrix], times: &[f64], k: usize) -> CMatrix {
    let n = samples.len();
    let (a, b, d) = if k == 0 {
        (0, 1, 2)
    } else if k == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (k - 1, k, k + 1)
    };
    let (ta, tb, td) = (times[a], times[b], times[d]);
    let t = times[k];
    // derivatives of the Lagrange basis polynomials through (ta, tb, td) at t
    let la = ((t - tb) + (t - td)) / ((ta - tb) * (ta - td));
    let lb = ((t - ta) + (t - td)) / ((tb - ta) * (tb - td));
    let ld = ((t - ta) + (t - tb)) / ((td - ta) * (td - tb));
    &samples[a] * c(la, 0.0) + &samples[b] * c(lb, 0.0) + &samples[d] * c(ld, 0.0)
}

fn unitaries_on_grid(spec: &EvolutionSpec, grid: &TimeGrid) -> Result<Vec<CMatrix>> {
    grid.times().iter().map(|&t| spec.unitary_at(t)).collect()
}

/// Largest violation of
/// `2 rho^{1/2}(0) U†U̇ rho^{1/2}(0) = B Ḃ† rho(0) − rho(0) Ḃ B†`
/// over interior grid points, restricted to the support of `rho(0)`.
pub fn transport_equation_residual(
    spec: &EvolutionSpec,
    gauge: &AncillaGauge,
    rho0: &DensityOperator,
) -> Result<f64> {
    let n = gauge.samples.len();
    if n < 3 {
        return Err(Error::GridTooCoarse(n));
    }
    if rho0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho0.dim(),
        });
    }
    let times = gauge.grid.times();
    let us = unitaries_on_grid(spec, &gauge.grid)?;
    let root = rho0.sqrt();
    let rho = rho0.matrix();
    let p = rho0.support_projector(linalg::DEFAULT_TOL);
    let mut worst = 0.0_f64;
    for k in 1..n - 1 {
        let du = derivative(&us, times, k);
        let db = derivative(&gauge.samples, times, k);
        let b = &gauge.samples[k];
        let lhs = root * us[k].adjoint() * du * root * c(2.0, 0.0);
        let rhs = b * db.adjoint() * rho - rho * &db * b.adjoint();
        worst = worst.max(op_norm(&(&p * (lhs - rhs) * &p)));
    }
    Ok(worst)
}

/// `max_k |<ψ|U†U̇|ψ> − <φ|B†Ḃ|φ>|` over the grid of `gauge`.
pub fn pure_parallelity_residual(
    spec: &EvolutionSpec,
    gauge: &AncillaGauge,
    psi: &CVector,
    phi: &CVector,
) -> Result<f64> {
    let n = gauge.samples.len();
    if n < 3 {
        return Err(Error::GridTooCoarse(n));
    }
    if psi.len() != spec.dim() || phi.len() != gauge.samples[0].nrows() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: psi.len(),
        });
    }
    let times = gauge.grid.times();
    let us = unitaries_on_grid(spec, &gauge.grid)?;
    let expectation = |m: &CMatrix, v: &CVector| -> Complex64 { (v.adjoint() * m * v)[(0, 0)] };
    let mut worst = 0.0_f64;
    for k in 0..n {
        let du = derivative(&us, times, k);
        let db = derivative(&gauge.samples, times, k);
        let system = expectation(&(us[k].adjoint() * du), psi);
        let ancilla = expectation(&(gauge.samples[k].adjoint() * db), phi);
        worst = worst.max((system - ancilla).norm());
    }
    Ok(worst)
}

/// Recovers `B(t_k) = rho0^{-1/2} U†(t_k) W(t_k)` from the discrete parallel
/// lift on `grid`, projected onto the nearest partial isometry.
pub fn solve_ancilla_gauge(
    spec: &EvolutionSpec,
    rho0: &DensityOperator,
    grid: &TimeGrid,
    tol: f64,
) -> Result<AncillaGauge> {
    if grid.len() < 3 {
        return Err(Error::GridTooCoarse(grid.len()));
    }
    let path = density_path(rho0, spec, grid)?;
    let lift = parallel_lift(&path, tol)?;
    let pinv_root = linalg::hermitian_power(rho0.matrix(), -0.5, tol)?;
    let samples = grid
        .times()
        .iter()
        .zip(&lift.amplitudes)
        .map(|(&t, w)| {
            let raw = &pinv_root * spec.unitary_at(t)?.adjoint() * w;
            Ok(svd_isometry(&raw, tol).0)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AncillaGauge {
        samples,
        grid: grid.clone(),
        rank_deficient: lift.result.support_rank < rho0.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::RotatingFrame;
    use crate::linalg::{diag_real, pauli_z, DEFAULT_TOL, ONE, ZERO};

    fn ket0() -> CVector {
        CVector::from_vec(vec![ONE, ZERO])
    }

    #[test]
    fn constant_path_holonomy_is_the_state() {
        let rho = DensityOperator::new(diag_real(&[0.7, 0.3, 0.0]), DEFAULT_TOL).unwrap();
        let r = discrete_holonomy(&[rho.clone(), rho.clone(), rho.clone()], DEFAULT_TOL).unwrap();
        assert!(op_norm(&(&r.invariant - rho.matrix())) < 1e-14);
        assert!(op_norm(&(&r.relative_phase_factor - diag_real(&[1.0, 1.0, 0.0]))) < 1e-14);
        assert_eq!(r.support_rank, 2);
    }

    #[test]
    fn short_and_orthogonal_paths_fail() {
        let a = DensityOperator::new(diag_real(&[1.0, 0.0]), DEFAULT_TOL).unwrap();
        let b = DensityOperator::new(diag_real(&[0.0, 1.0]), DEFAULT_TOL).unwrap();
        assert!(matches!(discrete_holonomy(std::slice::from_ref(&a), DEFAULT_TOL), Err(Error::PathTooShort(1))));
        assert!(matches!(
            discrete_holonomy(&[a, b], DEFAULT_TOL),
            Err(Error::OrthogonalStep { .. })
        ));
    }

    #[test]
    fn rank_change_is_rejected() {
        let a = DensityOperator::new(diag_real(&[1.0, 0.0]), DEFAULT_TOL).unwrap();
        let b = DensityOperator::new(diag_real(&[0.9, 0.1]), DEFAULT_TOL).unwrap();
        assert!(matches!(
            discrete_holonomy(&[a, b], DEFAULT_TOL),
            Err(Error::RankChange { .. })
        ));
    }

    #[test]
    fn derivative_stencils_are_exact_on_quadratics() {
        let times = vec![0.0, 0.1, 0.3, 0.35, 0.6];
        let samples: Vec<CMatrix> = times
            .iter()
            .map(|t| CMatrix::from_element(1, 1, c(t * t + 2.0 * t, 0.0)))
            .collect();
        for k in 0..times.len() {
            let d = derivative(&samples, &times, k);
            assert!((d[(0, 0)].re - (2.0 * times[k] + 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_residual_examples() {
        let grid = TimeGrid::uniform(1.0, 100).unwrap();
        let spec = EvolutionSpec::static_hamiltonian(pauli_z(), 1.0, DEFAULT_TOL).unwrap();
        let id = AncillaGauge::constant(&grid, &linalg::identity(2));
        let r = pure_parallelity_residual(&spec, &id, &ket0(), &ket0()).unwrap();
        assert!((r - 1.0).abs() < 1e-3);

        let omega = 0.8;
        let phase = EvolutionSpec::static_hamiltonian(linalg::identity(2) * c(omega, 0.0), 1.0, DEFAULT_TOL).unwrap();
        let b = AncillaGauge::from_fn(&grid, |t| linalg::identity(2) * Complex64::from_polar(1.0, -omega * t));
        assert!(pure_parallelity_residual(&phase, &b, &ket0(), &ket0()).unwrap() < 1e-4);

        let coarse = AncillaGauge::constant(&TimeGrid::uniform(1.0, 1).unwrap(), &linalg::identity(2));
        assert!(matches!(
            pure_parallelity_residual(&spec, &coarse, &ket0(), &ket0()),
            Err(Error::GridTooCoarse(2))
        ));
    }

    #[test]
    fn constant_evolution_gauge_is_identity_on_support() {
        let rho = DensityOperator::new(diag_real(&[0.6, 0.4, 0.0, 0.0]), DEFAULT_TOL).unwrap();
        let spec = EvolutionSpec::static_hamiltonian(linalg::zeros(4), 1.0, DEFAULT_TOL).unwrap();
        let grid = TimeGrid::uniform(1.0, 100).unwrap();
        let gauge = solve_ancilla_gauge(&spec, &rho, &grid, DEFAULT_TOL).unwrap();
        assert!(gauge.rank_deficient);
        let p = rho.support_projector(DEFAULT_TOL);
        assert!(gauge.samples.iter().all(|b| op_norm(&(b - &p)) < 1e-12));
    }

    #[test]
    fn rotating_full_rank_gauge_satisfies_the_transport_equation() {
        let spec = EvolutionSpec::rotating_frame(RotatingFrame::resonant_flip(1.0)).unwrap();
        let rho = DensityOperator::new(diag_real(&[0.4, 0.3, 0.2, 0.1]), DEFAULT_TOL).unwrap();
        let coarse = solve_ancilla_gauge(&spec, &rho, &TimeGrid::uniform(spec.duration(), 200).unwrap(), DEFAULT_TOL).unwrap();
        let fine = solve_ancilla_gauge(&spec, &rho, &TimeGrid::uniform(spec.duration(), 400).unwrap(), DEFAULT_TOL).unwrap();
        let r_coarse = transport_equation_residual(&spec, &coarse, &rho).unwrap();
        let r_fine = transport_equation_residual(&spec, &fine, &rho).unwrap();
        assert!(r_fine < 1e-3, "{r_fine}");
        assert!(r_fine < r_coarse);
        let id = AncillaGauge::constant(&coarse.grid, &linalg::identity(4));
        assert!(transport_equation_residual(&spec, &id, &rho).unwrap() > 0.01);
    }
}
