//! Unitary families `U(t)`, density-operator paths and time grids.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, pauli_x, pauli_z, CMatrix};
use crate::state::DensityOperator;

/// Relative slack used when matching times against a grid or a duration.
const TIME_SLACK: f64 = 1e-12;

/// Resonant spin-flip drive on the first qubit of a `2 x d` system.
///
/// The propagator is `U(t) = e^{-i t H_eff} e^{+i ω t σ_z / 2} ⊗ 1_d` with
/// `H_eff = (u_z + ω/2) σ_z + u_xy σ_x`. Its generator is
/// `H(t) = H_eff − (ω/2) e^{-i t H_eff} σ_z e^{+i t H_eff}`, see
/// [`RotatingFrame::hamiltonian`]. In this ordering `U†U̇` restricted to the
/// Bell subspaces is time independent, which is what makes the closed-form
/// ancilla gauge of [`crate::scenarios::closed_form_b_r1`] exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingFrame {
    pub u_z: f64,
    pub u_xy: f64,
    pub omega: f64,
    pub ancilla_dim: usize,
    pub duration: f64,
}

impl RotatingFrame {
    /// `u_z = −u/2`, `u_xy = u/2`, `ω = u`, run until `τ = π/ω`, where the
    /// propagator equals the first-qubit spin flip.
    pub fn resonant_flip(u: f64) -> Self {
        Self {
            u_z: -u / 2.0,
            u_xy: u / 2.0,
            omega: u,
            ancilla_dim: 2,
            duration: PI / u,
        }
    }

    pub fn effective_hamiltonian(&self) -> CMatrix {
        pauli_z() * c(self.u_z + self.omega / 2.0, 0.0) + pauli_x() * c(self.u_xy, 0.0)
    }

    fn frame_rotation(&self, t: f64) -> CMatrix {
        let half = self.omega * t / 2.0;
        linalg::CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, half),
                linalg::ZERO,
                linalg::ZERO,
                Complex64::from_polar(1.0, -half),
            ],
        )
    }

    fn qubit_unitary(&self, t: f64) -> CMatrix {
        let eff = linalg::unitary_exp(&self.effective_hamiltonian(), t, f64::INFINITY)
            .expect("effective Hamiltonian is Hermitian");
        eff * self.frame_rotation(t)
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        kron(&self.qubit_unitary(t), &linalg::identity(self.ancilla_dim))
    }

    /// Generator `H(t) = i U̇ U†`.
    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        let h_eff = self.effective_hamiltonian();
        let r = linalg::unitary_exp(&h_eff, t, f64::INFINITY)
            .expect("effective Hamiltonian is Hermitian");
        let qubit = &h_eff - &r * pauli_z() * r.adjoint() * c(self.omega / 2.0, 0.0);
        kron(&qubit, &linalg::identity(self.ancilla_dim))
    }

    pub fn dim(&self) -> usize {
        2 * self.ancilla_dim
    }
}

/// Description of a unitary path `t ∈ [0, τ] ↦ U(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionSpec {
    Static { hamiltonian: CMatrix, duration: f64 },
    RotatingFrame(RotatingFrame),
    /// Unitaries at explicit times; no interpolation between them.
    Sampled {
        times: Vec<f64>,
        unitaries: Vec<CMatrix>,
    },
}

impl EvolutionSpec {
    pub fn static_hamiltonian(hamiltonian: CMatrix, duration: f64, tol: f64) -> Result<Self> {
        linalg::check_square(&hamiltonian)?;
        let deviation = linalg::hermiticity_deviation(&hamiltonian);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        check_duration(duration)?;
        Ok(Self::Static {
            hamiltonian: linalg::hermitian_part(&hamiltonian),
            duration,
        })
    }

    pub fn rotating_frame(frame: RotatingFrame) -> Result<Self> {
        check_duration(frame.duration)?;
        if frame.ancilla_dim == 0 {
            return Err(Error::InvalidArgument("ancilla dimension must be positive".into()));
        }
        if ![frame.u_z, frame.u_xy, frame.omega]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(Self::RotatingFrame(frame))
    }

    /// Sampled unitaries; the first time must be 0 and its unitary the
    /// identity.
    pub fn sampled(times: Vec<f64>, unitaries: Vec<CMatrix>, tol: f64) -> Result<Self> {
        if times.len() != unitaries.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times for {} unitaries",
                times.len(),
                unitaries.len()
            )));
        }
        TimeGrid::from_times(times.clone())?;
        let dim = linalg::check_square(&unitaries[0])?;
        for u in &unitaries {
            linalg::check_square(u)?;
            if u.nrows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.nrows(),
                });
            }
            let deviation = linalg::unitarity_deviation(u);
            if deviation > tol {
                return Err(Error::NotUnitary { deviation });
            }
        }
        let deviation = linalg::op_norm(&(&unitaries[0] - linalg::identity(dim)));
        if deviation > tol {
            return Err(Error::InvalidArgument(format!(
                "first sampled unitary is not the identity (deviation {deviation:.3e})"
            )));
        }
        Ok(Self::Sampled { times, unitaries })
    }

    pub fn duration(&self) -> f64 {
        match self {
            Self::Static { duration, .. } => *duration,
            Self::RotatingFrame(f) => f.duration,
            Self::Sampled { times, .. } => *times.last().expect("validated non-empty"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Static { hamiltonian, .. } => hamiltonian.nrows(),
            Self::RotatingFrame(f) => f.dim(),
            Self::Sampled { unitaries, .. } => unitaries[0].nrows(),
        }
    }

    /// `U(t)`.
    pub fn unitary_at(&self, t: f64) -> Result<CMatrix> {
        let duration = self.duration();
        let slack = TIME_SLACK * duration.max(1.0);
        if !(t >= -slack && t <= duration + slack) {
            return Err(Error::OutOfRange { t, duration });
        }
        let t = t.clamp(0.0, duration);
        match self {
            Self::Static { hamiltonian, .. } => {
                linalg::unitary_exp(hamiltonian, t, f64::INFINITY)
            }
            Self::RotatingFrame(f) => Ok(f.unitary(t)),
            Self::Sampled { times, unitaries } => times
                .iter()
                .position(|s| (s - t).abs() <= slack)
                .map(|k| unitaries[k].clone())
                .ok_or(Error::GridMiss { t }),
        }
    }

    /// Instantaneous Hamiltonian, unavailable for sampled evolutions.
    pub fn hamiltonian_at(&self, t: f64) -> Option<CMatrix> {
        match self {
            Self::Static { hamiltonian, .. } => Some(hamiltonian.clone()),
            Self::RotatingFrame(f) => Some(f.hamiltonian(t)),
            Self::Sampled { .. } => None,
        }
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "duration must be finite and non-negative, got {duration}"
        )));
    }
    Ok(())
}

/// Strictly increasing sample times from `0` to `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub const DEFAULT_STEPS: usize = 1000;

    pub fn uniform(duration: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be positive".into()));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "duration must be positive, got {duration}"
            )));
        }
        let h = duration / n_steps as f64;
        let mut times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * h).collect();
        times[n_steps] = duration;
        Ok(Self { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least two times, got {}",
                times.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid("grid must start at t = 0".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().expect("grid is non-empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `rho(t_k) = U(t_k) rho0 U†(t_k)` on every grid point.
pub fn density_path(
    rho0: &DensityOperator,
    spec: &EvolutionSpec,
    grid: &TimeGrid,
) -> Result<Vec<DensityOperator>> {
    if rho0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho0.dim(),
        });
    }
    grid.times()
        .iter()
        .map(|&t| rho0.evolve(&spec.unitary_at(t)?))
        .collect()
}
