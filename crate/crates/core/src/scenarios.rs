//! The two-qubit spin-flip example: a mixture of Bell states carried to an
//! orthogonal state by a flip of the first qubit, driven either by a static
//! Hamiltonian or by a rotating-frame resonance drive.
//!
//! Conventions: `|ab> = |a> ⊗ |b>` in the computational order
//! `(00, 01, 10, 11)`; the Bell basis is listed as `(Ψ+, Ψ−, Φ+, Φ−)`. All
//! matrices are in the computational basis; [`to_bell_basis`] changes basis.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compare::{interferometric_offdiag_phase, InterferometricPhase, PermutedFamily};
use crate::error::{Error, Result};
use crate::evolution::{density_path, EvolutionSpec, RotatingFrame, TimeGrid};
use crate::linalg::{self, c, kron, op_norm, outer, CMatrix, CVector, I};
use crate::offdiag::{diagnose, off_diagonal_invariant, NodalDiagnosis};
use crate::state::DensityOperator;
use crate::transport::{discrete_holonomy, transport_equation_residual, AncillaGauge};

fn ket(amplitudes: [f64; 4]) -> CVector {
    CVector::from_iterator(4, amplitudes.iter().map(|a| c(*a, 0.0)))
}

/// `(|01> + |10>)/√2`
pub fn psi_plus() -> CVector {
    ket([0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0])
}

/// `(|01> − |10>)/√2`
pub fn psi_minus() -> CVector {
    ket([0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0])
}

/// `(|00> + |11>)/√2`
pub fn phi_plus() -> CVector {
    ket([FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])
}

/// `(|00> − |11>)/√2`
pub fn phi_minus() -> CVector {
    ket([FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2])
}

/// `[Ψ+, Ψ−, Φ+, Φ−]`.
pub fn bell_basis() -> [CVector; 4] {
    [psi_plus(), psi_minus(), phi_plus(), phi_minus()]
}

/// Unitary whose columns are the Bell vectors in the order of [`bell_basis`].
pub fn bell_change_of_basis() -> CMatrix {
    CMatrix::from_columns(&bell_basis())
}

/// Matrix elements `<b_i|M|b_j>` in the Bell basis.
pub fn to_bell_basis(m: &CMatrix) -> CMatrix {
    let b = bell_change_of_basis();
    b.adjoint() * m * b
}

/// Inverse of [`to_bell_basis`].
pub fn from_bell_basis(m: &CMatrix) -> CMatrix {
    let b = bell_change_of_basis();
    &b * m * b.adjoint()
}

/// `(|Ψ−><Ψ−| + ε|Ψ+><Ψ+|)/(1+ε)`.
pub fn bell_mixture(epsilon: f64) -> Result<DensityOperator> {
    mixture(epsilon, &psi_minus(), &psi_plus())
}

/// `(|Φ+><Φ+| + ε|Φ−><Φ−|)/(1+ε)`, the image of [`bell_mixture`] under the flip.
pub fn bell_mixture_flipped(epsilon: f64) -> Result<DensityOperator> {
    mixture(epsilon, &phi_plus(), &phi_minus())
}

fn mixture(epsilon: f64, major: &CVector, minor: &CVector) -> Result<DensityOperator> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::NegativeWeight(epsilon));
    }
    let m = (linalg::projector(major) + linalg::projector(minor) * c(epsilon, 0.0))
        * c(1.0 / (1.0 + epsilon), 0.0);
    DensityOperator::new(m, linalg::DEFAULT_TOL)
}

/// `|Φ+><Ψ−| + |Ψ+><Φ−| − |Ψ−><Φ+| − |Φ−><Ψ+|`, i.e. `(|0>,|1>) ↦ (|1>,−|0>)`
/// on the first qubit.
pub fn spin_flip_unitary() -> CMatrix {
    outer(&phi_plus(), &psi_minus()) + outer(&psi_plus(), &phi_minus())
        - outer(&psi_minus(), &phi_plus())
        - outer(&phi_minus(), &psi_plus())
}

/// `σ_y ⊗ 1`.
pub fn static_hamiltonian() -> CMatrix {
    kron(&linalg::pauli_y(), &linalg::identity(2))
}

/// `e^{-itσ_y} ⊗ 1` on `[0, π/2]`.
pub fn static_spec() -> EvolutionSpec {
    EvolutionSpec::static_hamiltonian(static_hamiltonian(), FRAC_PI_2, linalg::DEFAULT_TOL)
        .expect("σ_y ⊗ 1 is Hermitian")
}

/// The resonant rotating-frame drive with scale `u`, on `[0, π/u]`.
pub fn rotating_spec(u: f64) -> Result<EvolutionSpec> {
    if !u.is_finite() || u <= 0.0 {
        return Err(Error::InvalidArgument(format!("u must be positive, got {u}")));
    }
    EvolutionSpec::rotating_frame(RotatingFrame::resonant_flip(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Static,
    Rotating,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Static => "static",
            Variant::Rotating => "rotating",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Variant::Static),
            "rotating" => Ok(Variant::Rotating),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}'"))),
        }
    }
}

/// Parameters of one run of the spin-flip example.
#[derive(Debug, Clone)]
pub struct BellScenario {
    pub epsilon: f64,
    pub variant: Variant,
    /// Drive scale of the rotating variant (`ω = u`); unused for the static one.
    pub u: f64,
    pub n_steps: usize,
    /// Replaces the default second reference state `ρ2(0) = ρ1(τ)`.
    pub reference_state: Option<DensityOperator>,
    pub tol: f64,
}

impl BellScenario {
    pub fn new(epsilon: f64, variant: Variant) -> Self {
        Self {
            epsilon,
            variant,
            u: 1.0,
            n_steps: TimeGrid::DEFAULT_STEPS,
            reference_state: None,
            tol: linalg::DEFAULT_TOL,
        }
    }

    pub fn with_steps(mut self, n_steps: usize) -> Self {
        self.n_steps = n_steps;
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = u;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_reference_state(mut self, rho: DensityOperator) -> Self {
        self.reference_state = Some(rho);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::NegativeWeight(self.epsilon));
        }
        if self.n_steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "n_steps must be at least 2, got {}",
                self.n_steps
            )));
        }
        if self.variant == Variant::Rotating && !(self.u > 0.0 && self.u.is_finite()) {
            return Err(Error::InvalidArgument(format!("u must be positive, got {}", self.u)));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        self.u
    }

    pub fn tau(&self) -> f64 {
        match self.variant {
            Variant::Static => FRAC_PI_2,
            Variant::Rotating => std::f64::consts::PI / self.omega(),
        }
    }

    pub fn spec(&self) -> Result<EvolutionSpec> {
        match self.variant {
            Variant::Static => Ok(static_spec()),
            Variant::Rotating => rotating_spec(self.u),
        }
    }

    /// `γ(t) = √ε ω t / (1+ε)`.
    pub fn gamma(&self, t: f64) -> f64 {
        self.epsilon.sqrt() * self.omega() * t / (1.0 + self.epsilon)
    }

    /// Closed-form invariants of this variant at `t = τ`.
    pub fn closed_forms(&self) -> ClosedForms {
        match self.variant {
            Variant::Static => static_closed_forms(self.epsilon),
            Variant::Rotating => rotating_closed_forms(self.epsilon, self.gamma(self.tau())),
        }
    }
}

/// `cos γ(t)[|Ψ+><Ψ+| + |Ψ−><Ψ−|] − i sin γ(t)[|Ψ+><Ψ−| + |Ψ−><Ψ+|]`, the
/// ancilla gauge keeping the rotating-frame lift of `ρ1` parallel.
pub fn closed_form_b_r1(s: &BellScenario, t: f64) -> Result<CMatrix> {
    if s.variant != Variant::Rotating {
        return Err(Error::WrongVariant("the closed-form gauge exists for the rotating drive only"));
    }
    let tau = s.tau();
    if !(0.0..=tau * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::OutOfRange { t, duration: tau });
    }
    let g = s.gamma(t);
    let (pp, pm) = (psi_plus(), psi_minus());
    let diagonal = linalg::projector(&pp) + linalg::projector(&pm);
    let swap = outer(&pp, &pm) + outer(&pm, &pp);
    Ok(diagonal * c(g.cos(), 0.0) - swap * (I * g.sin()))
}

/// Transport-equation residual of [`closed_form_b_r1`] on the scenario grid,
/// restricted to the support of `ρ1(0)`.
pub fn closed_form_gauge_residual(s: &BellScenario) -> Result<f64> {
    s.validate()?;
    let spec = s.spec()?;
    let tau = s.tau();
    let grid = TimeGrid::uniform(tau, s.n_steps)?;
    let samples = grid
        .times()
        .iter()
        .map(|&t| closed_form_b_r1(s, t.min(tau)))
        .collect::<Result<Vec<_>>>()?;
    let rho1 = bell_mixture(s.epsilon)?;
    let gauge = AncillaGauge {
        samples,
        grid,
        rank_deficient: rho1.rank(s.tol) < 4,
    };
    transport_equation_residual(&spec, &gauge, &rho1)
}

/// Closed-form invariants for one variant.
#[derive(Debug, Clone)]
pub struct ClosedForms {
    pub x1: CMatrix,
    pub x2: CMatrix,
    /// `X1 · X2` of the closed forms, the reference for the computed `X12`.
    pub x12_product: CMatrix,
    /// The expanded textbook `X12` expression, kept for comparison; it
    /// disagrees with `x12_product` except at `ε = 1`.
    pub x12_printed: CMatrix,
}

fn scaled(m: CMatrix, s: f64) -> CMatrix {
    m * c(s, 0.0)
}

/// `X1 = (|Φ+><Ψ−| − ε|Φ−><Ψ+|)/(1+ε)`, `X2 = (ε|Ψ+><Φ−| − |Ψ−><Φ+|)/(1+ε)`.
pub fn static_closed_forms(epsilon: f64) -> ClosedForms {
    let n = 1.0 / (1.0 + epsilon);
    let x1 = scaled(
        outer(&phi_plus(), &psi_minus()) - scaled(outer(&phi_minus(), &psi_plus()), epsilon),
        n,
    );
    let x2 = scaled(
        scaled(outer(&psi_plus(), &phi_minus()), epsilon) - outer(&psi_minus(), &phi_plus()),
        n,
    );
    let x12_printed = scaled(
        linalg::projector(&phi_plus()) + linalg::projector(&phi_minus()),
        -n * n,
    );
    ClosedForms {
        x12_product: &x1 * &x2,
        x1,
        x2,
        x12_printed,
    }
}

/// Rotating-frame closed forms with `γ = γ(τ)`.
pub fn rotating_closed_forms(epsilon: f64, gamma: f64) -> ClosedForms {
    let n = 1.0 / (1.0 + epsilon);
    let (cg, sg, se) = (gamma.cos(), gamma.sin(), epsilon.sqrt());
    let (fp, fm, pp, pm) = (phi_plus(), phi_minus(), psi_plus(), psi_minus());
    let x1 = scaled(
        scaled(outer(&fp, &pm) - scaled(outer(&fm, &pp), epsilon), cg)
            + (outer(&fm, &pm) - outer(&fp, &pp)) * (I * (se * sg)),
        n,
    );
    let x2 = scaled(
        scaled(scaled(outer(&pp, &fm), epsilon) - outer(&pm, &fp), cg)
            + (outer(&pm, &fm) - outer(&pp, &fp)) * (I * (se * sg)),
        n,
    );
    let x12_printed = scaled(
        scaled(
            linalg::projector(&fp) + scaled(linalg::projector(&fm), epsilon),
            -(cg * cg + epsilon * sg * sg),
        ) + (outer(&fp, &fm) - outer(&fm, &fp)) * (I * (se * (1.0 - epsilon) * sg * cg)),
        n * n,
    );
    ClosedForms {
        x12_product: &x1 * &x2,
        x1,
        x2,
        x12_printed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormErrors {
    pub x1: f64,
    pub x2: f64,
    /// Against `X1 · X2` of the closed forms.
    pub x12: f64,
    /// Against the printed `X12` expression.
    pub x12_printed: f64,
    /// `‖x12_product − x12_printed‖`, independent of the numerics.
    pub printed_vs_product: f64,
}

impl ClosedFormErrors {
    pub fn max(&self) -> f64 {
        self.x1.max(self.x2).max(self.x12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransportResiduals {
    pub parallelity_path1: f64,
    pub parallelity_path2: f64,
    /// Transport-equation residual of the closed-form gauge (rotating only).
    pub closed_form_gauge: Option<f64>,
    /// `‖ρ2(τ) − ρ1(0)‖`.
    pub return_to_start: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub epsilon: f64,
    pub variant: Variant,
    pub u: f64,
    pub n_steps: usize,
    pub tau: f64,
    pub x1: CMatrix,
    pub x2: CMatrix,
    pub x12: CMatrix,
    pub x1_diagnosis: NodalDiagnosis,
    pub x2_diagnosis: NodalDiagnosis,
    pub x12_diagnosis: NodalDiagnosis,
    /// Absent when the reference state was overridden.
    pub closed_form_errors: Option<ClosedFormErrors>,
    pub transport_residuals: TransportResiduals,
    /// Interferometric phases of `{ρ1(0)}` and `{ρ1(0), ρ2(0)}` under `U(τ)`.
    pub gamma1: InterferometricPhase,
    pub gamma2: Option<InterferometricPhase>,
}

/// Transports `ρ1(0)` and `ρ2(0)` along the chosen drive and assembles `X1`,
/// `X2` and `X12 = X1 X2` with diagnostics.
pub fn run_bell_scenario(s: &BellScenario) -> Result<ScenarioReport> {
    s.validate()?;
    let spec = s.spec()?;
    let tau = s.tau();
    let grid = TimeGrid::uniform(tau, s.n_steps)?;
    let rho1 = bell_mixture(s.epsilon)?;
    let rho2 = match &s.reference_state {
        Some(r) => {
            if r.dim() != 4 {
                return Err(Error::DimensionMismatch {
                    expected: 4,
                    found: r.dim(),
                });
            }
            r.clone()
        }
        None => rho1.evolve(&spec.unitary_at(tau)?)?,
    };

    let path1 = density_path(&rho1, &spec, &grid)?;
    let path2 = density_path(&rho2, &spec, &grid)?;
    let return_to_start = path2.last().expect("grid has points").distance(&rho1);
    let (r1, r2) = rayon::join(
        || discrete_holonomy(&path1, s.tol),
        || discrete_holonomy(&path2, s.tol),
    );
    let (r1, r2) = (r1?, r2?);
    let x1 = off_diagonal_invariant(&[&r1])?;
    let x2 = off_diagonal_invariant(&[&r2])?;
    let x12 = off_diagonal_invariant(&[&r1, &r2])?;

    let closed_form_errors = s.reference_state.is_none().then(|| {
        let cf = s.closed_forms();
        ClosedFormErrors {
            x1: op_norm(&(&x1.operator - &cf.x1)),
            x2: op_norm(&(&x2.operator - &cf.x2)),
            x12: op_norm(&(&x12.operator - &cf.x12_product)),
            x12_printed: op_norm(&(&x12.operator - &cf.x12_printed)),
            printed_vs_product: op_norm(&(&cf.x12_product - &cf.x12_printed)),
        }
    });

    let closed_form_gauge = match s.variant {
        Variant::Rotating => Some(closed_form_gauge_residual(s)?),
        Variant::Static => None,
    };

    let u_tau = spec.unitary_at(tau)?;
    let gamma1 = interferometric_offdiag_phase(&u_tau, &bell_family(s.epsilon)?, 1, s.tol)?;
    let gamma2 = if s.reference_state.is_none() {
        Some(interferometric_offdiag_phase(&u_tau, &bell_family(s.epsilon)?, 2, s.tol)?)
    } else {
        None
    };

    Ok(ScenarioReport {
        epsilon: s.epsilon,
        variant: s.variant,
        u: s.u,
        n_steps: s.n_steps,
        tau,
        x1_diagnosis: diagnose(&x1, s.tol),
        x2_diagnosis: diagnose(&x2, s.tol),
        x12_diagnosis: diagnose(&x12, s.tol),
        x1: x1.operator,
        x2: x2.operator,
        x12: x12.operator,
        closed_form_errors,
        transport_residuals: TransportResiduals {
            parallelity_path1: r1.max_step_parallelity_residual,
            parallelity_path2: r2.max_step_parallelity_residual,
            closed_form_gauge,
            return_to_start,
        },
        gamma1,
        gamma2,
    })
}

/// `{ρ1(0), ρ1(τ)}` as a permuted family on the eigenvectors
/// `(Ψ−, Ψ+, Φ+, Φ−)` with weights `(1, ε, 0, 0)/(1+ε)`.
pub fn bell_family(epsilon: f64) -> Result<PermutedFamily> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::NegativeWeight(epsilon));
    }
    let n = 1.0 + epsilon;
    PermutedFamily::new(
        vec![1.0 / n, epsilon / n, 0.0, 0.0],
        CMatrix::from_columns(&[psi_minus(), psi_plus(), phi_plus(), phi_minus()]),
        vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]],
        linalg::DEFAULT_TOL,
    )
}

/// Full-rank Bell-diagonal family with weights `∝ (1, ε, ε², ε³)` on
/// `(Ψ−, Ψ+, Φ+, Φ−)`; the second member swaps the `Ψ` and `Φ` pairs.
pub fn full_rank_bell_family(epsilon: f64) -> Result<PermutedFamily> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::NegativeWeight(epsilon));
    }
    let weights = [1.0, epsilon, epsilon * epsilon, epsilon.powi(3)];
    let total: f64 = weights.iter().sum();
    PermutedFamily::new(
        weights.iter().map(|w| w / total).collect(),
        CMatrix::from_columns(&[psi_minus(), psi_plus(), phi_plus(), phi_minus()]),
        vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]],
        linalg::DEFAULT_TOL,
    )
}
