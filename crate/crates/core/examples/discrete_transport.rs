//! Discrete Uhlmann transport of a mixed qubit state around a closed loop,
//! and convergence of the holonomy with the number of steps.

use std::f64::consts::PI;

use holonomy_lab::evolution::{density_path, EvolutionSpec, TimeGrid};
use holonomy_lab::linalg::{self, c, op_norm, DEFAULT_TOL};
use holonomy_lab::offdiag::{diagnose, off_diagonal_invariant};
use holonomy_lab::state::DensityOperator;
use holonomy_lab::transport::discrete_holonomy;

fn main() -> holonomy_lab::Result<()> {
    // Bloch vector of length 0.6 tilted by θ from z, precessing once about z.
    let theta: f64 = 1.0;
    let r = 0.6;
    let bloch = linalg::pauli_z() * c(theta.cos(), 0.0) + linalg::pauli_x() * c(theta.sin(), 0.0);
    let rho = DensityOperator::new((linalg::identity(2) + bloch * c(r, 0.0)) * c(0.5, 0.0), DEFAULT_TOL)?;
    let spec = EvolutionSpec::static_hamiltonian(linalg::pauli_z() * c(0.5, 0.0), 2.0 * PI, DEFAULT_TOL)?;

    let mut previous = None;
    for n in [50, 100, 200, 400, 800] {
        let grid = TimeGrid::uniform(2.0 * PI, n)?;
        let result = discrete_holonomy(&density_path(&rho, &spec, &grid)?, DEFAULT_TOL)?;
        let x = off_diagonal_invariant(&[&result])?;
        let d = diagnose(&x, DEFAULT_TOL);
        let change = previous.map(|p: linalg::CMatrix| op_norm(&(&p - &result.relative_phase_factor)));
        println!(
            "n = {n:4}: ν = {:+.8}  |Tr X| = {:.6}  max step residual {:.1e}  change {}",
            d.phase.unwrap_or(f64::NAN),
            d.trace_magnitude,
            result.max_step_parallelity_residual,
            change.map_or("-".into(), |v| format!("{v:.2e}"))
        );
        previous = Some(result.relative_phase_factor);
    }
    Ok(())
}
