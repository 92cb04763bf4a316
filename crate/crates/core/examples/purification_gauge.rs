//! Amplitudes `W` with `ρ = WW†`, the gauge freedom `W → WS`, and the
//! parallelity condition between neighbouring amplitudes.

use holonomy_lab::linalg::{op_norm, unitary_exp, DEFAULT_TOL};
use holonomy_lab::random::{self, rng_for};
use holonomy_lab::state::{apply_gauge, parallelity_residual, standard_purification, GaugeIsometry};

fn main() -> holonomy_lab::Result<()> {
    let mut rng = rng_for(7, "purification-example");
    let rho = random::density(&mut rng, 3, 2);
    let w = standard_purification(&rho);
    println!("rank of ρ: {}", rho.rank(DEFAULT_TOL));
    println!("‖WW† − ρ‖ = {:.2e}", op_norm(&(w.matrix() * w.matrix().adjoint() - rho.matrix())));

    // Unitary on the support, arbitrary partial isometry on the kernel:
    // the state is unchanged, only the ancilla phase moves.
    let s = GaugeIsometry::new(random::support_preserving_gauge(&mut rng, &rho, DEFAULT_TOL), 1e-9)?;
    let ws = apply_gauge(&w, &s, DEFAULT_TOL)?;
    println!("state after gauge differs by {:.2e}", ws.state().distance(&rho));

    // W and its gauge transform are generally not parallel; a small unitary
    // step of the state keeps the standard purification nearly parallel.
    println!("parallelity residual (W, WS) = {:.3}", parallelity_residual(&w, &ws));
    let h = random::hermitian(&mut rng, 3);
    let step = rho.evolve(&unitary_exp(&h, 1e-3, DEFAULT_TOL)?)?;
    let w2 = standard_purification(&step);
    println!("parallelity residual (W(0), ρ(dt)^½) = {:.2e}", parallelity_residual(&w, &w2));
    Ok(())
}
