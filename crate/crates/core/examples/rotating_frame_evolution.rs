//! The two spin-flip drives: a static `σy ⊗ 1` Hamiltonian over `π/2`, and a
//! rotating-frame drive over `π/ω`. Both end on the same unitary, but their
//! paths in between differ.

use std::f64::consts::FRAC_PI_2;

use holonomy_lab::evolution::{density_path, TimeGrid};
use holonomy_lab::linalg::op_norm;
use holonomy_lab::scenarios::{bell_mixture, rotating_spec, spin_flip_unitary, static_spec};

fn main() -> holonomy_lab::Result<()> {
    let flip = spin_flip_unitary();
    let s = static_spec();
    for u in [0.5, 1.0, 2.0] {
        let r = rotating_spec(u)?;
        println!(
            "u = {u}: τ = {:.4}, ‖U_r(τ) − U_sf‖ = {:.2e}",
            r.duration(),
            op_norm(&(r.unitary_at(r.duration())? - &flip))
        );
    }
    println!("static: ‖U_s(π/2) − U_sf‖ = {:.2e}", op_norm(&(s.unitary_at(FRAC_PI_2)? - &flip)));

    // Same endpoints, different intermediate states.
    let rho = bell_mixture(0.5)?;
    let r = rotating_spec(1.0)?;
    let path_s = density_path(&rho, &s, &TimeGrid::uniform(FRAC_PI_2, 4)?)?;
    let path_r = density_path(&rho, &r, &TimeGrid::uniform(r.duration(), 4)?)?;
    for (k, (a, b)) in path_s.iter().zip(&path_r).enumerate() {
        println!("fraction {:.2}: ‖ρ_static − ρ_rotating‖ = {:.4}", k as f64 / 4.0, a.distance(b));
    }
    let h = r.hamiltonian_at(0.3).expect("rotating drives expose their generator");
    println!("rotating generator at t = 0.3 has norm {:.4}", op_norm(&h));
    Ok(())
}
