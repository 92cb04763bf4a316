//! Recovering the ancilla gauge `B(t)` that keeps `W(t) = U(t) ρ^{1/2}(0) B(t)`
//! parallel, and comparing it with the closed form for the rotating drive.

use std::f64::consts::PI;

use holonomy_lab::evolution::TimeGrid;
use holonomy_lab::linalg::{self, op_norm, DEFAULT_TOL};
use holonomy_lab::scenarios::{bell_mixture, closed_form_b_r1, rotating_spec, BellScenario, Variant};
use holonomy_lab::transport::{solve_ancilla_gauge, transport_equation_residual, AncillaGauge};

fn main() -> holonomy_lab::Result<()> {
    let eps = 0.5;
    let rho = bell_mixture(eps)?;
    let p = rho.support_projector(DEFAULT_TOL);
    let spec = rotating_spec(1.0)?;
    let scenario = BellScenario::new(eps, Variant::Rotating);

    println!("   n   trivial gauge   closed form   solved vs closed form");
    for n in [500, 1000, 2000, 4000] {
        let grid = TimeGrid::uniform(PI, n)?;
        let trivial = AncillaGauge::constant(&grid, &linalg::identity(4));
        let closed = AncillaGauge::from_fn(&grid, |t| closed_form_b_r1(&scenario, t).expect("rotating variant"));
        let solved = solve_ancilla_gauge(&spec, &rho, &grid, DEFAULT_TOL)?;
        let gap = grid
            .times()
            .iter()
            .zip(&solved.samples)
            .map(|(&t, b)| {
                let exact = closed_form_b_r1(&scenario, t).expect("rotating variant");
                op_norm(&(&p * b * &p - &p * exact * &p))
            })
            .fold(0.0, f64::max);
        println!(
            "{n:5}   {:.3e}       {:.3e}     {:.3e}",
            transport_equation_residual(&spec, &trivial, &rho)?,
            transport_equation_residual(&spec, &closed, &rho)?,
            gap
        );
    }
    Ok(())
}
