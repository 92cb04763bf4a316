//! A nodal point of the ordinary holonomy and its resolution by the
//! second-order off-diagonal invariant.
//!
//! Under the static flip, `X1 = U_sf ρ1(0)` maps the Ψ subspace onto the Φ
//! subspace: its left and right supports are orthogonal, so `Tr X1 = 0` and
//! the phase is undefined. `X12 = X1 X2` returns to where it started and has
//! a well-defined phase `π`.

use holonomy_lab::linalg::{op_norm, polar, PolarSide, DEFAULT_TOL};
use holonomy_lab::offdiag::{holonomy_isometry, OffDiagInvariant};
use holonomy_lab::scenarios::{run_bell_scenario, to_bell_basis, BellScenario, Variant};

fn main() -> holonomy_lab::Result<()> {
    for eps in [0.25, 0.5, 1.0, 2.0] {
        let r = run_bell_scenario(&BellScenario::new(eps, Variant::Static).with_steps(1000))?;
        println!(
            "ε = {eps:4}: X1 overlap {:.1e} phase {:?} | X12 overlap {:.3} phase {:?}",
            r.x1_diagnosis.support_overlap,
            r.x1_diagnosis.phase,
            r.x12_diagnosis.support_overlap,
            r.x12_diagnosis.phase.map(|p| (p * 1e9).round() / 1e9),
        );
    }

    let r = run_bell_scenario(&BellScenario::new(0.5, Variant::Static))?;
    let x12 = OffDiagInvariant::from_constituents(vec![r.x1.clone(), r.x2.clone()], vec![1, 2])?;
    let u = holonomy_isometry(&x12, DEFAULT_TOL)?;
    println!("\nholonomy isometry of X12 in the Bell basis (Ψ+, Ψ−, Φ+, Φ−), real parts:");
    let ub = to_bell_basis(&u);
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:+.3}", ub[(i, j)].re)).collect();
        println!("  {}", row.join(" "));
    }
    let modulus = polar(&x12.operator, PolarSide::Left, DEFAULT_TOL)?.positive_part;
    println!("‖X12 − U|X12|‖ = {:.1e}", op_norm(&(&x12.operator - &u * modulus)));
    Ok(())
}
