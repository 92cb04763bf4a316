//! Both variants of the Bell-state spin-flip example with their closed-form
//! comparisons, residuals and interferometric phases.

use holonomy_lab::linalg::op_norm;
use holonomy_lab::scenarios::{run_bell_scenario, BellScenario, Variant};

fn main() -> holonomy_lab::Result<()> {
    let eps = 0.5;
    let mut x12 = Vec::new();
    for variant in [Variant::Static, Variant::Rotating] {
        let r = run_bell_scenario(&BellScenario::new(eps, variant).with_steps(4000))?;
        let e = r.closed_form_errors.expect("default reference state");
        println!("{variant} (τ = {:.4}, n = {}):", r.tau, r.n_steps);
        println!("  |Tr X1| = {:.2e}, |Tr X12| = {:.6}, ν(X12) = {:?}", r.x1_diagnosis.trace_magnitude, r.x12_diagnosis.trace_magnitude, r.x12_diagnosis.phase);
        println!("  distance to closed forms: X1 {:.1e}, X2 {:.1e}, X12 {:.1e}", e.x1, e.x2, e.x12);
        println!("  expanded X12 expression vs product: {:.4}", e.printed_vs_product);
        println!(
            "  parallelity residuals {:.1e} / {:.1e}, ρ2(τ) vs ρ1(0) {:.1e}",
            r.transport_residuals.parallelity_path1, r.transport_residuals.parallelity_path2, r.transport_residuals.return_to_start
        );
        if let Some(g) = r.transport_residuals.closed_form_gauge {
            println!("  closed-form gauge transport residual {g:.2e}");
        }
        println!("  interferometric γ1 {:?}, γ2 {:?}", r.gamma1.phase(), r.gamma2.and_then(|g| g.phase()));
        x12.push(r.x12);
    }
    println!("path dependence ‖X12(static) − X12(rotating)‖ = {:.4}", op_norm(&(&x12[0] - &x12[1])));
    Ok(())
}
