//! The interferometric off-diagonal phase against the holonomy functional.
//! They coincide for pure states transported in parallel and separate for
//! mixed families, where the two rest on different transport conditions.

use holonomy_lab::compare::discrepancy_report;
use holonomy_lab::evolution::EvolutionSpec;
use holonomy_lab::linalg::DEFAULT_TOL;
use holonomy_lab::random::{self, rng_for};
use holonomy_lab::scenarios::{full_rank_bell_family, static_spec};
use holonomy_lab::verify::pure_family;

fn fmt(p: Option<f64>) -> String {
    p.map_or("undefined".into(), |v| format!("{v:+.6}"))
}

fn main() -> holonomy_lab::Result<()> {
    let mut rng = rng_for(3, "comparison-example");
    let basis = random::unitary(&mut rng, 3);
    // Zero diagonal in the family's basis: every member moves in parallel.
    let h = random::off_diagonal_hermitian(&mut rng, &basis);
    let spec = EvolutionSpec::static_hamiltonian(h, 1.0, DEFAULT_TOL)?;
    let family = pure_family(&basis, 3)?;
    println!("pure family (rank 1):");
    for l in 1..=3 {
        let r = discrepancy_report(&spec, &family, l, 2000, DEFAULT_TOL)?;
        println!(
            "  l = {l}: γ = {}  ν = {}  |γ − ν| = {:.1e}  weak residual {:.1e}",
            fmt(r.interferometric.phase()),
            fmt(r.holonomy.phase),
            r.difference.unwrap_or(f64::NAN),
            r.weak_transport_residual
        );
    }

    println!("full-rank Bell family under the static flip:");
    for eps in [0.25, 0.5, 0.75] {
        let r = discrepancy_report(&static_spec(), &full_rank_bell_family(eps)?, 2, 2000, DEFAULT_TOL)?;
        println!(
            "  ε = {eps}: rank {}  γ = {}  ν = {}  |γ − ν| = {}",
            r.rank,
            fmt(r.interferometric.phase()),
            fmt(r.holonomy.phase),
            fmt(r.difference)
        );
    }
    Ok(())
}
