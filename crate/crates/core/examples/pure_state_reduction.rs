//! For pure states carried in parallel, `ν^(l)(1)` reduces to the phase of
//! the Bargmann product `<ψ1|U|ψ2><ψ2|U|ψ3>⋯<ψl|U|ψ1>`.

use holonomy_lab::random::rng_for;
use holonomy_lab::verify::pure_state_reduction;

fn main() -> holonomy_lab::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    for n in [500, 2000, 8000] {
        let stats = pure_state_reduction(&mut rng_for(seed, "pure-example"), 10, n)?;
        println!(
            "n = {n:5}: worst phase error {:.2e} over {} comparisons ({} skipped)",
            stats.worst_phase_error, stats.cases, stats.skipped
        );
    }
    Ok(())
}
