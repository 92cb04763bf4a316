//! Runs the seeded property suite, optionally restricted to one group:
//!
//! ```text
//! cargo run --release --example property_suite -- 1 gauge-invariance
//! ```

use holonomy_lab::verify::{self, DEFAULT_SEED, GROUPS};

fn main() -> holonomy_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let only = args.next();
    if only.is_none() {
        println!("groups: {}", GROUPS.join(", "));
    }
    let outcomes = verify::run(seed, only.as_deref())?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} passed", outcomes.len() - failed, outcomes.len());
    Ok(())
}
