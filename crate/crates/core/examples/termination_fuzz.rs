//! Fuzzes random councils, including adversarial and spawn-happy delegates,
//! and checks every run against its round bound.
//!
//!     cargo run --release -p dci-core --example termination_fuzz -- 7 1000

use dci_core::harness::{FuzzParams, Population, fuzz_termination};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let runs = args.next().and_then(|s| s.parse().ok()).unwrap_or(500);

    for population in [Population::Mixed, Population::CooperativeOnly, Population::AdversarialOnly] {
        let params = FuzzParams { population, ..FuzzParams::default() };
        let r = fuzz_termination(seed, runs, &params);
        println!(
            "{population:?}: {}/{} terminated, {} bound violations, {} incomplete, max rounds {}, fallback rate {:.3}",
            r.terminations, r.runs, r.bound_violations, r.completeness_failures, r.max_rounds_observed, r.fallback_rate
        );
        for f in &r.failures {
            println!("  {f}");
        }
    }
}
