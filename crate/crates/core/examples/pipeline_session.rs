//! Runs the scripted event-pipeline council and prints its decision packet.
//!
//!     cargo run -p dci-core --example pipeline_session

use std::path::Path;

use dci_core::harness::run_scenario;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/pipeline.json");
    let run = run_scenario(&path).expect("scenario runs");

    for r in &run.outcome.ranking {
        println!("option {} scored {:.3}", r.option_id, r.normalized);
    }
    let p = &run.packet;
    println!("decision: {} ({:?}, round {})", p.decision.label, p.verdict, p.rounds);
    for m in &p.minority_report {
        println!("minority: {} prefers {}", m.delegate, m.preferred_label);
    }
    for c in &p.reopen_conditions {
        println!("reopen if: {c}");
    }
    println!("{}", serde_json::to_string_pretty(p).unwrap());
}
