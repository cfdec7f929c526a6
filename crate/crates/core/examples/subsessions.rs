//! A council spawns a child session on a sub-question, recalls its result
//! and converges in the next round.

use std::path::Path;

use dci_core::SessionOutcome;
use dci_core::harness::run_scenario;

fn show(o: &SessionOutcome, indent: usize) {
    println!(
        "{:indent$}{}: {} after {} round(s), {:?}",
        "",
        o.packet.session_id,
        o.packet.decision.label,
        o.rounds_used,
        o.packet.verdict,
    );
    for c in &o.children {
        show(c, indent + 2);
    }
}

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/subsession.json");
    let run = run_scenario(&path).expect("scenario runs");
    show(&run.outcome, 0);
    println!("tree rounds: {}, depth: {}", run.outcome.total_rounds(), run.outcome.depth());
    for t in run.outcome.workspace.tensions() {
        println!("tension {} from {:?}: {:?}", t.tension_id, t.origin_session, t.status);
    }
}
