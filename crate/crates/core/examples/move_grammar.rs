//! Parses a move document, validates it against a session, and shows the
//! field-level reasons given for malformed ones.

use std::collections::BTreeSet;

use dci_core::grammar::{MoveContext, parse_move, validate_move};
use dci_core::session::Phase;
use dci_core::{MoveId, SessionId};
use serde_json::json;

fn main() {
    let doc = json!({
        "move_id": "mv-7",
        "session_id": "S-1",
        "round": 2,
        "phase": "mutual_engagement",
        "actor": "Challenger",
        "mode": "critical",
        "act": "challenge",
        "intent": "test the throughput claim",
        "target": "contribution:mv-3",
        "content": "The benchmark ran on a single partition.",
        "confidence": 0.7,
        "move_force": "soft",
        "meta_level": false,
        "x_source": "benchmarks/kafka.md"
    });
    let sid = SessionId::new("S-1");
    let known: BTreeSet<MoveId> = [MoveId::new("mv-3")].into();
    let none = BTreeSet::new();
    let ctx = MoveContext {
        session_id: &sid,
        round: 2,
        phase: Phase::MutualEngagement,
        known_moves: &known,
        recallable: &none,
        depth: 0,
        max_depth: 2,
    };

    let m = parse_move(&doc).unwrap();
    validate_move(&m, &ctx).unwrap();
    println!("accepted {} ({:?} family), extra keys kept: {:?}", m.act.as_str(), m.family(), m.extra.keys().collect::<Vec<_>>());

    let broken = [
        ("act", json!("argue")),
        ("mode", json!("sarcastic")),
        ("confidence", json!(1.4)),
        ("target", json!("contribution:mv-99")),
        ("phase", json!("closure")),
    ];
    for (field, value) in broken {
        let mut bad = doc.clone();
        bad[field] = value;
        let verdict = parse_move(&bad)
            .map_err(Into::into)
            .and_then(|m| validate_move(&m, &ctx));
        match verdict {
            Ok(()) => println!("{field}: unexpectedly accepted"),
            Err(r) => println!("{field}: rejected on '{}': {}", r.field, r.message),
        }
    }
}
