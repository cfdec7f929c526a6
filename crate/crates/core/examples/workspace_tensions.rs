//! Applies a short exchange to a shared workspace and prints how each act
//! changes it.

use dci_core::grammar::{ActType, Move, MoveForce, Target, default_mode};
use dci_core::session::Phase;
use dci_core::{MoveId, SessionId, Workspace};

fn mv(id: &str, actor: &str, act: ActType, target: Target, content: &str) -> Move {
    Move {
        move_id: MoveId::new(id),
        session_id: SessionId::new("S"),
        round: 1,
        phase: Phase::MutualEngagement,
        actor: actor.into(),
        mode: default_mode(act),
        act,
        intent: String::new(),
        target,
        content: content.into(),
        confidence: 0.7,
        move_force: MoveForce::Soft,
        meta_level: false,
        extra: Default::default(),
    }
}

fn main() {
    let moves = [
        mv("m1", "Explorer", ActType::Propose, Target::Problem, "Use an append-only ledger."),
        mv("m2", "Framer", ActType::Extend, Target::contribution("m1"), "Snapshots keep reads cheap."),
        mv("m3", "Challenger", ActType::Challenge, Target::contribution("m1"), "Compaction stalls writers."),
        mv("m4", "Integrator", ActType::Ground, Target::contribution("m1"), "Load test: 3 ms p99 during compaction."),
        mv("m5", "Integrator", ActType::Synthesize, Target::Workspace, "Ledger with off-peak compaction."),
        mv("m6", "Framer", ActType::Recommend, Target::Workspace, "Prototype compaction first."),
    ];

    let mut ws = Workspace::new("Where should the audit trail live?");
    for m in &moves {
        let next = ws.apply_move(m);
        let changed: Vec<&str> = ws.diff_sections(&next).into_iter().map(|s| s.as_str()).collect();
        println!("{:<10} {:<11} -> {}", m.actor, m.act.as_str(), changed.join(", "));
        ws = next;
    }
    for t in ws.tensions() {
        println!("tension {} {:?}: {:?}", t.tension_id, t.status, t.conflicting_positions);
    }
    println!("{}", serde_json::to_string_pretty(&ws.export()).unwrap());
}
