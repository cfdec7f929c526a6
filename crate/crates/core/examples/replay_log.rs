//! Writes a session's event log to disk, replays it, then shows that a
//! tampered log is caught.

use std::path::Path;

use dci_core::EventLog;
use dci_core::harness::{replay, replay_file, run_scenario};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/holdout.json");
    let run = run_scenario(&path).expect("scenario runs");
    let log_path = std::env::temp_dir().join("dci-holdout.jsonl");
    run.write_log(&log_path).unwrap();
    println!("wrote {} events to {}", run.log.len(), log_path.display());

    let replayed = replay_file(&log_path).unwrap();
    println!("replay: {} (identical packet: {})", replayed.packet.decision.label, replayed.packet == run.packet);

    let text = std::fs::read_to_string(&log_path).unwrap();
    let tampered: String = text
        .lines()
        .enumerate()
        .filter(|(i, _)| *i != 4)
        .map(|(_, l)| format!("{l}\n"))
        .collect();
    match EventLog::from_jsonl(&tampered).map_err(|e| e.to_string()).and_then(|l| replay(&l).map_err(|e| e.to_string())) {
        Ok(_) => println!("tampered log replayed (unexpected)"),
        Err(e) => println!("tampered log rejected: {e}"),
    }
}
