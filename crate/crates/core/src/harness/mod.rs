//! Scenario runner, termination fuzzer and replay verifier.

pub mod fuzz;
pub mod replay;
pub mod scenario;

pub use fuzz::{FuzzParams, FuzzReport, Population, fuzz_termination};
pub use replay::{ReplayError, ReplayResult, replay, replay_file};
pub use scenario::{
    ExpectationMismatch, Expectations, Scenario, ScenarioError, ScenarioRun, run_scenario,
    run_scenario_doc,
};
