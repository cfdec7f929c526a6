//! Replays an event log by feeding the recorded delegate responses back
//! through the engine and comparing the result with the log.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use thiserror::Error;

use crate::convergence::{SessionOutcome, run_session_logged};
use crate::delegate::{
    Delegate, DelegateBox, DelegateError, PickRequest, Proposal, ProposalRequest, RoundOutput,
    RoundRequest, ScoreRequest, ScoreSheet,
};
use crate::events::{CallKind, Event, EventKind, EventLog, LogError, ResponseOutcome};
use crate::ids::{DelegateId, OptionId};
use crate::packet::DecisionPacket;
use crate::session::SessionEnvelope;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("log has no root session_started event")]
    NoRoot,
    #[error("log has no packet for the root session")]
    NoPacket,
    #[error("replay diverged at event {seq}")]
    Diverged { seq: u64 },
    #[error("replay failed: {0}")]
    Engine(String),
}

#[derive(Debug, Clone)]
pub struct ReplayResult {
    pub packet: DecisionPacket,
    pub outcome: SessionOutcome,
    pub log: EventLog,
}

type Queue = VecDeque<(CallKind, ResponseOutcome)>;

/// Answers each call with the next recorded response for its delegate.
struct ReplayDelegate {
    queue: Queue,
}

impl ReplayDelegate {
    fn next(&mut self, call: CallKind) -> Result<ResponseOutcome, DelegateError> {
        match self.queue.pop_front() {
            Some((c, outcome)) if c == call => match outcome {
                ResponseOutcome::Error { error } => Err(error),
                other => Ok(other),
            },
            Some(_) => Err(DelegateError::ProviderFailure("recorded call kind differs".into())),
            None => Err(DelegateError::ScenarioExhausted),
        }
    }
}

fn mismatch() -> DelegateError {
    DelegateError::ProviderFailure("recorded response has the wrong shape".into())
}

impl Delegate for ReplayDelegate {
    fn generate_proposal(&mut self, _: &ProposalRequest) -> Result<Proposal, DelegateError> {
        match self.next(CallKind::Proposal)? {
            ResponseOutcome::Proposal { proposal } => Ok(proposal),
            _ => Err(mismatch()),
        }
    }

    fn contribute(&mut self, _: &RoundRequest) -> Result<RoundOutput, DelegateError> {
        match self.next(CallKind::Contribute)? {
            ResponseOutcome::Round { output } => Ok(output),
            _ => Err(mismatch()),
        }
    }

    fn score(&mut self, _: &ScoreRequest) -> Result<ScoreSheet, DelegateError> {
        match self.next(CallKind::Score)? {
            ResponseOutcome::Sheet { sheet } => Ok(sheet),
            _ => Err(mismatch()),
        }
    }

    fn integrator_pick(&mut self, _: &PickRequest) -> Result<OptionId, DelegateError> {
        match self.next(CallKind::IntegratorPick)? {
            ResponseOutcome::Pick { option } => Ok(option),
            _ => Err(mismatch()),
        }
    }
}

fn root_envelope(events: &[Event]) -> Option<SessionEnvelope> {
    match &events.first()?.kind {
        EventKind::SessionStarted { envelope, parent: None } => Some(envelope.clone()),
        _ => None,
    }
}

/// Re-runs the logged session and checks that every event and the packet
/// come out identical.
pub fn replay(log: &EventLog) -> Result<ReplayResult, ReplayError> {
    let envelope = root_envelope(log.events()).ok_or(ReplayError::NoRoot)?;
    let logged_packet = log.root_packet().ok_or(ReplayError::NoPacket)?.clone();

    let mut queues: BTreeMap<DelegateId, Queue> = BTreeMap::new();
    for e in log.events() {
        if let EventKind::DelegateResponse { delegate, call, outcome, .. } = &e.kind {
            queues
                .entry(delegate.clone())
                .or_default()
                .push_back((*call, outcome.clone()));
        }
    }
    let mut delegates: Vec<DelegateBox> = envelope
        .council
        .iter()
        .map(|m| {
            Box::new(ReplayDelegate {
                queue: queues.remove(&m.id).unwrap_or_default(),
            }) as DelegateBox
        })
        .collect();

    let mut replayed = EventLog::new();
    let outcome = run_session_logged(envelope, &mut delegates, &mut replayed)
        .map_err(|e| ReplayError::Engine(e.to_string()))?;

    let (a, b) = (log.events(), replayed.events());
    if let Some(i) = (0..a.len().min(b.len())).find(|i| a[*i] != b[*i]) {
        return Err(ReplayError::Diverged { seq: a[i].seq });
    }
    if a.len() != b.len() {
        let seq = a.len().min(b.len()) as u64 + 1;
        return Err(ReplayError::Diverged { seq });
    }
    if outcome.packet != logged_packet {
        return Err(ReplayError::Diverged { seq: a.len() as u64 });
    }
    Ok(ReplayResult {
        packet: outcome.packet.clone(),
        outcome,
        log: replayed,
    })
}

pub fn replay_file(path: &Path) -> Result<ReplayResult, ReplayError> {
    let f = std::fs::File::open(path).map_err(LogError::Io)?;
    let log = EventLog::read_jsonl(std::io::BufReader::new(f))?;
    replay(&log)
}
