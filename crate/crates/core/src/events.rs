//! Append-only event log, one JSON document per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::convergence::{
    AdmissionRefusal, ConvergenceVerdict, FallbackMethod, RankEntry,
};
use crate::delegate::{DelegateError, PositionShift, Proposal, RoundOutput, ScoreSheet};
use crate::grammar::Rejection;
use crate::ids::{DelegateId, MoveId, OptionId, SessionId};
use crate::packet::DecisionPacket;
use crate::session::{Phase, Refusal, SessionEnvelope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CallKind {
    Proposal,
    Contribute,
    Score,
    IntegratorPick,
}

/// A delegate's raw answer, recorded so a run can be replayed without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ResponseOutcome {
    Proposal { proposal: Proposal },
    Round { output: RoundOutput },
    Sheet { sheet: ScoreSheet },
    Pick { option: OptionId },
    Error { error: DelegateError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    SessionStarted {
        envelope: SessionEnvelope,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parent: Option<SessionId>,
    },
    EnvelopeNormalized {
        original_weight_sum: f64,
    },
    PhaseEntered {
        phase: Phase,
    },
    StageEntered {
        stage: u8,
        name: String,
    },
    DelegateResponse {
        delegate: DelegateId,
        call: CallKind,
        attempt: u32,
        outcome: ResponseOutcome,
    },
    MoveAccepted {
        delegate: String,
        document: Value,
    },
    MoveRejected {
        delegate: DelegateId,
        attempt: u32,
        rejection: Rejection,
    },
    TurnSkipped {
        delegate: DelegateId,
        call: CallKind,
        reason: String,
    },
    OptionCreated {
        option_id: OptionId,
        label: String,
        members: usize,
    },
    OptionDropped {
        label: String,
        members: usize,
    },
    HypothesisAdmitted {
        option_id: OptionId,
        label: String,
        author: DelegateId,
    },
    AdmissionRefused {
        label: String,
        author: DelegateId,
        reason: AdmissionRefusal,
    },
    OptionRemoved {
        option_id: OptionId,
        dominated_by: OptionId,
    },
    OptionMerged {
        kept: OptionId,
        absorbed: OptionId,
    },
    FinalistsSelected {
        finalists: Vec<OptionId>,
    },
    ScoreSheetExcluded {
        delegate: DelegateId,
        reason: String,
    },
    ScoresAggregated {
        ranking: Vec<RankEntry>,
    },
    Verdict {
        verdict: ConvergenceVerdict,
    },
    FallbackLevel {
        method: FallbackMethod,
        survivors: Vec<OptionId>,
    },
    SpawnRefused {
        move_id: MoveId,
        reason: Refusal,
    },
    SubsessionSpawned {
        move_id: MoveId,
        child: SessionId,
        max_rounds: u32,
    },
    SubsessionRecalled {
        move_id: MoveId,
        child: SessionId,
        decision: String,
    },
    PositionShifted {
        delegate: DelegateId,
        shift: PositionShift,
    },
    ObjectionWithdrawn {
        option_id: OptionId,
        objection: MoveId,
    },
    WorkspaceSnapshot {
        phase: Phase,
        workspace: Value,
    },
    CeilingReached {
        used: u32,
    },
    PacketEmitted {
        packet: DecisionPacket,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub session_id: SessionId,
    pub round: u32,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log corruption at line {line}: {reason}")]
    Corruption { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// In-memory log shared by a session tree. Sequence numbers start at 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, session_id: &SessionId, round: u32, kind: EventKind) {
        let seq = self.events.len() as u64 + 1;
        self.events.push(Event {
            seq,
            session_id: session_id.clone(),
            round,
            kind,
        });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Parses a log, rejecting unparsable lines and sequence gaps.
    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, LogError> {
        let mut events = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e: Event = serde_json::from_str(&line).map_err(|err| LogError::Corruption {
                line: i + 1,
                reason: err.to_string(),
            })?;
            let expected = events.len() as u64 + 1;
            if e.seq != expected {
                return Err(LogError::Corruption {
                    line: i + 1,
                    reason: format!("expected sequence {expected}, found {}", e.seq),
                });
            }
            events.push(e);
        }
        Ok(Self { events })
    }

    pub fn from_jsonl(s: &str) -> Result<Self, LogError> {
        Self::read_jsonl(s.as_bytes())
    }

    /// The packet emitted by the root session, if the run completed.
    pub fn root_packet(&self) -> Option<&DecisionPacket> {
        let root = &self.events.first()?.session_id;
        self.events.iter().rev().find_map(|e| match &e.kind {
            EventKind::PacketEmitted { packet } if &e.session_id == root => Some(packet),
            _ => None,
        })
    }
}
