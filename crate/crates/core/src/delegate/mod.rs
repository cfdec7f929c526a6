//! Delegates: archetypes, evolving epistemic state, the artifacts delegates
//! hand to the engine, and the behavior contract every provider implements.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convergence::OptionRecord;
use crate::grammar::ActType;
use crate::ids::{DelegateId, MoveId, OptionId, SessionId};
use crate::session::{CouncilMember, Criterion, Phase};
use crate::workspace::Workspace;

pub mod remote;
pub mod scripted;
pub mod simulated;

pub use remote::{CompletionRequest, CompletionTransport, RemoteDelegate};
pub use scripted::{DelegateScript, ScriptedDelegate};
pub use simulated::{Policy, SimulatedDelegate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArchetypeKind {
    Framer,
    Explorer,
    Challenger,
    Integrator,
}

impl ArchetypeKind {
    pub const ALL: [ArchetypeKind; 4] = [
        ArchetypeKind::Framer,
        ArchetypeKind::Explorer,
        ArchetypeKind::Challenger,
        ArchetypeKind::Integrator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArchetypeKind::Framer => "Framer",
            ArchetypeKind::Explorer => "Explorer",
            ArchetypeKind::Challenger => "Challenger",
            ArchetypeKind::Integrator => "Integrator",
        }
    }
}

/// Preferred-act distribution for an archetype. Fixed mass on the signature
/// acts, the remainder spread uniformly, so every act stays possible.
pub fn default_archetype_bias(kind: ArchetypeKind) -> BTreeMap<ActType, f64> {
    use ActType::*;
    let signature: &[(ActType, f64)] = match kind {
        ArchetypeKind::Framer => &[(Frame, 0.25), (Clarify, 0.20), (Reframe, 0.15)],
        ArchetypeKind::Explorer => &[(Propose, 0.30), (Extend, 0.20), (Spawn, 0.10)],
        ArchetypeKind::Challenger => &[(Challenge, 0.35), (Ask, 0.20)],
        ArchetypeKind::Integrator => &[(Bridge, 0.20), (Synthesize, 0.25), (Recall, 0.10)],
    };
    let fixed: f64 = signature.iter().map(|(_, w)| w).sum();
    let rest = (1.0 - fixed) / (ActType::ALL.len() - signature.len()) as f64;
    ActType::ALL
        .into_iter()
        .map(|a| {
            let w = signature
                .iter()
                .find(|(s, _)| *s == a)
                .map_or(rest, |(_, w)| *w);
            (a, w)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archetype {
    pub kind: ArchetypeKind,
    act_bias: BTreeMap<ActType, f64>,
}

impl Archetype {
    pub fn standard(kind: ArchetypeKind) -> Self {
        Self {
            kind,
            act_bias: default_archetype_bias(kind),
        }
    }

    /// Custom bias. Every act needs positive weight and the weights must sum to 1.
    pub fn with_bias(kind: ArchetypeKind, act_bias: BTreeMap<ActType, f64>) -> Result<Self, String> {
        if ActType::ALL
            .iter()
            .any(|a| !act_bias.get(a).is_some_and(|w| *w > 0.0 && w.is_finite()))
        {
            return Err("every act needs a positive weight".into());
        }
        let sum: f64 = act_bias.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("weights sum to {sum}, expected 1"));
        }
        Ok(Self { kind, act_bias })
    }

    pub fn act_bias(&self) -> &BTreeMap<ActType, f64> {
        &self.act_bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionShift {
    pub round: u32,
    pub prior_view: String,
    pub new_view: String,
    pub prior_confidence: f64,
    pub new_confidence: f64,
    pub trigger_move_id: MoveId,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("confidence {0} outside [0, 1]")]
pub struct OutOfRangeConfidence(pub f64);

/// A delegate's local epistemic state: view, confidence, open questions,
/// active concerns and the append-only history of position shifts.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DelegateState {
    view: String,
    confidence: f64,
    open_questions: BTreeSet<String>,
    concerns: BTreeSet<String>,
    shift_history: Vec<PositionShift>,
}

impl DelegateState {
    pub fn new(view: impl Into<String>, confidence: f64) -> Result<Self, OutOfRangeConfidence> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(OutOfRangeConfidence(confidence));
        }
        Ok(Self {
            view: view.into(),
            confidence,
            ..Self::default()
        })
    }

    pub fn view(&self) -> &str {
        &self.view
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn open_questions(&self) -> &BTreeSet<String> {
        &self.open_questions
    }

    pub fn concerns(&self) -> &BTreeSet<String> {
        &self.concerns
    }

    pub fn shift_history(&self) -> &[PositionShift] {
        &self.shift_history
    }

    pub fn with_question(mut self, q: impl Into<String>) -> Self {
        self.open_questions.insert(q.into());
        self
    }

    pub fn with_concern(mut self, c: impl Into<String>) -> Self {
        self.concerns.insert(c.into());
        self
    }
}

/// Replaces view and confidence and appends a shift record. Always appends,
/// even when nothing changed, so re-affirmations stay visible.
pub fn record_position_shift(
    state: &DelegateState,
    new_view: &str,
    new_confidence: f64,
    trigger: MoveId,
    round: u32,
) -> Result<DelegateState, OutOfRangeConfidence> {
    if !(0.0..=1.0).contains(&new_confidence) {
        return Err(OutOfRangeConfidence(new_confidence));
    }
    let mut next = state.clone();
    next.shift_history.push(PositionShift {
        round,
        prior_view: state.view.clone(),
        new_view: new_view.to_owned(),
        prior_confidence: state.confidence,
        new_confidence,
        trigger_move_id: trigger,
    });
    next.view = new_view.to_owned();
    next.confidence = new_confidence;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub label: String,
    pub description: String,
}

/// A delegate's private stage-1 submission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    #[serde(default)]
    pub author: DelegateId,
    #[serde(default)]
    pub framing: String,
    pub hypotheses: Vec<Hypothesis>,
    #[serde(default)]
    pub concerns: Vec<String>,
    pub confidence: f64,
    #[serde(default)]
    pub suggested_criteria: Vec<String>,
}

impl Proposal {
    pub fn validate(&self) -> Result<(), String> {
        if self.hypotheses.is_empty() {
            return Err("a proposal needs at least one hypothesis".into());
        }
        if self.hypotheses.iter().any(|h| h.label.trim().is_empty()) {
            return Err("every hypothesis needs a non-empty label".into());
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContributionKind {
    Support,
    Challenge,
    Evidence,
    Counterexample,
    RevisionSuggestion,
    UncertaintyNote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewHypothesis {
    pub label: String,
    pub description: String,
    #[serde(default)]
    pub evidence_link: String,
}

/// One stage-3 contribution about a single option. When it proposes a new
/// hypothesis, `option_id` names the existing option it claims to beat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChallengeContribution {
    #[serde(default)]
    pub author: DelegateId,
    pub option_id: OptionId,
    pub kind: ContributionKind,
    pub content: String,
    #[serde(default)]
    pub fatal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked_evidence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposed_new_hypothesis: Option<NewHypothesis>,
    /// Optional id for the move this contribution becomes; assigned when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_id: Option<MoveId>,
}

impl ChallengeContribution {
    pub fn validate(&self) -> Result<(), String> {
        if self.content.trim().is_empty() {
            return Err("contribution content is empty".into());
        }
        if self.fatal && self.kind != ContributionKind::Challenge {
            return Err("only a challenge can be fatal".into());
        }
        if let Some(h) = &self.proposed_new_hypothesis {
            if h.label.trim().is_empty() {
                return Err("proposed hypothesis needs a label".into());
            }
            if h.evidence_link.trim().is_empty() {
                return Err("proposed hypothesis needs an evidence link".into());
            }
        }
        Ok(())
    }
}

/// One delegate's stage-5 evaluation of the finalists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSheet {
    #[serde(default)]
    pub delegate: DelegateId,
    /// Raw scores in [0, 10], keyed by option then criterion id.
    pub scores: BTreeMap<OptionId, BTreeMap<String, f64>>,
    pub confidence: f64,
    pub evidence_strength: f64,
    #[serde(default)]
    pub rationale: BTreeMap<OptionId, String>,
    pub top_choice: OptionId,
}

impl ScoreSheet {
    /// The delegate's own argmax of criterion-weighted raw scores; ties go to
    /// the lowest option id. `None` when no option is fully scored.
    pub fn derive_top_choice(
        scores: &BTreeMap<OptionId, BTreeMap<String, f64>>,
        criteria: &[Criterion],
    ) -> Option<OptionId> {
        let mut best: Option<(OptionId, f64)> = None;
        for (o, row) in scores {
            let Some(agg) = criteria
                .iter()
                .map(|c| row.get(&c.id).map(|s| c.weight * s))
                .sum::<Option<f64>>()
            else {
                continue;
            };
            if best.is_none_or(|(_, b)| agg > b) {
                best = Some((*o, agg));
            }
        }
        best.map(|(o, _)| o)
    }

    /// Completeness and range checks against the finalists being scored.
    pub fn validate(&self, finalists: &[OptionId], criteria: &[Criterion]) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        if !(0.0..=1.0).contains(&self.evidence_strength) {
            return Err(format!(
                "evidence_strength {} outside [0, 1]",
                self.evidence_strength
            ));
        }
        for o in finalists {
            let row = self
                .scores
                .get(o)
                .ok_or_else(|| format!("no scores for finalist {o}"))?;
            for c in criteria {
                let s = row
                    .get(&c.id)
                    .ok_or_else(|| format!("no score for ({o}, {})", c.id))?;
                if !(0.0..=10.0).contains(s) {
                    return Err(format!("score {s} for ({o}, {}) outside [0, 10]", c.id));
                }
            }
        }
        if let Some(extra) = self.scores.keys().find(|o| !finalists.contains(o)) {
            return Err(format!("{extra} is not a finalist"));
        }
        let own = Self::derive_top_choice(&self.scores, criteria);
        if own != Some(self.top_choice) {
            return Err(format!(
                "top_choice {} is not the sheet's own best option",
                self.top_choice
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum DelegateError {
    #[error("provider failure: {0}")]
    ProviderFailure(String),
    /// The scripted delegate has nothing more to say; treated as no contribution.
    #[error("scenario exhausted")]
    ScenarioExhausted,
}

/// Session facts every request carries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionInfo {
    pub session_id: SessionId,
    pub depth: u32,
    pub problem: String,
    pub council: Vec<CouncilMember>,
    /// This delegate's seat in the council.
    pub seat: usize,
}

impl SessionInfo {
    pub fn me(&self) -> &CouncilMember {
        &self.council[self.seat]
    }
}

/// Retry bookkeeping. `feedback` carries the last rejection on a re-prompt.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Turn {
    pub attempt: u32,
    pub feedback: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalRequest {
    pub session: SessionInfo,
    pub turn: Turn,
}

/// An option as delegates see it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionView {
    pub option_id: OptionId,
    pub label: String,
    pub description: String,
    /// The move that first put this option forward.
    pub anchor: MoveId,
    pub aliases: Vec<String>,
    pub record: OptionRecord,
}

impl OptionView {
    /// Whether `label` names this option (canonical form or a merged alias).
    pub fn answers_to(&self, label: &str) -> bool {
        let key = crate::convergence::canonical_key(label);
        self.label == key || self.aliases.contains(&key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRequest {
    pub session: SessionInfo,
    pub round: u32,
    pub phase: Phase,
    pub options: Vec<OptionView>,
    pub workspace: Workspace,
    pub own_state: DelegateState,
    pub known_moves: Vec<MoveId>,
    pub recallable: Vec<MoveId>,
    pub turn: Turn,
}

impl RoundRequest {
    pub fn option_by_label(&self, label: &str) -> Option<&OptionView> {
        self.options.iter().find(|o| o.answers_to(label))
    }
}

/// A delegate's stage-3 output: per-option contributions plus free-standing
/// moves as raw wire documents (the engine parses and validates them).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoundOutput {
    #[serde(default)]
    pub contributions: Vec<ChallengeContribution>,
    #[serde(default)]
    pub moves: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub session: SessionInfo,
    pub round: u32,
    pub finalists: Vec<OptionView>,
    pub criteria: Vec<Criterion>,
    pub turn: Turn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickRequest {
    pub session: SessionInfo,
    pub top_two: Vec<OptionView>,
    pub turn: Turn,
}

/// Behavior contract for council members. Implementations must not touch
/// engine state; everything flows through return values.
pub trait Delegate {
    fn generate_proposal(&mut self, req: &ProposalRequest) -> Result<Proposal, DelegateError>;

    fn contribute(&mut self, req: &RoundRequest) -> Result<RoundOutput, DelegateError>;

    fn score(&mut self, req: &ScoreRequest) -> Result<ScoreSheet, DelegateError>;

    fn integrator_pick(&mut self, req: &PickRequest) -> Result<OptionId, DelegateError>;
}

pub type DelegateBox = Box<dyn Delegate>;
