//! Session envelope, phase progression, round budgets and bounded recursion.
//!
//! Phases map onto the convergent-flow stages as follows: arrival is stage 0,
//! independent first thought is stage 1, mutual engagement covers stages 2–3,
//! collective shaping covers stages 4–6 and closure covers stages 7–8. The
//! engagement/shaping pair repeats once per deliberation round.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delegate::{ArchetypeKind, scripted::DelegateScript};
use crate::ids::{DelegateId, MoveId, SessionId};
use crate::packet::DecisionPacket;
use crate::workspace::{Tension, Workspace};

/// The five session phases, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Arrival,
    IndependentFirstThought,
    MutualEngagement,
    CollectiveShaping,
    Closure,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Arrival => "arrival",
            Phase::IndependentFirstThought => "independent_first_thought",
            Phase::MutualEngagement => "mutual_engagement",
            Phase::CollectiveShaping => "collective_shaping",
            Phase::Closure => "closure",
        }
    }

    fn next(self) -> Option<Phase> {
        match self {
            Phase::Arrival => Some(Phase::IndependentFirstThought),
            Phase::IndependentFirstThought => Some(Phase::MutualEngagement),
            Phase::MutualEngagement => Some(Phase::CollectiveShaping),
            Phase::CollectiveShaping => Some(Phase::Closure),
            Phase::Closure => None,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Phase::Arrival,
            Phase::IndependentFirstThought,
            Phase::MutualEngagement,
            Phase::CollectiveShaping,
            Phase::Closure,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
        .ok_or(())
    }
}

/// True when `phases` reads `arrival first_thought (engagement shaping)+ closure`.
pub fn is_legal_phase_sequence(phases: &[Phase]) -> bool {
    use Phase::*;
    let [Arrival, IndependentFirstThought, middle @ .., Closure] = phases else {
        return false;
    };
    !middle.is_empty()
        && middle.len() % 2 == 0
        && middle
            .chunks(2)
            .all(|pair| pair == [MutualEngagement, CollectiveShaping])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouncilMember {
    pub id: DelegateId,
    pub archetype: ArchetypeKind,
}

/// Where the forced-decision cascade starts. Every rule falls through the
/// remaining levels down to the Integrator pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackRule {
    #[default]
    #[serde(alias = "outranking_then_minimax", alias = "cascade")]
    Outranking,
    MinimaxRegret,
    RobustSatisficing,
    Integrator,
}

/// Domain-fit factors for the scoring formula. Default is 1 everywhere.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainFit {
    #[default]
    Uniform,
    /// One factor per delegate, in council order.
    PerDelegate(Vec<f64>),
    /// One factor per (delegate, criterion), council order then criteria order.
    PerDelegateCriterion(Vec<Vec<f64>>),
}

impl DomainFit {
    pub fn factor(&self, delegate: usize, criterion: usize) -> f64 {
        match self {
            DomainFit::Uniform => 1.0,
            DomainFit::PerDelegate(v) => v.get(delegate).copied().unwrap_or(1.0),
            DomainFit::PerDelegateCriterion(m) => m
                .get(delegate)
                .and_then(|row| row.get(criterion))
                .copied()
                .unwrap_or(1.0),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            DomainFit::Uniform => Vec::new(),
            DomainFit::PerDelegate(v) => v.clone(),
            DomainFit::PerDelegateCriterion(m) => m.iter().flatten().copied().collect(),
        }
    }
}

/// Everything a session is bounded by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEnvelope {
    pub session_id: SessionId,
    pub problem: String,
    pub council: Vec<CouncilMember>,
    pub criteria: Vec<Criterion>,
    pub max_rounds: u32,
    pub max_options: usize,
    pub finalist_count: usize,
    pub convergence_margin: f64,
    pub majority_threshold: f64,
    pub fallback_rule: FallbackRule,
    pub depth: u32,
    pub max_depth: u32,
    pub tree_ceiling: u32,
    /// Per-session cap on spawned children.
    pub max_spawns_per_session: u32,
    #[serde(default)]
    pub domain_fit: DomainFit,
}

impl SessionEnvelope {
    /// Envelope with the standard defaults: 2 rounds, 5 options, 3 finalists,
    /// margin 0.15, depth limit 2, tree ceiling 50.
    pub fn with_defaults(
        session_id: impl Into<SessionId>,
        problem: impl Into<String>,
        council: Vec<CouncilMember>,
        criteria: Vec<Criterion>,
    ) -> Self {
        Self {
            session_id: session_id.into(),
            problem: problem.into(),
            council,
            criteria,
            max_rounds: 2,
            max_options: 5,
            finalist_count: 3,
            convergence_margin: 0.15,
            majority_threshold: 0.5,
            fallback_rule: FallbackRule::Outranking,
            depth: 0,
            max_depth: 2,
            tree_ceiling: 50,
            max_spawns_per_session: 2,
            domain_fit: DomainFit::Uniform,
        }
    }

    pub fn council_size(&self) -> usize {
        self.council.len()
    }

    /// Checks every invariant except weight normalization. Returns the
    /// normalized envelope and the original weight sum when it differed from 1.
    pub fn validated(&self) -> Result<(SessionEnvelope, Option<f64>), SessionError> {
        let invalid = |what: &str| Err(SessionError::InvalidEnvelope(what.to_owned()));
        if self.council.len() < 2 {
            return invalid("council must have at least 2 delegates");
        }
        let mut ids: Vec<_> = self.council.iter().map(|m| &m.id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != self.council.len() {
            return invalid("delegate ids must be unique");
        }
        if self.problem.trim().is_empty() {
            return invalid("problem statement must be non-empty");
        }
        if self.max_rounds < 1 {
            return invalid("max_rounds must be at least 1");
        }
        if self.finalist_count < 1 || self.finalist_count > self.max_options {
            return invalid("finalist_count must satisfy 1 <= finalist_count <= max_options");
        }
        if !(self.convergence_margin > 0.0 && self.convergence_margin.is_finite()) {
            return invalid("convergence_margin must be positive");
        }
        if !(0.0..1.0).contains(&self.majority_threshold) {
            return invalid("majority_threshold must lie in [0, 1)");
        }
        if self.depth > self.max_depth {
            return invalid("depth exceeds max_depth");
        }
        if self.tree_ceiling < 1 {
            return invalid("tree_ceiling must be at least 1");
        }
        if self.criteria.is_empty() {
            return invalid("at least one criterion is required");
        }
        let mut cids: Vec<_> = self.criteria.iter().map(|c| &c.id).collect();
        cids.sort();
        cids.dedup();
        if cids.len() != self.criteria.len() {
            return invalid("criterion ids must be unique");
        }
        if self
            .criteria
            .iter()
            .any(|c| !(c.weight >= 0.0 && c.weight.is_finite()))
        {
            return invalid("criterion weights must be finite and non-negative");
        }
        if self
            .domain_fit
            .values()
            .iter()
            .any(|f| !(*f >= 0.0 && f.is_finite()))
        {
            return invalid("domain-fit factors must be finite and non-negative");
        }
        let sum: f64 = self.criteria.iter().map(|c| c.weight).sum();
        if sum <= 0.0 {
            return invalid("criterion weights must not all be zero");
        }
        let mut out = self.clone();
        let normalized = if (sum - 1.0).abs() > 1e-12 {
            for c in &mut out.criteria {
                c.weight /= sum;
            }
            Some(sum)
        } else {
            None
        };
        Ok((out, normalized))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
    #[error("cannot leave {phase}: missing {artifact}")]
    MissingExitArtifact { phase: Phase, artifact: &'static str },
    #[error("illegal phase transition {from} -> {to}")]
    IllegalTransition { from: Phase, to: Phase },
    #[error("round budget of {0} exhausted")]
    RoundBudgetExhausted(u32),
    #[error("tree-wide round ceiling of {0} reached")]
    CeilingExhausted(u32),
}

/// Tree-wide round counter, shared by a session and all of its descendants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeLedger {
    used: u32,
    ceiling: u32,
}

impl TreeLedger {
    pub fn new(ceiling: u32) -> Self {
        Self { used: 0, ceiling }
    }

    pub fn used(&self) -> u32 {
        self.used
    }

    pub fn ceiling(&self) -> u32 {
        self.ceiling
    }

    pub fn remaining(&self) -> u32 {
        self.ceiling - self.used
    }

    fn consume(&mut self) -> Result<(), SessionError> {
        if self.used >= self.ceiling {
            return Err(SessionError::CeilingExhausted(self.ceiling));
        }
        self.used += 1;
        Ok(())
    }
}

/// Why a spawn was not honored. Refusals are logged, never fatal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(rename_all = "snake_case")]
pub enum Refusal {
    #[error("recursion depth limit reached")]
    DepthExhausted,
    #[error("tree-wide round ceiling reached")]
    CeilingExhausted,
    #[error("no round budget left to carve for a child")]
    BudgetExhausted,
    #[error("per-session spawn cap reached")]
    SpawnCapReached,
}

/// Live state of one session.
#[derive(Debug, Clone)]
pub struct SessionState {
    envelope: SessionEnvelope,
    phase: Phase,
    phase_history: Vec<Phase>,
    pub workspace: Workspace,
    rounds_used: u32,
    stage1_outcomes: usize,
    engagement_done: bool,
    round_scored: bool,
    spawned: u32,
    original_weight_sum: Option<f64>,
}

/// Validates the envelope and opens the session in the arrival phase with the
/// problem statement as the initial problem view.
pub fn init_session(envelope: SessionEnvelope) -> Result<SessionState, SessionError> {
    let (envelope, original_weight_sum) = envelope.validated()?;
    let workspace = Workspace::new(&envelope.problem);
    Ok(SessionState {
        envelope,
        phase: Phase::Arrival,
        phase_history: vec![Phase::Arrival],
        workspace,
        rounds_used: 0,
        stage1_outcomes: 0,
        engagement_done: false,
        round_scored: false,
        spawned: 0,
        original_weight_sum,
    })
}

impl SessionState {
    pub fn envelope(&self) -> &SessionEnvelope {
        &self.envelope
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn phase_history(&self) -> &[Phase] {
        &self.phase_history
    }

    pub fn rounds_used(&self) -> u32 {
        self.rounds_used
    }

    pub fn rounds_remaining(&self) -> u32 {
        self.envelope.max_rounds - self.rounds_used
    }

    pub fn original_weight_sum(&self) -> Option<f64> {
        self.original_weight_sum
    }

    /// Records that one delegate's stage-1 turn is settled (submitted or skipped).
    pub fn record_stage1_outcome(&mut self) {
        self.stage1_outcomes += 1;
    }

    pub fn mark_engagement_done(&mut self) {
        self.engagement_done = true;
    }

    pub fn mark_round_scored(&mut self) {
        self.round_scored = true;
    }

    /// Moves one phase forward after checking the current phase's exit artifact.
    pub fn advance_phase(&mut self) -> Result<Phase, SessionError> {
        let missing = |artifact| SessionError::MissingExitArtifact {
            phase: self.phase,
            artifact,
        };
        match self.phase {
            Phase::Arrival if self.workspace.problem_view().trim().is_empty() => {
                return Err(missing("shared problem statement"));
            }
            Phase::IndependentFirstThought
                if self.stage1_outcomes < self.envelope.council_size() =>
            {
                return Err(missing("one proposal turn per delegate"));
            }
            Phase::MutualEngagement if !self.engagement_done => {
                return Err(missing("round contributions"));
            }
            Phase::CollectiveShaping if !self.round_scored => {
                return Err(missing("round convergence test"));
            }
            _ => {}
        }
        let next = self.phase.next().ok_or(SessionError::IllegalTransition {
            from: self.phase,
            to: self.phase,
        })?;
        self.enter(next);
        Ok(next)
    }

    /// The round loop's return from collective shaping to mutual engagement.
    pub fn repeat_engagement(&mut self) -> Result<(), SessionError> {
        if self.phase != Phase::CollectiveShaping {
            return Err(SessionError::IllegalTransition {
                from: self.phase,
                to: Phase::MutualEngagement,
            });
        }
        if self.rounds_remaining() == 0 {
            return Err(SessionError::RoundBudgetExhausted(self.envelope.max_rounds));
        }
        self.enter(Phase::MutualEngagement);
        Ok(())
    }

    fn enter(&mut self, phase: Phase) {
        self.phase = phase;
        self.phase_history.push(phase);
        if phase == Phase::MutualEngagement {
            self.engagement_done = false;
            self.round_scored = false;
        }
    }

    /// Opens the next deliberation round, charging both the session budget
    /// and the tree ledger. Returns the 1-based round number.
    pub fn begin_round(&mut self, ledger: &mut TreeLedger) -> Result<u32, SessionError> {
        if self.rounds_used >= self.envelope.max_rounds {
            return Err(SessionError::RoundBudgetExhausted(self.envelope.max_rounds));
        }
        ledger.consume()?;
        self.rounds_used += 1;
        Ok(self.rounds_used)
    }

    /// Carves a child envelope for a sub-problem. The child sits one level
    /// deeper, and gets `min(requested, parent remaining - 1)` rounds, further
    /// capped by what is left under the tree ceiling.
    pub fn spawn_subsession(
        &mut self,
        ledger: &TreeLedger,
        subproblem: &str,
        requested_rounds: u32,
        child_id: SessionId,
    ) -> Result<SessionEnvelope, Refusal> {
        if self.envelope.depth >= self.envelope.max_depth {
            return Err(Refusal::DepthExhausted);
        }
        if ledger.remaining() == 0 {
            return Err(Refusal::CeilingExhausted);
        }
        if self.spawned >= self.envelope.max_spawns_per_session {
            return Err(Refusal::SpawnCapReached);
        }
        // Rounds remaining including the current one, minus the one the parent keeps.
        let carved = (self.envelope.max_rounds + 1)
            .saturating_sub(self.rounds_used.max(1))
            .saturating_sub(1);
        let rounds = requested_rounds.min(carved).min(ledger.remaining());
        if rounds < 1 {
            return Err(Refusal::BudgetExhausted);
        }
        self.spawned += 1;
        let mut child = self.envelope.clone();
        child.session_id = child_id;
        child.problem = subproblem.to_owned();
        child.depth += 1;
        child.max_rounds = rounds;
        Ok(child)
    }

    /// Merges a finished child's outcome into this session's workspace.
    pub fn recall_result(&mut self, child: &SubsessionResult) {
        self.workspace = self.workspace.merge_subsession(child);
    }
}

/// What a finished child session hands back to its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsessionResult {
    pub session_id: SessionId,
    pub spawn_move: MoveId,
    pub packet: DecisionPacket,
    pub open_tensions: Vec<Tension>,
}

/// Worst-case rounds across a session tree: `max_rounds * sum(caps)`, where
/// `caps[d]` is the maximum number of sessions at depth `d`.
pub fn termination_bound(max_rounds: u32, caps: &[u64]) -> u64 {
    u64::from(max_rounds).saturating_mul(caps.iter().fold(0u64, |a, b| a.saturating_add(*b)))
}

/// Per-depth session caps when every session may spawn `spawns` children.
pub fn per_depth_caps(max_depth: u32, spawns: u32) -> Vec<u64> {
    (0..=max_depth)
        .map(|d| u64::from(spawns).saturating_pow(d))
        .collect()
}

/// The bound that actually applies: the formula, clipped by the tree ceiling.
pub fn effective_bound(envelope: &SessionEnvelope) -> u64 {
    let caps = per_depth_caps(envelope.max_depth - envelope.depth, envelope.max_spawns_per_session);
    termination_bound(envelope.max_rounds, &caps).min(u64::from(envelope.tree_ceiling))
}

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

fn default_session_id() -> String {
    "DCI-S-001".into()
}
fn default_max_rounds() -> u32 {
    2
}
fn default_max_options() -> usize {
    5
}
fn default_finalists() -> usize {
    3
}
fn default_margin() -> f64 {
    0.15
}
fn default_threshold() -> f64 {
    0.5
}
fn default_max_depth() -> u32 {
    2
}
fn default_ceiling() -> u32 {
    50
}
fn default_spawns() -> u32 {
    2
}

/// One council seat in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub id: DelegateId,
    pub archetype: ArchetypeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<DelegateScript>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_path: Option<PathBuf>,
    /// Remote endpoint reference; the base address comes from the environment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

/// Session config document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    #[serde(default = "default_session_id")]
    pub session_id: String,
    pub problem: String,
    pub criteria: Vec<Criterion>,
    pub delegates: Vec<RosterEntry>,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    #[serde(default = "default_max_options")]
    pub max_options: usize,
    #[serde(default = "default_finalists")]
    pub finalist_count: usize,
    #[serde(default = "default_margin")]
    pub convergence_margin: f64,
    #[serde(default)]
    pub fallback_rule: FallbackRule,
    #[serde(default = "default_max_depth")]
    pub max_depth: u32,
    #[serde(default = "default_ceiling")]
    pub tree_ceiling: u32,
    #[serde(default = "default_threshold")]
    pub majority_threshold: f64,
    #[serde(default = "default_spawns")]
    pub max_spawns_per_session: u32,
    #[serde(default)]
    pub domain_fit: DomainFit,
}

impl SessionConfig {
    pub fn envelope(&self) -> SessionEnvelope {
        SessionEnvelope {
            session_id: SessionId::new(self.session_id.clone()),
            problem: self.problem.clone(),
            council: self
                .delegates
                .iter()
                .map(|d| CouncilMember {
                    id: d.id.clone(),
                    archetype: d.archetype,
                })
                .collect(),
            criteria: self.criteria.clone(),
            max_rounds: self.max_rounds,
            max_options: self.max_options,
            finalist_count: self.finalist_count,
            convergence_margin: self.convergence_margin,
            majority_threshold: self.majority_threshold,
            fallback_rule: self.fallback_rule,
            depth: 0,
            max_depth: self.max_depth,
            tree_ceiling: self.tree_ceiling,
            max_spawns_per_session: self.max_spawns_per_session,
            domain_fit: self.domain_fit.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn council(n: usize) -> Vec<CouncilMember> {
        let kinds = [
            ArchetypeKind::Framer,
            ArchetypeKind::Explorer,
            ArchetypeKind::Challenger,
            ArchetypeKind::Integrator,
        ];
        (0..n)
            .map(|i| CouncilMember {
                id: DelegateId::new(format!("d{i}")),
                archetype: kinds[i % 4],
            })
            .collect()
    }

    fn envelope(n: usize) -> SessionEnvelope {
        SessionEnvelope::with_defaults(
            "S",
            "design a pipeline",
            council(n),
            vec![Criterion {
                id: "quality".into(),
                weight: 1.0,
            }],
        )
    }

    #[test]
    fn defaults_form_a_valid_session() {
        let env = envelope(4);
        assert_eq!(
            (env.max_rounds, env.max_options, env.finalist_count, env.max_depth, env.tree_ceiling),
            (2, 5, 3, 2, 50)
        );
        assert_eq!(env.convergence_margin, 0.15);
        let s = init_session(env).unwrap();
        assert_eq!(s.phase(), Phase::Arrival);
        assert_eq!(s.workspace.problem_view(), "design a pipeline");
    }

    #[test]
    fn single_delegate_is_invalid() {
        assert!(matches!(
            init_session(envelope(1)),
            Err(SessionError::InvalidEnvelope(_))
        ));
    }

    #[test]
    fn weights_are_renormalized() {
        let mut env = envelope(2);
        env.criteria = vec![
            Criterion { id: "a".into(), weight: 1.2 },
            Criterion { id: "b".into(), weight: 0.8 },
        ];
        let s = init_session(env).unwrap();
        // summation oracle
        let total: f64 = s.envelope().criteria.iter().map(|c| c.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(s.original_weight_sum(), Some(2.0));
        assert!((s.envelope().criteria[0].weight - 0.6).abs() < 1e-12);
    }

    #[test]
    fn phase_progression_checks_exit_artifacts() {
        let mut s = init_session(envelope(4)).unwrap();
        assert_eq!(s.advance_phase().unwrap(), Phase::IndependentFirstThought);
        for _ in 0..3 {
            s.record_stage1_outcome();
        }
        assert!(matches!(
            s.advance_phase(),
            Err(SessionError::MissingExitArtifact { .. })
        ));
        s.record_stage1_outcome();
        assert_eq!(s.advance_phase().unwrap(), Phase::MutualEngagement);
        let mut ledger = TreeLedger::new(50);
        s.begin_round(&mut ledger).unwrap();
        s.mark_engagement_done();
        assert_eq!(s.advance_phase().unwrap(), Phase::CollectiveShaping);
        s.mark_round_scored();
        // rounds remain, so the loop may return to engagement
        s.repeat_engagement().unwrap();
        assert_eq!(s.phase(), Phase::MutualEngagement);
        s.begin_round(&mut ledger).unwrap();
        s.mark_engagement_done();
        s.advance_phase().unwrap();
        assert!(matches!(
            s.repeat_engagement(),
            Err(SessionError::RoundBudgetExhausted(2))
        ));
        s.mark_round_scored();
        assert_eq!(s.advance_phase().unwrap(), Phase::Closure);
        assert!(is_legal_phase_sequence(s.phase_history()));
        assert_eq!(ledger.used(), 2);
    }

    #[test]
    fn phase_sequence_pattern() {
        use Phase::*;
        assert!(is_legal_phase_sequence(&[
            Arrival,
            IndependentFirstThought,
            MutualEngagement,
            CollectiveShaping,
            Closure
        ]));
        assert!(!is_legal_phase_sequence(&[
            Arrival,
            IndependentFirstThought,
            Closure
        ]));
        assert!(!is_legal_phase_sequence(&[
            Arrival,
            IndependentFirstThought,
            MutualEngagement,
            Closure
        ]));
    }

    #[test]
    fn spawn_depth_and_budget() {
        let mut s = init_session(envelope(2)).unwrap();
        let mut ledger = TreeLedger::new(50);
        s.begin_round(&mut ledger).unwrap();
        let child = s
            .spawn_subsession(&ledger, "sub", 5, SessionId::new("S.1"))
            .unwrap();
        assert_eq!(child.depth, 1);
        assert_eq!(child.max_rounds, 1);

        let mut deep = envelope(2);
        deep.depth = 2;
        let mut s = init_session(deep).unwrap();
        s.begin_round(&mut ledger).unwrap();
        assert_eq!(
            s.spawn_subsession(&ledger, "sub", 1, SessionId::new("x")),
            Err(Refusal::DepthExhausted)
        );
    }

    #[test]
    fn spawn_refused_when_ceiling_reached() {
        let mut s = init_session(envelope(2)).unwrap();
        let mut ledger = TreeLedger::new(50);
        s.begin_round(&mut ledger).unwrap();
        while ledger.remaining() > 0 {
            ledger.consume().unwrap();
        }
        assert_eq!(ledger.used(), 50);
        assert_eq!(
            s.spawn_subsession(&ledger, "sub", 1, SessionId::new("x")),
            Err(Refusal::CeilingExhausted)
        );
    }

    #[test]
    fn last_round_has_nothing_to_carve() {
        let mut s = init_session(envelope(2)).unwrap();
        let mut ledger = TreeLedger::new(50);
        s.begin_round(&mut ledger).unwrap();
        s.begin_round(&mut ledger).unwrap();
        assert_eq!(
            s.spawn_subsession(&ledger, "sub", 3, SessionId::new("x")),
            Err(Refusal::BudgetExhausted)
        );
    }

    #[test]
    fn bound_formula() {
        assert_eq!(termination_bound(2, &[1]), 2);
        assert_eq!(termination_bound(2, &[1, 3, 9]), 26);
        assert_eq!(per_depth_caps(2, 2), vec![1, 2, 4]);
        let env = envelope(4);
        // 2 * (1 + 2 + 4) = 14, below the ceiling
        assert_eq!(effective_bound(&env), 14);
        let mut wide = envelope(4);
        wide.max_spawns_per_session = 9;
        assert_eq!(effective_bound(&wide), 50);
    }
}
