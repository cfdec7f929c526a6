//! Drives one session tree from initialization to its decision packet.
//!
//! Control flow follows the convergent-flow loop: proposals, clustering, then
//! up to `max_rounds` iterations of contribution, compression, scoring and the
//! convergence test, then the fallback cascade if nothing converged, then the
//! packet. Child sessions requested by spawn moves run after the spawning
//! round's convergence test and share the parent's tree ledger.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value, json};

use super::{
    AdmissionOutcome, AdmissionRequest, Attributed, CandidateOption,
    ConvergenceVerdict, FallbackOutcome, HypothesisPool, Objection, PoolEntry, RankEntry,
    ScoreTable, admit_new_hypotheses, canonicalize_and_cluster, fallback_select,
    revise_and_compress, test_convergence,
};
use crate::delegate::{
    ArchetypeKind, ChallengeContribution, ContributionKind, Delegate, DelegateBox, DelegateError,
    DelegateState, OptionView, PickRequest, Proposal, ProposalRequest, RoundOutput, RoundRequest,
    ScoreRequest, ScoreSheet, SessionInfo, Turn, record_position_shift,
};
use crate::events::{CallKind, EventKind, EventLog, ResponseOutcome};
use crate::grammar::{
    ActType, Move, MoveContext, MoveForce, Rejection, RejectionReason, Target, default_mode,
    parse_move, validate_move,
};
use crate::ids::{DelegateId, MoveId, OptionId, SessionId};
use crate::packet::{DecisionPacket, PacketInputs, finalize_decision};
use crate::session::{
    CouncilMember, Phase, SessionEnvelope, SessionError, SessionState, SubsessionResult,
    TreeLedger, init_session,
};
use crate::workspace::{CarryForward, Workspace};

/// Re-prompts after a rejected response before the turn is skipped.
pub const RETRY_BOUND: u32 = 2;

const ENGINE: &str = "engine";

/// Everything a finished session leaves behind.
#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub packet: DecisionPacket,
    pub workspace: Workspace,
    pub carry_forward: CarryForward,
    pub delegate_states: BTreeMap<DelegateId, DelegateState>,
    pub rounds_used: u32,
    /// Rounds charged to the tree ledger when this session finished.
    pub tree_rounds: u32,
    pub verdict: ConvergenceVerdict,
    pub fallback: Option<FallbackOutcome>,
    pub phases: Vec<Phase>,
    pub accepted_moves: Vec<Move>,
    pub options: Vec<CandidateOption>,
    pub finalists: Vec<CandidateOption>,
    pub ranking: Vec<RankEntry>,
    pub children: Vec<SessionOutcome>,
}

impl SessionOutcome {
    /// Rounds run by this session and every descendant.
    pub fn total_rounds(&self) -> u32 {
        self.rounds_used + self.children.iter().map(|c| c.total_rounds()).sum::<u32>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

/// Runs a session with the given delegates (one per council seat, in order).
pub fn run_session(
    envelope: SessionEnvelope,
    delegates: &mut [DelegateBox],
) -> Result<DecisionPacket, SessionError> {
    let mut log = EventLog::new();
    run_session_logged(envelope, delegates, &mut log).map(|o| o.packet)
}

/// As [`run_session`], recording every event into `log`.
pub fn run_session_logged(
    envelope: SessionEnvelope,
    delegates: &mut [DelegateBox],
    log: &mut EventLog,
) -> Result<SessionOutcome, SessionError> {
    if delegates.len() != envelope.council.len() {
        return Err(SessionError::InvalidEnvelope(format!(
            "{} delegates supplied for a council of {}",
            delegates.len(),
            envelope.council.len()
        )));
    }
    let mut tree = Tree {
        delegates,
        log,
        ledger: TreeLedger::new(envelope.tree_ceiling),
    };
    run_tree_node(&mut tree, envelope, None)
}

struct Tree<'a> {
    delegates: &'a mut [DelegateBox],
    log: &'a mut EventLog,
    ledger: TreeLedger,
}

struct PendingSpawn {
    move_id: MoveId,
    subproblem: String,
    rounds: u32,
}

/// A stage-3 output that passed validation as a whole.
struct Prepared {
    contributions: Vec<(ChallengeContribution, Move)>,
    admissions: Vec<AdmissionRequest>,
    moves: Vec<Move>,
}

struct Run<'t, 'a> {
    tree: &'t mut Tree<'a>,
    state: SessionState,
    sid: SessionId,
    round: u32,
    known: BTreeSet<MoveId>,
    recallable: BTreeSet<MoveId>,
    accepted: Vec<Move>,
    states: BTreeMap<DelegateId, DelegateState>,
    options: Vec<CandidateOption>,
    labels: BTreeMap<OptionId, String>,
    next_option_id: u32,
    first_hypothesis: BTreeMap<DelegateId, OptionId>,
    last_sheets: BTreeMap<DelegateId, ScoreSheet>,
    prior_tops: BTreeSet<OptionId>,
    bridges: Vec<(String, String)>,
    spawns: Vec<PendingSpawn>,
    spawn_counter: u32,
    children: Vec<SessionOutcome>,
}

fn run_tree_node(
    tree: &mut Tree<'_>,
    envelope: SessionEnvelope,
    parent: Option<SessionId>,
) -> Result<SessionOutcome, SessionError> {
    let original = envelope.clone();
    let state = init_session(envelope)?;
    let sid = state.envelope().session_id.clone();
    let mut run = Run {
        tree,
        state,
        sid,
        round: 0,
        known: BTreeSet::new(),
        recallable: BTreeSet::new(),
        accepted: Vec::new(),
        states: BTreeMap::new(),
        options: Vec::new(),
        labels: BTreeMap::new(),
        next_option_id: 1,
        first_hypothesis: BTreeMap::new(),
        last_sheets: BTreeMap::new(),
        prior_tops: BTreeSet::new(),
        bridges: Vec::new(),
        spawns: Vec::new(),
        spawn_counter: 0,
        children: Vec::new(),
    };
    run.log(EventKind::SessionStarted {
        envelope: original,
        parent,
    });
    if let Some(sum) = run.state.original_weight_sum() {
        run.log(EventKind::EnvelopeNormalized {
            original_weight_sum: sum,
        });
    }
    run.execute()
}

fn contribution_act(kind: ContributionKind, fatal: bool) -> (ActType, MoveForce) {
    match kind {
        ContributionKind::Support | ContributionKind::RevisionSuggestion => {
            (ActType::Extend, MoveForce::Soft)
        }
        ContributionKind::Challenge if fatal => (ActType::Challenge, MoveForce::Hard),
        ContributionKind::Challenge | ContributionKind::Counterexample => {
            (ActType::Challenge, MoveForce::Soft)
        }
        ContributionKind::Evidence => (ActType::Ground, MoveForce::Soft),
        ContributionKind::UncertaintyNote => (ActType::Ask, MoveForce::Soft),
    }
}

fn rejection(reason: RejectionReason, field: impl Into<String>, message: impl Into<String>) -> Rejection {
    Rejection {
        reason,
        field: field.into(),
        message: message.into(),
    }
}

impl Run<'_, '_> {
    fn env(&self) -> &SessionEnvelope {
        self.state.envelope()
    }

    fn member(&self, seat: usize) -> &CouncilMember {
        &self.state.envelope().council[seat]
    }

    fn log(&mut self, kind: EventKind) {
        self.tree.log.push(&self.sid, self.round, kind);
    }

    fn stage(&mut self, stage: u8, name: &str) {
        self.log(EventKind::StageEntered {
            stage,
            name: name.to_owned(),
        });
    }

    fn phase_entered(&mut self) {
        let phase = self.state.phase();
        self.log(EventKind::PhaseEntered { phase });
        let workspace = self.state.workspace.export();
        self.log(EventKind::WorkspaceSnapshot { phase, workspace });
    }

    fn advance(&mut self) -> Result<(), SessionError> {
        self.state.advance_phase()?;
        self.phase_entered();
        Ok(())
    }

    fn info(&self, seat: usize) -> SessionInfo {
        let env = self.env();
        SessionInfo {
            session_id: self.sid.clone(),
            depth: env.depth,
            problem: env.problem.clone(),
            council: env.council.clone(),
            seat,
        }
    }

    fn view(&self, o: &CandidateOption) -> OptionView {
        OptionView {
            option_id: o.option_id,
            label: o.canonical_label.clone(),
            description: o.description().to_owned(),
            anchor: o.anchor().clone(),
            aliases: o.aliases.clone(),
            record: o.record.clone(),
        }
    }

    fn confidence_of(&self, did: &DelegateId) -> f64 {
        self.states.get(did).map_or(0.5, |s| s.confidence())
    }

    /// Asks a delegate, validates the answer, re-prompts with the rejection
    /// up to [`RETRY_BOUND`] times, and skips the turn after that.
    fn ask_with_retries<T, A, Q, C, W>(
        &mut self,
        seat: usize,
        call: CallKind,
        mut ask: Q,
        wrap: W,
        mut check: C,
    ) -> Option<A>
    where
        Q: FnMut(&mut dyn Delegate, &Turn) -> Result<T, DelegateError>,
        C: FnMut(&Self, &T) -> Result<A, Rejection>,
        W: Fn(&T) -> ResponseOutcome,
    {
        let did = self.member(seat).id.clone();
        let mut turn = Turn::default();
        loop {
            let answer = ask(self.tree.delegates[seat].as_mut(), &turn);
            match answer {
                Err(error) => {
                    self.log(EventKind::DelegateResponse {
                        delegate: did.clone(),
                        call,
                        attempt: turn.attempt,
                        outcome: ResponseOutcome::Error {
                            error: error.clone(),
                        },
                    });
                    if error == DelegateError::ScenarioExhausted {
                        self.log(EventKind::TurnSkipped {
                            delegate: did,
                            call,
                            reason: error.to_string(),
                        });
                        return None;
                    }
                    turn.feedback = Some(error.to_string());
                }
                Ok(value) => {
                    self.log(EventKind::DelegateResponse {
                        delegate: did.clone(),
                        call,
                        attempt: turn.attempt,
                        outcome: wrap(&value),
                    });
                    match check(self, &value) {
                        Ok(accepted) => return Some(accepted),
                        Err(rej) => {
                            turn.feedback = Some(rej.to_string());
                            self.log(EventKind::MoveRejected {
                                delegate: did.clone(),
                                attempt: turn.attempt,
                                rejection: rej,
                            });
                        }
                    }
                }
            }
            if turn.attempt >= RETRY_BOUND {
                self.log(EventKind::TurnSkipped {
                    delegate: did,
                    call,
                    reason: format!("no valid response after {} attempts", turn.attempt + 1),
                });
                return None;
            }
            turn.attempt += 1;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn engine_move(
        &self,
        id: MoveId,
        actor: &str,
        act: ActType,
        target: Target,
        content: &str,
        confidence: f64,
        force: MoveForce,
        extra: Map<String, Value>,
    ) -> Move {
        let (round, phase) = if self.round == 0 {
            (1, self.state.phase())
        } else {
            (self.round, self.state.phase())
        };
        Move {
            move_id: id,
            session_id: self.sid.clone(),
            round,
            phase,
            actor: actor.to_owned(),
            mode: default_mode(act),
            act,
            intent: format!("{act} on behalf of {actor}"),
            target,
            content: content.to_owned(),
            confidence,
            move_force: force,
            meta_level: false,
            extra,
        }
    }

    fn accept_move(&mut self, m: Move) {
        self.state.workspace = self.state.workspace.apply_move(&m);
        self.known.insert(m.move_id.clone());
        self.log(EventKind::MoveAccepted {
            delegate: m.actor.clone(),
            document: m.to_document(),
        });
        self.accepted.push(m);
    }

    fn execute(mut self) -> Result<SessionOutcome, SessionError> {
        // Stage 0 ran in init_session.
        self.phase_entered();
        self.stage(0, "initialization");

        self.advance()?;
        self.stage(1, "independent proposals");
        let (pool, concerns) = self.collect_proposals();

        self.advance()?;
        self.stage(2, "canonicalization and clustering");
        self.cluster(pool, concerns);

        let mut verdict = ConvergenceVerdict::none();
        let mut scored: Option<(ScoreTable, Vec<RankEntry>, Vec<OptionId>)> = None;
        loop {
            if self.state.rounds_used() > 0 {
                if verdict.converged() || self.state.rounds_remaining() == 0 {
                    break;
                }
                if self.tree.ledger.remaining() == 0 {
                    let used = self.tree.ledger.used();
                    self.log(EventKind::CeilingReached { used });
                    break;
                }
                self.state.repeat_engagement()?;
                self.phase_entered();
            }
            self.round = self.state.begin_round(&mut self.tree.ledger)?;

            self.stage(3, "challenge and evidence");
            self.collect_contributions();
            self.state.mark_engagement_done();

            self.advance()?;
            self.stage(4, "revision and compression");
            let finalists = self.compress();

            self.stage(5, "multi-criteria scoring");
            let (table, ranking, sheets) = self.score(&finalists);

            self.stage(6, "convergence test");
            let finalist_records: Vec<CandidateOption> = self
                .options
                .iter()
                .filter(|o| finalists.contains(&o.option_id))
                .cloned()
                .collect();
            let env = self.env();
            verdict = test_convergence(
                &ranking,
                &finalist_records,
                env.convergence_margin,
                env.majority_threshold,
                &sheets,
                env.council_size(),
            );
            self.log(EventKind::Verdict { verdict });
            self.state.mark_round_scored();
            self.prior_tops = sheets.iter().map(|s| s.top_choice).collect();
            scored = Some((table, ranking, finalists));

            self.run_spawns()?;
        }

        self.advance()?;
        let (table, ranking, finalists) = scored.expect("at least one round ran");
        let mut fallback = None;
        let winner = match verdict.winner {
            Some(w) => w,
            None => {
                self.stage(7, "forced-decision fallback");
                let rule = self.env().fallback_rule;
                let outcome =
                    fallback_select(&table, &ranking, rule, &mut |two| self.integrator_pick(two));
                for step in &outcome.trail {
                    self.log(EventKind::FallbackLevel {
                        method: step.method,
                        survivors: step.survivors.clone(),
                    });
                }
                let w = outcome.winner;
                fallback = Some(outcome);
                w
            }
        };

        self.stage(8, "actionization and carry-forward");
        let finalist_records: Vec<CandidateOption> = self
            .options
            .iter()
            .filter(|o| finalists.contains(&o.option_id))
            .cloned()
            .collect();
        let env = self.env();
        let packet = finalize_decision(&PacketInputs {
            session_id: &self.sid,
            winner,
            finalists: &finalist_records,
            labels: &self.labels,
            ranking: &ranking,
            sheets: &self.last_sheets,
            council: &env.council,
            states: &self.states,
            first_hypothesis: &self.first_hypothesis,
            next_actions: self.state.workspace.next_actions(),
            verdict,
            fallback: fallback.as_ref().map(|f| f.method),
            margin: env.convergence_margin,
            rounds: self.state.rounds_used(),
        });
        let (workspace, carry_forward) = self
            .state
            .workspace
            .carry_forward(self.state.phase())
            .expect("session is at closure");
        self.state.workspace = workspace.clone();
        let snapshot = workspace.export();
        self.log(EventKind::WorkspaceSnapshot {
            phase: Phase::Closure,
            workspace: snapshot,
        });
        self.log(EventKind::PacketEmitted {
            packet: packet.clone(),
        });

        Ok(SessionOutcome {
            packet,
            workspace,
            carry_forward,
            delegate_states: self.states,
            rounds_used: self.state.rounds_used(),
            tree_rounds: self.tree.ledger.used(),
            verdict,
            fallback,
            phases: self.state.phase_history().to_vec(),
            accepted_moves: self.accepted,
            options: self.options,
            finalists: finalist_records,
            ranking,
            children: self.children,
        })
    }

    // -- stage 1 ------------------------------------------------------------

    fn collect_proposals(&mut self) -> (HypothesisPool, Vec<(DelegateId, Vec<String>)>) {
        let mut pool = HypothesisPool::default();
        let mut concerns = Vec::new();
        for seat in 0..self.env().council_size() {
            let did = self.member(seat).id.clone();
            let req = ProposalRequest {
                session: self.info(seat),
                turn: Turn::default(),
            };
            let accepted = self.ask_with_retries(
                seat,
                CallKind::Proposal,
                |d, turn| {
                    let mut r = req.clone();
                    r.turn = turn.clone();
                    d.generate_proposal(&r)
                },
                |p: &Proposal| ResponseOutcome::Proposal { proposal: p.clone() },
                |_, p: &Proposal| {
                    p.validate()
                        .map(|_| p.clone())
                        .map_err(|msg| rejection(RejectionReason::Malformed, "proposal", msg))
                },
            );
            self.state.record_stage1_outcome();
            let Some(mut proposal) = accepted else {
                self.states.insert(did, DelegateState::default());
                continue;
            };
            proposal.author = did.clone();
            let view = if proposal.framing.trim().is_empty() {
                proposal.hypotheses[0].label.clone()
            } else {
                proposal.framing.clone()
            };
            let mut st = DelegateState::new(view, proposal.confidence).expect("validated confidence");
            for c in &proposal.concerns {
                st = st.with_concern(c.clone());
            }
            self.states.insert(did.clone(), st);

            if !proposal.framing.trim().is_empty() {
                let m = self.engine_move(
                    MoveId::new(format!("p-{did}-frame")),
                    did.as_str(),
                    ActType::Frame,
                    Target::Problem,
                    &proposal.framing,
                    proposal.confidence,
                    MoveForce::Soft,
                    Map::new(),
                );
                self.accept_move(m);
            }
            for (k, h) in proposal.hypotheses.iter().enumerate() {
                let id = MoveId::new(format!("p-{did}-{}", k + 1));
                let description = if h.description.trim().is_empty() {
                    h.label.clone()
                } else {
                    h.description.clone()
                };
                let mut extra = Map::new();
                extra.insert("label".into(), json!(h.label));
                let m = self.engine_move(
                    id.clone(),
                    did.as_str(),
                    ActType::Propose,
                    Target::Problem,
                    &description,
                    proposal.confidence,
                    MoveForce::Soft,
                    extra,
                );
                self.accept_move(m);
                pool.push(PoolEntry {
                    author: did.clone(),
                    label: h.label.clone(),
                    description,
                    evidence_link: None,
                    move_id: id,
                    round: 1,
                });
            }
            concerns.push((did, proposal.concerns));
        }
        if pool.is_empty() {
            let id = MoveId::new("p-engine-defer");
            let text = "defer the decision until proposals are available";
            let mut extra = Map::new();
            extra.insert("label".into(), json!("defer"));
            let m = self.engine_move(
                id.clone(),
                ENGINE,
                ActType::Propose,
                Target::Problem,
                text,
                0.0,
                MoveForce::Soft,
                extra,
            );
            self.accept_move(m);
            pool.push(PoolEntry {
                author: DelegateId::new(ENGINE),
                label: "defer".into(),
                description: text.into(),
                evidence_link: None,
                move_id: id,
                round: 1,
            });
        }
        (pool, concerns)
    }

    // -- stage 2 ------------------------------------------------------------

    fn cluster(&mut self, pool: HypothesisPool, concerns: Vec<(DelegateId, Vec<String>)>) {
        let clustering = canonicalize_and_cluster(&pool, self.env().max_options)
            .expect("pool holds at least the defer entry");
        self.options = clustering.options;
        self.next_option_id = self.options.len() as u32 + 1;
        for (did, list) in concerns {
            for o in self.options.iter_mut() {
                let Some(member) = o.members.iter().find(|m| m.author == did) else {
                    continue;
                };
                let move_id = member.move_id.clone();
                for c in &list {
                    o.record.risks.push(Attributed {
                        author: did.clone(),
                        round: 1,
                        text: c.clone(),
                        move_id: move_id.clone(),
                    });
                }
            }
        }
        for o in &self.options {
            self.labels.insert(o.option_id, o.canonical_label.clone());
            for m in &o.members {
                if m.move_id.as_str().ends_with("-1") {
                    self.first_hypothesis.entry(m.author.clone()).or_insert(o.option_id);
                }
            }
        }
        // before any scoring, each delegate's first hypothesis is its top preference
        self.prior_tops = self.first_hypothesis.values().copied().collect();
        let options = self.options.clone();
        for o in &options {
            self.log(EventKind::OptionCreated {
                option_id: o.option_id,
                label: o.canonical_label.clone(),
                members: o.members.len(),
            });
        }
        for d in clustering.dropped {
            self.log(EventKind::OptionDropped {
                label: d.label,
                members: d.members,
            });
        }
    }

    // -- stage 3 ------------------------------------------------------------

    fn collect_contributions(&mut self) {
        self.bridges.clear();
        self.spawns.clear();
        let mut admissions = Vec::new();
        for seat in 0..self.env().council_size() {
            let did = self.member(seat).id.clone();
            let req = RoundRequest {
                session: self.info(seat),
                round: self.round,
                phase: self.state.phase(),
                options: self.options.iter().map(|o| self.view(o)).collect(),
                workspace: self.state.workspace.clone(),
                own_state: self.states.get(&did).cloned().unwrap_or_default(),
                known_moves: self.known.iter().cloned().collect(),
                recallable: self.recallable.iter().cloned().collect(),
                turn: Turn::default(),
            };
            let prepared = self.ask_with_retries(
                seat,
                CallKind::Contribute,
                |d, turn| {
                    let mut r = req.clone();
                    r.turn = turn.clone();
                    d.contribute(&r)
                },
                |o: &RoundOutput| ResponseOutcome::Round { output: o.clone() },
                |run, o: &RoundOutput| run.prepare(seat, o),
            );
            if let Some(p) = prepared {
                admissions.extend(p.admissions.iter().cloned());
                self.apply_prepared(&did, p);
            }
        }
        self.admit(admissions);
    }

    /// Validates a whole stage-3 output; any failure rejects all of it.
    fn prepare(&self, seat: usize, out: &RoundOutput) -> Result<Prepared, Rejection> {
        let member = self.member(seat);
        let did = &member.id;
        let env = self.env();
        let mut known = self.known.clone();
        let confidence = self.confidence_of(did);
        let mut contributions = Vec::new();
        let mut admissions = Vec::new();
        for (k, c) in out.contributions.iter().enumerate() {
            let field = format!("contributions[{k}]");
            c.validate()
                .map_err(|m| rejection(RejectionReason::Malformed, field.clone(), m))?;
            let option = self
                .options
                .iter()
                .find(|o| o.option_id == c.option_id)
                .ok_or_else(|| {
                    rejection(
                        RejectionReason::DanglingTarget,
                        format!("{field}.option_id"),
                        format!("no option {}", c.option_id),
                    )
                })?;
            let mut c = c.clone();
            c.author = did.clone();
            let id = c
                .move_id
                .clone()
                .unwrap_or_else(|| MoveId::new(format!("c-{did}-r{}-{}", self.round, k + 1)));
            let (act, force) = contribution_act(c.kind, c.fatal);
            let mut extra = Map::new();
            extra.insert("option".into(), json!(c.option_id));
            extra.insert("kind".into(), json!(c.kind));
            let m = self.engine_move(
                id.clone(),
                did.as_str(),
                act,
                Target::Contribution(option.anchor().clone()),
                &c.content,
                confidence,
                force,
                extra,
            );
            validate_move(&m, &self.ctx(&known)).map_err(|mut r| {
                r.field = format!("{field}.{}", r.field);
                r
            })?;
            known.insert(id);
            if let Some(h) = &c.proposed_new_hypothesis {
                admissions.push(AdmissionRequest {
                    entry: PoolEntry {
                        author: did.clone(),
                        label: h.label.clone(),
                        description: if h.description.trim().is_empty() {
                            h.label.clone()
                        } else {
                            h.description.clone()
                        },
                        evidence_link: Some(h.evidence_link.clone()),
                        move_id: MoveId::new(format!("h-{did}-r{}-{}", self.round, k + 1)),
                        round: self.round,
                    },
                    claimed_superior_to: c.option_id,
                });
            }
            contributions.push((c, m));
        }
        let mut moves = Vec::new();
        for (j, doc) in out.moves.iter().enumerate() {
            let m = parse_move(doc).map_err(|e| {
                let mut r = Rejection::from(e);
                r.field = format!("moves[{j}].{}", r.field);
                r
            })?;
            if m.actor != did.as_str() && m.actor != member.archetype.name() {
                return Err(rejection(
                    RejectionReason::ActorMismatch,
                    format!("moves[{j}].actor"),
                    format!("actor {} does not match delegate {did}", m.actor),
                ));
            }
            validate_move(&m, &self.ctx(&known)).map_err(|mut r| {
                r.field = format!("moves[{j}].{}", r.field);
                r
            })?;
            known.insert(m.move_id.clone());
            moves.push(m);
        }
        let _ = env;
        Ok(Prepared {
            contributions,
            admissions,
            moves,
        })
    }

    fn ctx<'s>(&'s self, known: &'s BTreeSet<MoveId>) -> MoveContext<'s> {
        let env = self.env();
        MoveContext {
            session_id: &self.sid,
            round: self.round,
            phase: self.state.phase(),
            known_moves: known,
            recallable: &self.recallable,
            depth: env.depth,
            max_depth: env.max_depth,
        }
    }

    fn apply_prepared(&mut self, did: &DelegateId, p: Prepared) {
        let round = self.round;
        for (c, m) in p.contributions {
            let entry = Attributed {
                author: did.clone(),
                round,
                text: c.content.clone(),
                move_id: m.move_id.clone(),
            };
            let o = self
                .options
                .iter_mut()
                .find(|o| o.option_id == c.option_id)
                .expect("validated option");
            let r = &mut o.record;
            match c.kind {
                ContributionKind::Support => r.pros.push(entry),
                ContributionKind::Challenge => {
                    r.objections.push(Objection {
                        id: m.move_id.clone(),
                        author: did.clone(),
                        round,
                        content: c.content.clone(),
                        fatal: c.fatal,
                        withdrawn: false,
                    });
                    r.cons.push(entry);
                }
                ContributionKind::Evidence => r.evidence.push(entry),
                ContributionKind::Counterexample => {
                    r.risks.push(entry.clone());
                    r.cons.push(entry);
                }
                ContributionKind::RevisionSuggestion => r.revisions.push(entry),
                ContributionKind::UncertaintyNote => r.assumptions.push(entry),
            }
            self.accept_move(m);
        }
        for m in p.moves {
            self.note_move_effects(did, &m);
            self.accept_move(m);
        }
    }

    /// Side effects of a free-standing move beyond its workspace section.
    fn note_move_effects(&mut self, did: &DelegateId, m: &Move) {
        match m.act {
            ActType::Update => {
                if let Some(target) = m.target.move_id() {
                    let mut withdrawn = Vec::new();
                    for o in self.options.iter_mut() {
                        for obj in o.record.objections.iter_mut() {
                            if &obj.id == target && &obj.author == did && !obj.withdrawn {
                                obj.withdrawn = true;
                                withdrawn.push(o.option_id);
                            }
                        }
                    }
                    for option_id in withdrawn {
                        self.log(EventKind::ObjectionWithdrawn {
                            option_id,
                            objection: target.clone(),
                        });
                    }
                }
                let prior = self.states.get(did).cloned().unwrap_or_default();
                let next = record_position_shift(&prior, &m.content, m.confidence, m.move_id.clone(), self.round)
                    .expect("confidence validated by the grammar");
                let shift = next.shift_history().last().cloned().expect("just appended");
                self.states.insert(did.clone(), next);
                self.log(EventKind::PositionShifted {
                    delegate: did.clone(),
                    shift,
                });
            }
            ActType::Ask => {
                let st = self.states.remove(did).unwrap_or_default();
                self.states.insert(did.clone(), st.with_question(m.content.clone()));
            }
            ActType::Challenge => {
                let st = self.states.remove(did).unwrap_or_default();
                self.states.insert(did.clone(), st.with_concern(m.content.clone()));
            }
            ActType::Bridge => {
                if let Some(pair) = m.bridged_labels() {
                    self.bridges.push(pair);
                }
            }
            ActType::Spawn => {
                let rounds = m
                    .extra
                    .get("rounds")
                    .and_then(Value::as_u64)
                    .map_or(self.env().max_rounds, |r| r.min(u64::from(u32::MAX)) as u32);
                self.spawns.push(PendingSpawn {
                    move_id: m.move_id.clone(),
                    subproblem: m.content.clone(),
                    rounds,
                });
            }
            _ => {}
        }
    }

    fn admit(&mut self, requests: Vec<AdmissionRequest>) {
        if requests.is_empty() {
            return;
        }
        let env = self.env();
        let (max_rounds, k_max) = (env.max_rounds, env.max_options);
        let mut next = self.next_option_id;
        let (options, outcomes) =
            admit_new_hypotheses(&self.options, &requests, self.round, max_rounds, k_max, &mut next);
        self.next_option_id = next;
        self.options = options;
        for (req, outcome) in requests.into_iter().zip(outcomes) {
            match outcome {
                AdmissionOutcome::Admitted(option_id) => {
                    let mut extra = Map::new();
                    extra.insert("label".into(), json!(req.entry.label));
                    extra.insert("claimed_superior_to".into(), json!(req.claimed_superior_to));
                    let confidence = self.confidence_of(&req.entry.author);
                    let m = self.engine_move(
                        req.entry.move_id.clone(),
                        req.entry.author.as_str(),
                        ActType::Propose,
                        Target::Problem,
                        &req.entry.description,
                        confidence,
                        MoveForce::Soft,
                        extra,
                    );
                    self.accept_move(m);
                    let label = self
                        .options
                        .iter()
                        .find(|o| o.option_id == option_id)
                        .map(|o| o.canonical_label.clone())
                        .unwrap_or_default();
                    self.labels.insert(option_id, label.clone());
                    self.log(EventKind::HypothesisAdmitted {
                        option_id,
                        label,
                        author: req.entry.author,
                    });
                }
                AdmissionOutcome::Refused(reason) => self.log(EventKind::AdmissionRefused {
                    label: req.entry.label,
                    author: req.entry.author,
                    reason,
                }),
            }
        }
    }

    // -- stage 4 ------------------------------------------------------------

    fn compress(&mut self) -> Vec<OptionId> {
        let c = revise_and_compress(
            &self.options,
            &self.bridges,
            &self.prior_tops,
            self.env().finalist_count,
        );
        for r in &c.removed {
            self.log(EventKind::OptionRemoved {
                option_id: r.option_id,
                dominated_by: r.dominated_by,
            });
        }
        for m in &c.merged {
            self.log(EventKind::OptionMerged {
                kept: m.kept,
                absorbed: m.absorbed,
            });
        }
        self.log(EventKind::FinalistsSelected {
            finalists: c.finalists.clone(),
        });
        self.options = c.options;
        c.finalists
    }

    // -- stage 5 ------------------------------------------------------------

    fn score(&mut self, finalists: &[OptionId]) -> (ScoreTable, Vec<RankEntry>, Vec<ScoreSheet>) {
        let views: Vec<OptionView> = self
            .options
            .iter()
            .filter(|o| finalists.contains(&o.option_id))
            .map(|o| self.view(o))
            .collect();
        let criteria = self.env().criteria.clone();
        let mut accepted: Vec<(usize, ScoreSheet)> = Vec::new();
        for seat in 0..self.env().council_size() {
            let did = self.member(seat).id.clone();
            let req = ScoreRequest {
                session: self.info(seat),
                round: self.round,
                finalists: views.clone(),
                criteria: criteria.clone(),
                turn: Turn::default(),
            };
            let sheet = self.ask_with_retries(
                seat,
                CallKind::Score,
                |d, turn| {
                    let mut r = req.clone();
                    r.turn = turn.clone();
                    d.score(&r)
                },
                |s: &ScoreSheet| ResponseOutcome::Sheet { sheet: s.clone() },
                |_, s: &ScoreSheet| {
                    s.validate(finalists, &criteria)
                        .map(|_| s.clone())
                        .map_err(|m| rejection(RejectionReason::Malformed, "score_sheet", m))
                },
            );
            match sheet {
                Some(mut s) => {
                    s.delegate = did.clone();
                    self.last_sheets.insert(did, s.clone());
                    accepted.push((seat, s));
                }
                None => self.log(EventKind::ScoreSheetExcluded {
                    delegate: did,
                    reason: "no valid score sheet".into(),
                }),
            }
        }
        let env = self.env();
        let table = ScoreTable::from_sheets(
            &env.criteria,
            finalists,
            &accepted,
            &env.domain_fit,
            env.council_size(),
        );
        let ranking = table.ranking().expect("accepted sheets are complete");
        self.log(EventKind::ScoresAggregated {
            ranking: ranking.clone(),
        });
        (table, ranking, accepted.into_iter().map(|(_, s)| s).collect())
    }

    // -- stage 7 ------------------------------------------------------------

    fn integrator_pick(&mut self, top_two: &[OptionId]) -> Option<OptionId> {
        let seat = self
            .env()
            .council
            .iter()
            .position(|m| m.archetype == ArchetypeKind::Integrator)?;
        let req = PickRequest {
            session: self.info(seat),
            top_two: self
                .options
                .iter()
                .filter(|o| top_two.contains(&o.option_id))
                .map(|o| self.view(o))
                .collect(),
            turn: Turn::default(),
        };
        let allowed = top_two.to_vec();
        self.ask_with_retries(
            seat,
            CallKind::IntegratorPick,
            |d, turn| {
                let mut r = req.clone();
                r.turn = turn.clone();
                d.integrator_pick(&r)
            },
            |o: &OptionId| ResponseOutcome::Pick { option: *o },
            |_, o: &OptionId| {
                if allowed.contains(o) {
                    Ok(*o)
                } else {
                    Err(rejection(
                        RejectionReason::OutOfRange,
                        "option",
                        format!("{o} is not one of the top two"),
                    ))
                }
            },
        )
    }

    // -- recursion ----------------------------------------------------------

    fn run_spawns(&mut self) -> Result<(), SessionError> {
        let spawns = std::mem::take(&mut self.spawns);
        for sp in spawns {
            self.spawn_counter += 1;
            let child_id = SessionId::new(format!("{}.{}", self.sid, self.spawn_counter));
            let carved = self
                .state
                .spawn_subsession(&self.tree.ledger, &sp.subproblem, sp.rounds, child_id);
            let env = match carved {
                Ok(env) => env,
                Err(reason) => {
                    self.log(EventKind::SpawnRefused {
                        move_id: sp.move_id,
                        reason,
                    });
                    continue;
                }
            };
            self.log(EventKind::SubsessionSpawned {
                move_id: sp.move_id.clone(),
                child: env.session_id.clone(),
                max_rounds: env.max_rounds,
            });
            let child = run_tree_node(self.tree, env, Some(self.sid.clone()))?;
            let result = SubsessionResult {
                session_id: child.packet.session_id.clone(),
                spawn_move: sp.move_id.clone(),
                packet: child.packet.clone(),
                open_tensions: child.carry_forward.tensions.clone(),
            };
            self.state.recall_result(&result);
            self.recallable.insert(sp.move_id.clone());
            self.log(EventKind::SubsessionRecalled {
                move_id: sp.move_id,
                child: result.session_id,
                decision: result.packet.decision.label,
            });
            self.children.push(child);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delegate::{Hypothesis, ScriptedDelegate};
    use crate::packet::validate_completeness;
    use crate::session::{Criterion, is_legal_phase_sequence};

    fn council() -> Vec<CouncilMember> {
        ArchetypeKind::ALL
            .iter()
            .enumerate()
            .map(|(i, a)| CouncilMember {
                id: DelegateId::new(format!("d{i}")),
                archetype: *a,
            })
            .collect()
    }

    fn envelope() -> SessionEnvelope {
        SessionEnvelope::with_defaults(
            "T",
            "pick a queue",
            council(),
            vec![Criterion { id: "q".into(), weight: 1.0 }],
        )
    }

    fn silent() -> Vec<DelegateBox> {
        (0..4)
            .map(|_| Box::new(ScriptedDelegate::silent()) as DelegateBox)
            .collect()
    }

    #[test]
    fn silent_council_still_decides() {
        let mut log = EventLog::new();
        let out = run_session_logged(envelope(), &mut silent(), &mut log).unwrap();
        assert_eq!(out.packet.decision.label, "defer");
        assert!(validate_completeness(&out.packet).is_ok());
        assert!(is_legal_phase_sequence(&out.phases));
        // a lone finalist dominates trivially
        assert_eq!(out.rounds_used, 1);
    }

    #[test]
    fn proposals_only_session() {
        let mut delegates: Vec<DelegateBox> = (0..4)
            .map(|i| {
                let label = if i < 3 { "kafka" } else { "ledger" };
                Box::new(ScriptedDelegate::proposing(Proposal {
                    author: DelegateId::new(""),
                    framing: String::new(),
                    hypotheses: vec![Hypothesis { label: label.into(), description: String::new() }],
                    concerns: vec![],
                    confidence: 0.6,
                    suggested_criteria: vec![],
                })) as DelegateBox
            })
            .collect();
        let out = run_session_logged(envelope(), &mut delegates, &mut EventLog::new()).unwrap();
        assert_eq!(out.options.len(), 2);
        assert!(validate_completeness(&out.packet).is_ok());
        // nobody scored, no objections: converges without fallback
        assert!(!out.packet.forced_fallback);
    }

    #[test]
    fn delegate_count_must_match() {
        let mut d = silent();
        d.pop();
        assert!(matches!(
            run_session(envelope(), &mut d),
            Err(SessionError::InvalidEnvelope(_))
        ));
    }
}
