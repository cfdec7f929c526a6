//! The six-section shared workspace. Every accepted move lands in the
//! section its act maps to; disagreements are kept as tension objects that
//! are never deleted, only resolved or carried forward.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Value, json};
use thiserror::Error;

use crate::grammar::{ActType, Move, MoveForce, Target};
use crate::ids::{MoveId, SessionId};
use crate::session::{Phase, SubsessionResult};

/// Section names, spelled as in the exported snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    ProblemView,
    KeyFrames,
    EmergingIdeas,
    Tensions,
    Synthesis,
    NextActions,
}

impl Section {
    pub const ALL: [Section; 6] = [
        Section::ProblemView,
        Section::KeyFrames,
        Section::EmergingIdeas,
        Section::Tensions,
        Section::Synthesis,
        Section::NextActions,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Section::ProblemView => "problem_view",
            Section::KeyFrames => "key_frames",
            Section::EmergingIdeas => "emerging_ideas",
            Section::Tensions => "tensions",
            Section::Synthesis => "synthesis",
            Section::NextActions => "next_actions",
        }
    }
}

/// Sections an act is allowed to touch.
pub fn sections_for(act: ActType) -> BTreeSet<Section> {
    use ActType::*;
    let s: &[Section] = match act {
        Frame | Clarify | Reframe => &[Section::ProblemView, Section::KeyFrames],
        Propose | Extend | Spawn => &[Section::EmergingIdeas],
        Ask | Challenge => &[Section::Tensions],
        Bridge | Synthesize | Recall => &[Section::Synthesis, Section::Tensions],
        Ground | Update => &[Section::EmergingIdeas],
        Recommend => &[Section::NextActions],
    };
    s.iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revision {
    pub text: String,
    pub move_id: Option<MoveId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyFrame {
    pub frame_id: u32,
    pub description: String,
    pub author: String,
    pub move_id: MoveId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Idea {
    pub idea_id: u32,
    pub description: String,
    pub author: String,
    /// Originating move first, then every move that extended it.
    pub supporting_moves: Vec<MoveId>,
    pub supporters: BTreeSet<String>,
    pub evidence: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_session: Option<SessionId>,
}

/// One side of a disagreement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "ref", content = "id", rename_all = "snake_case")]
pub enum PositionRef {
    Idea(u32),
    Frame(u32),
    Problem,
    Move(MoveId),
    /// A delegate's dissenting preference, as recorded in a minority report.
    Dissent(String),
}

impl fmt::Display for PositionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositionRef::Idea(i) => write!(f, "idea:{i}"),
            PositionRef::Frame(i) => write!(f, "frame:{i}"),
            PositionRef::Problem => f.write_str("problem"),
            PositionRef::Move(m) => write!(f, "move:{m}"),
            PositionRef::Dissent(d) => write!(f, "dissent:{d}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensionStatus {
    Open,
    Resolved,
    CarriedForward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensionKind {
    Disagreement,
    Question,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tension {
    pub tension_id: u32,
    pub kind: TensionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub conflicting_positions: Vec<PositionRef>,
    /// Keyed by the rendered position reference.
    pub evidence_per_side: BTreeMap<String, Vec<String>>,
    pub resolution_condition: String,
    pub status: TensionStatus,
    pub questions: Vec<String>,
    pub origin_move: MoveId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_by: Option<MoveId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_session: Option<SessionId>,
}

impl Tension {
    pub fn is_open(&self) -> bool {
        self.status == TensionStatus::Open
    }

    fn involves(&self, p: &PositionRef) -> bool {
        self.conflicting_positions.contains(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextAction {
    pub text: String,
    pub move_id: MoveId,
    pub author: String,
    pub force: MoveForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub move_id: MoveId,
    pub act: Option<ActType>,
    pub sections: Vec<Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionId>,
}

/// What closure hands on: open tensions (now carried forward), the final
/// synthesis and the action list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarryForward {
    pub tensions: Vec<Tension>,
    pub synthesis: String,
    pub next_actions: Vec<NextAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkspaceError {
    #[error("carry-forward is only available at closure, session is in {0}")]
    PhaseMismatch(Phase),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    problem_view: String,
    problem_history: Vec<Revision>,
    key_frames: Vec<KeyFrame>,
    emerging_ideas: Vec<Idea>,
    tensions: Vec<Tension>,
    synthesis: String,
    synthesis_history: Vec<Revision>,
    next_actions: Vec<NextAction>,
    provenance: Vec<ProvenanceEntry>,
}

impl Workspace {
    pub fn new(problem: &str) -> Self {
        Self {
            problem_view: problem.to_owned(),
            problem_history: vec![Revision {
                text: problem.to_owned(),
                move_id: None,
            }],
            key_frames: Vec::new(),
            emerging_ideas: Vec::new(),
            tensions: Vec::new(),
            synthesis: String::new(),
            synthesis_history: Vec::new(),
            next_actions: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn problem_view(&self) -> &str {
        &self.problem_view
    }

    pub fn problem_history(&self) -> &[Revision] {
        &self.problem_history
    }

    pub fn key_frames(&self) -> &[KeyFrame] {
        &self.key_frames
    }

    pub fn ideas(&self) -> &[Idea] {
        &self.emerging_ideas
    }

    pub fn tensions(&self) -> &[Tension] {
        &self.tensions
    }

    pub fn synthesis(&self) -> &str {
        &self.synthesis
    }

    pub fn synthesis_history(&self) -> &[Revision] {
        &self.synthesis_history
    }

    pub fn next_actions(&self) -> &[NextAction] {
        &self.next_actions
    }

    pub fn provenance(&self) -> &[ProvenanceEntry] {
        &self.provenance
    }

    /// Open tensions ordered by id.
    pub fn open_tensions(&self) -> Vec<Tension> {
        let mut v: Vec<_> = self.tensions.iter().filter(|t| t.is_open()).cloned().collect();
        v.sort_by_key(|t| t.tension_id);
        v
    }

    pub fn idea_for_move(&self, id: &MoveId) -> Option<&Idea> {
        self.emerging_ideas
            .iter()
            .find(|i| i.supporting_moves.contains(id))
    }

    fn position_of(&self, target: &Target) -> PositionRef {
        match target {
            Target::Problem | Target::Workspace => PositionRef::Problem,
            Target::Contribution(id) => {
                if let Some(i) = self.idea_for_move(id) {
                    PositionRef::Idea(i.idea_id)
                } else if let Some(f) = self.key_frames.iter().find(|f| &f.move_id == id) {
                    PositionRef::Frame(f.frame_id)
                } else {
                    PositionRef::Move(id.clone())
                }
            }
        }
    }

    fn open_tension_on(&self, pos: &PositionRef, target: &Target) -> Option<usize> {
        self.tensions.iter().position(|t| {
            t.is_open()
                && (t.involves(pos) || target.move_id().is_some_and(|id| &t.origin_move == id))
        })
    }

    fn next_idea_id(&self) -> u32 {
        self.emerging_ideas.len() as u32 + 1
    }

    fn push_idea(&mut self, description: &str, author: &str, m: &MoveId, origin: Option<SessionId>) {
        let idea_id = self.next_idea_id();
        self.emerging_ideas.push(Idea {
            idea_id,
            description: description.to_owned(),
            author: author.to_owned(),
            supporting_moves: vec![m.clone()],
            supporters: [author.to_owned()].into(),
            evidence: Vec::new(),
            origin_session: origin,
        });
    }

    fn push_tension(&mut self, t: Tension) {
        self.tensions.push(Tension {
            tension_id: self.tensions.len() as u32 + 1,
            ..t
        });
    }

    /// Applies an accepted move. Only the sections mapped from the act change,
    /// plus one provenance entry.
    pub fn apply_move(&self, m: &Move) -> Workspace {
        let mut w = self.clone();
        let mut touched = BTreeSet::new();
        let id = &m.move_id;
        match m.act {
            ActType::Frame => {
                w.push_frame(m);
                touched.insert(Section::KeyFrames);
            }
            ActType::Clarify => {
                w.revise_problem(m);
                touched.insert(Section::ProblemView);
            }
            ActType::Reframe => {
                w.revise_problem(m);
                w.push_frame(m);
                touched.extend([Section::ProblemView, Section::KeyFrames]);
            }
            ActType::Propose | ActType::Spawn => {
                w.push_idea(&m.content, &m.actor, id, None);
                touched.insert(Section::EmergingIdeas);
            }
            ActType::Extend => {
                let existing = m
                    .target
                    .move_id()
                    .and_then(|t| w.emerging_ideas.iter().position(|i| i.supporting_moves.contains(t)));
                match existing {
                    Some(ix) => {
                        let idea = &mut w.emerging_ideas[ix];
                        idea.supporting_moves.push(id.clone());
                        idea.supporters.insert(m.actor.clone());
                    }
                    None => w.push_idea(&m.content, &m.actor, id, None),
                }
                touched.insert(Section::EmergingIdeas);
            }
            ActType::Ask => {
                let pos = w.position_of(&m.target);
                match w.open_tension_on(&pos, &m.target) {
                    Some(ix) => w.tensions[ix].questions.push(m.content.clone()),
                    None => w.push_tension(Tension {
                        tension_id: 0,
                        kind: TensionKind::Question,
                        label: label_of(m),
                        conflicting_positions: vec![pos, PositionRef::Move(id.clone())],
                        evidence_per_side: BTreeMap::new(),
                        resolution_condition: format!("an answer to: {}", m.content),
                        status: TensionStatus::Open,
                        questions: vec![m.content.clone()],
                        origin_move: id.clone(),
                        resolved_by: None,
                        origin_session: None,
                    }),
                }
                touched.insert(Section::Tensions);
            }
            ActType::Challenge => {
                if w.challenge(m) {
                    touched.insert(Section::Tensions);
                }
            }
            ActType::Bridge | ActType::Synthesize | ActType::Recall => {
                w.synthesis_history.push(Revision {
                    text: w.synthesis.clone(),
                    move_id: Some(id.clone()),
                });
                w.synthesis = m.content.clone();
                touched.insert(Section::Synthesis);
                if m.act == ActType::Bridge {
                    if let Some(tid) = m.target.move_id() {
                        for t in w.tensions.iter_mut() {
                            if t.is_open() && &t.origin_move == tid {
                                t.status = TensionStatus::Resolved;
                                t.resolved_by = Some(id.clone());
                                touched.insert(Section::Tensions);
                            }
                        }
                    }
                }
            }
            ActType::Ground | ActType::Update => {
                if let Some(t) = m.target.move_id() {
                    if let Some(idea) = w
                        .emerging_ideas
                        .iter_mut()
                        .find(|i| i.supporting_moves.contains(t))
                    {
                        idea.evidence.push(m.content.clone());
                        touched.insert(Section::EmergingIdeas);
                    }
                }
            }
            ActType::Recommend => {
                w.next_actions.push(NextAction {
                    text: m.content.clone(),
                    move_id: id.clone(),
                    author: m.actor.clone(),
                    force: m.move_force,
                });
                touched.insert(Section::NextActions);
            }
        }
        w.provenance.push(ProvenanceEntry {
            move_id: id.clone(),
            act: Some(m.act),
            sections: touched.into_iter().collect(),
            session: None,
        });
        w
    }

    fn push_frame(&mut self, m: &Move) {
        self.key_frames.push(KeyFrame {
            frame_id: self.key_frames.len() as u32 + 1,
            description: m.content.clone(),
            author: m.actor.clone(),
            move_id: m.move_id.clone(),
        });
    }

    fn revise_problem(&mut self, m: &Move) {
        self.problem_view = m.content.clone();
        self.problem_history.push(Revision {
            text: m.content.clone(),
            move_id: Some(m.move_id.clone()),
        });
    }

    /// Strengthens an open tension on the target, or opens one. A soft
    /// challenge opens a tension only when someone besides the idea's author
    /// and the challenger has backed the targeted idea. Returns whether anything changed.
    fn challenge(&mut self, m: &Move) -> bool {
        let pos = self.position_of(&m.target);
        let side = PositionRef::Move(m.move_id.clone());
        if let Some(ix) = self.open_tension_on(&pos, &m.target) {
            let t = &mut self.tensions[ix];
            t.evidence_per_side
                .entry(side.to_string())
                .or_default()
                .push(m.content.clone());
            t.conflicting_positions.push(side);
            return true;
        }
        let open = match (m.move_force, &pos) {
            (MoveForce::Hard, _) => true,
            (MoveForce::Soft, PositionRef::Idea(i)) => self
                .emerging_ideas
                .iter()
                .find(|idea| idea.idea_id == *i)
                .is_some_and(|idea| {
                    idea.supporters
                        .iter()
                        .any(|s| s != &m.actor && s != &idea.author)
                }),
            (MoveForce::Soft, _) => false,
        };
        if !open {
            return false;
        }
        let mut evidence = BTreeMap::new();
        if let PositionRef::Idea(i) = &pos {
            let ev = self
                .emerging_ideas
                .iter()
                .find(|idea| idea.idea_id == *i)
                .map(|idea| idea.evidence.clone())
                .unwrap_or_default();
            evidence.insert(pos.to_string(), ev);
        }
        evidence.insert(side.to_string(), vec![m.content.clone()]);
        self.push_tension(Tension {
            tension_id: 0,
            kind: TensionKind::Disagreement,
            label: label_of(m),
            conflicting_positions: vec![pos, side],
            evidence_per_side: evidence,
            resolution_condition: format!("evidence that settles: {}", m.content),
            status: TensionStatus::Open,
            questions: Vec::new(),
            origin_move: m.move_id.clone(),
            resolved_by: None,
            origin_session: None,
        });
        true
    }

    /// Closes out the session: every open tension becomes carried-forward.
    pub fn carry_forward(&self, phase: Phase) -> Result<(Workspace, CarryForward), WorkspaceError> {
        if phase != Phase::Closure {
            return Err(WorkspaceError::PhaseMismatch(phase));
        }
        let mut w = self.clone();
        let mut carried = Vec::new();
        for t in w.tensions.iter_mut().filter(|t| t.is_open()) {
            t.status = TensionStatus::CarriedForward;
            carried.push(t.clone());
        }
        carried.sort_by_key(|t| t.tension_id);
        let record = CarryForward {
            tensions: carried,
            synthesis: w.synthesis.clone(),
            next_actions: w.next_actions.clone(),
        };
        Ok((w, record))
    }

    /// Folds a finished child session in: its decision becomes an idea cited
    /// by the spawn move, its open tensions join ours, and each minority
    /// entry opens a tension against the child's decision.
    pub fn merge_subsession(&self, child: &SubsessionResult) -> Workspace {
        let mut w = self.clone();
        let decision = &child.packet.decision;
        let author = format!("session:{}", child.session_id);
        let idea_id = w.next_idea_id();
        w.push_idea(
            &format!("{}: {}", decision.label, decision.content),
            &author,
            &child.spawn_move,
            Some(child.session_id.clone()),
        );
        for t in &child.open_tensions {
            w.push_tension(Tension {
                status: TensionStatus::Open,
                origin_session: Some(child.session_id.clone()),
                resolved_by: None,
                ..t.clone()
            });
        }
        for entry in &child.packet.minority_report {
            let side = PositionRef::Dissent(entry.delegate.to_string());
            w.push_tension(Tension {
                tension_id: 0,
                kind: TensionKind::Disagreement,
                label: Some(format!("{} vs {}", decision.label, entry.preferred_label)),
                conflicting_positions: vec![PositionRef::Idea(idea_id), side.clone()],
                evidence_per_side: [(side.to_string(), vec![entry.reasoning.clone()])].into(),
                resolution_condition: format!(
                    "evidence favouring {} over {}",
                    entry.preferred_label, decision.label
                ),
                status: TensionStatus::Open,
                questions: Vec::new(),
                origin_move: child.spawn_move.clone(),
                resolved_by: None,
                origin_session: Some(child.session_id.clone()),
            });
        }
        w.provenance.push(ProvenanceEntry {
            move_id: child.spawn_move.clone(),
            act: Some(ActType::Recall),
            sections: vec![Section::EmergingIdeas, Section::Tensions],
            session: Some(child.session_id.clone()),
        });
        w
    }

    /// Snapshot document with exactly the six section names as keys.
    pub fn export(&self) -> Value {
        json!({
            "problem_view": {
                "text": self.problem_view,
                "revisions": self.problem_history,
            },
            "key_frames": self.key_frames,
            "emerging_ideas": self.emerging_ideas,
            "tensions": self.tensions,
            "synthesis": {
                "text": self.synthesis,
                "revisions": self.synthesis_history,
            },
            "next_actions": self.next_actions,
        })
    }

    /// Sections whose content differs between two workspaces.
    pub fn diff_sections(&self, other: &Workspace) -> BTreeSet<Section> {
        let (a, b) = (self.export(), other.export());
        Section::ALL
            .into_iter()
            .filter(|s| a[s.as_str()] != b[s.as_str()])
            .collect()
    }
}

fn label_of(m: &Move) -> Option<String> {
    m.extra
        .get("tension_label")
        .and_then(Value::as_str)
        .map(str::to_owned)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::SpeechMode;

    fn mv(id: &str, actor: &str, act: ActType, target: Target, force: MoveForce) -> Move {
        Move {
            move_id: MoveId::new(id),
            session_id: SessionId::new("S"),
            round: 1,
            phase: Phase::MutualEngagement,
            actor: actor.into(),
            mode: SpeechMode::Analytical,
            act,
            intent: "test".into(),
            target,
            content: format!("{act} by {actor}"),
            confidence: 0.7,
            move_force: force,
            meta_level: false,
            extra: Default::default(),
        }
    }

    fn with_idea() -> Workspace {
        let w = Workspace::new("P");
        w.apply_move(&mv("m1", "a", ActType::Propose, Target::Problem, MoveForce::Soft))
    }

    #[test]
    fn fresh_workspace_has_no_tensions() {
        assert!(Workspace::new("P").open_tensions().is_empty());
    }

    #[test]
    fn hard_challenge_opens_tension_on_idea() {
        let w = with_idea();
        let w = w.apply_move(&mv(
            "m2",
            "b",
            ActType::Challenge,
            Target::contribution("m1"),
            MoveForce::Hard,
        ));
        let open = w.open_tensions();
        assert_eq!(open.len(), 1);
        assert!(open[0].conflicting_positions.contains(&PositionRef::Idea(1)));
        assert!(open[0].conflicting_positions.len() >= 2);
    }

    #[test]
    fn soft_challenge_needs_outside_support() {
        let w = with_idea();
        let soft = mv("m2", "b", ActType::Challenge, Target::contribution("m1"), MoveForce::Soft);
        assert!(w.apply_move(&soft).open_tensions().is_empty());
        let backed = w.apply_move(&mv("m3", "c", ActType::Extend, Target::contribution("m1"), MoveForce::Soft));
        assert_eq!(backed.apply_move(&soft).open_tensions().len(), 1);
    }

    #[test]
    fn second_challenge_strengthens() {
        let w = with_idea();
        let w = w.apply_move(&mv("m2", "b", ActType::Challenge, Target::contribution("m1"), MoveForce::Hard));
        let w = w.apply_move(&mv("m3", "c", ActType::Challenge, Target::contribution("m1"), MoveForce::Hard));
        assert_eq!(w.tensions().len(), 1);
        assert_eq!(w.tensions()[0].evidence_per_side.len(), 3);
    }

    #[test]
    fn clarify_touches_only_problem_view() {
        let w = with_idea();
        let w2 = w.apply_move(&mv("m2", "b", ActType::Clarify, Target::Problem, MoveForce::Soft));
        assert_eq!(w.diff_sections(&w2), [Section::ProblemView].into());
        assert_eq!(w2.problem_history().len(), 2);
    }

    #[test]
    fn synthesize_grows_history_by_one() {
        let w = with_idea();
        let w2 = w.apply_move(&mv("m2", "b", ActType::Synthesize, Target::Workspace, MoveForce::Soft));
        assert_eq!(w2.synthesis(), "synthesize by b");
        assert_eq!(w2.synthesis_history().len(), w.synthesis_history().len() + 1);
    }

    #[test]
    fn bridge_resolves_cited_tension() {
        let w = with_idea();
        let w = w.apply_move(&mv("m2", "b", ActType::Challenge, Target::contribution("m1"), MoveForce::Hard));
        let w = w.apply_move(&mv("m3", "c", ActType::Challenge, Target::Problem, MoveForce::Hard));
        assert_eq!(w.open_tensions().len(), 2);
        let w = w.apply_move(&mv("m4", "d", ActType::Bridge, Target::contribution("m2"), MoveForce::Soft));
        let open = w.open_tensions();
        assert_eq!(open.len(), 1);
        assert_eq!(w.tensions().len(), 2);
        let resolved = w.tensions().iter().find(|t| !t.is_open()).unwrap();
        assert_eq!(resolved.resolved_by, Some(MoveId::new("m4")));
    }

    #[test]
    fn carry_forward_only_at_closure() {
        let w = with_idea();
        let w = w.apply_move(&mv("m2", "b", ActType::Challenge, Target::contribution("m1"), MoveForce::Hard));
        assert_eq!(
            w.carry_forward(Phase::MutualEngagement),
            Err(WorkspaceError::PhaseMismatch(Phase::MutualEngagement))
        );
        let (after, record) = w.carry_forward(Phase::Closure).unwrap();
        assert_eq!(record.tensions.len(), 1);
        assert_eq!(record.tensions[0].status, TensionStatus::CarriedForward);
        assert!(after.open_tensions().is_empty());
        assert_eq!(after.tensions().len(), 1);
    }

    #[test]
    fn export_has_six_keys() {
        let doc = with_idea().export();
        let keys: BTreeSet<_> = doc.as_object().unwrap().keys().cloned().collect();
        let expected: BTreeSet<_> = Section::ALL.iter().map(|s| s.as_str().to_owned()).collect();
        assert_eq!(keys, expected);
    }

    #[test]
    fn ask_attaches_to_open_tension() {
        let w = with_idea();
        let w = w.apply_move(&mv("m2", "b", ActType::Challenge, Target::contribution("m1"), MoveForce::Hard));
        let w = w.apply_move(&mv("m3", "c", ActType::Ask, Target::contribution("m1"), MoveForce::Soft));
        assert_eq!(w.tensions().len(), 1);
        assert_eq!(w.tensions()[0].questions.len(), 1);
        let w = w.apply_move(&mv("m4", "c", ActType::Ask, Target::Workspace, MoveForce::Soft));
        assert_eq!(w.tensions().len(), 2);
        assert_eq!(w.tensions()[1].kind, TensionKind::Question);
    }

    #[test]
    fn every_entry_has_provenance() {
        let w = with_idea();
        let w = w.apply_move(&mv("m2", "b", ActType::Frame, Target::Problem, MoveForce::Soft));
        let w = w.apply_move(&mv("m3", "b", ActType::Recommend, Target::Workspace, MoveForce::Hard));
        let cited: BTreeSet<_> = w.provenance().iter().map(|p| p.move_id.clone()).collect();
        for i in w.ideas() {
            assert!(i.supporting_moves.iter().all(|m| cited.contains(m)));
        }
        for f in w.key_frames() {
            assert!(cited.contains(&f.move_id));
        }
        for a in w.next_actions() {
            assert!(cited.contains(&a.move_id));
        }
    }
}
