//! Delegates that replay a fixed JSON script.
//!
//! A script refers to options by label rather than by id, so it stays valid
//! however clustering numbers them. Move documents may leave out any field the
//! engine can infer; `"target": "option:<label>"` resolves to the move that
//! first put that option forward.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value, json};

use super::{
    ChallengeContribution, ContributionKind, Delegate, DelegateError, NewHypothesis, PickRequest,
    Proposal, ProposalRequest, RoundOutput, RoundRequest, ScoreRequest, ScoreSheet,
};
use crate::grammar::{ActType, default_mode};
use crate::ids::{MoveId, OptionId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedContribution {
    pub option: String,
    pub kind: ContributionKind,
    pub content: String,
    #[serde(default)]
    pub fatal: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked_evidence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposed_new_hypothesis: Option<NewHypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_id: Option<MoveId>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScriptedRound {
    #[serde(default)]
    pub contributions: Vec<ScriptedContribution>,
    /// Partial move documents; missing fields are filled from the request.
    #[serde(default)]
    pub moves: Vec<Value>,
    /// Documents sent exactly as written.
    #[serde(default)]
    pub raw_moves: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedScores {
    pub confidence: f64,
    pub evidence_strength: f64,
    /// Option label to criterion id to score.
    pub options: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub rationale: BTreeMap<String, String>,
    /// Overrides the derived top choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_choice: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DelegateScript {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal: Option<Proposal>,
    /// Indexed by round, starting at round 1.
    #[serde(default)]
    pub rounds: Vec<ScriptedRound>,
    #[serde(default)]
    pub scores: Vec<ScriptedScores>,
    /// Label picked when asked to break a tie.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick: Option<String>,
    /// Script used inside sub-sessions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsession: Option<Box<DelegateScript>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedDelegate {
    script: DelegateScript,
}

impl ScriptedDelegate {
    pub fn new(script: DelegateScript) -> Self {
        Self { script }
    }

    /// Never says anything; every call is exhausted.
    pub fn silent() -> Self {
        Self::new(DelegateScript::default())
    }

    pub fn proposing(proposal: Proposal) -> Self {
        Self::new(DelegateScript {
            proposal: Some(proposal),
            ..DelegateScript::default()
        })
    }

    pub fn script(&self) -> &DelegateScript {
        &self.script
    }

    fn for_depth(&self, depth: u32) -> Option<&DelegateScript> {
        let mut s = &self.script;
        for _ in 0..depth {
            s = s.subsession.as_deref()?;
        }
        Some(s)
    }
}

fn unknown_label(label: &str) -> DelegateError {
    DelegateError::ProviderFailure(format!("script names unknown option {label:?}"))
}

/// Fills the fields of a partial move document from the request.
pub fn complete_move(doc: &Value, req: &RoundRequest, k: usize) -> Result<Value, DelegateError> {
    let Value::Object(partial) = doc else {
        return Ok(doc.clone());
    };
    let me = req.session.me();
    let mut m: Map<String, Value> = partial.clone();
    let act = m
        .get("act")
        .and_then(Value::as_str)
        .and_then(|a| a.parse::<ActType>().ok());
    m.entry("move_id").or_insert_with(|| {
        json!(format!("m-{}-r{}-{}", me.id, req.round, k + 1))
    });
    m.entry("session_id").or_insert_with(|| json!(req.session.session_id));
    m.entry("round").or_insert_with(|| json!(req.round));
    m.entry("phase").or_insert_with(|| json!(req.phase));
    m.entry("actor").or_insert_with(|| json!(me.id));
    if let Some(act) = act {
        m.entry("mode").or_insert_with(|| json!(default_mode(act).as_str()));
        m.entry("intent").or_insert_with(|| json!(act.as_str()));
    }
    m.entry("target").or_insert_with(|| json!("problem"));
    m.entry("confidence").or_insert_with(|| json!(req.own_state.confidence()));
    m.entry("move_force").or_insert_with(|| json!("soft"));
    m.entry("meta_level").or_insert(Value::Bool(false));
    if let Some(label) = m
        .get("target")
        .and_then(Value::as_str)
        .and_then(|t| t.strip_prefix("option:"))
        .map(str::to_owned)
    {
        let anchor = req
            .option_by_label(&label)
            .ok_or_else(|| unknown_label(&label))?
            .anchor
            .clone();
        m.insert("target".into(), json!(format!("contribution:{anchor}")));
    }
    Ok(Value::Object(m))
}

/// Turns a scripted round into the wire output for `req`.
pub fn render_round(round: &ScriptedRound, req: &RoundRequest) -> Result<RoundOutput, DelegateError> {
    let mut out = RoundOutput::default();
    for c in &round.contributions {
        let option = req.option_by_label(&c.option).ok_or_else(|| unknown_label(&c.option))?;
        out.contributions.push(ChallengeContribution {
            author: req.session.me().id.clone(),
            option_id: option.option_id,
            kind: c.kind,
            content: c.content.clone(),
            fatal: c.fatal,
            linked_evidence: c.linked_evidence.clone(),
            proposed_new_hypothesis: c.proposed_new_hypothesis.clone(),
            move_id: c.move_id.clone(),
        });
    }
    for (k, doc) in round.moves.iter().enumerate() {
        out.moves.push(complete_move(doc, req, k)?);
    }
    out.moves.extend(round.raw_moves.iter().cloned());
    Ok(out)
}

/// Turns scripted scores into a sheet over the requested finalists.
pub fn render_scores(s: &ScriptedScores, req: &ScoreRequest) -> Result<ScoreSheet, DelegateError> {
    let lookup = |label: &str| {
        req.finalists
            .iter()
            .find(|o| o.answers_to(label))
            .map(|o| o.option_id)
    };
    let mut scores = BTreeMap::new();
    for (label, row) in &s.options {
        // Options that did not reach the finals are skipped.
        if let Some(id) = lookup(label) {
            scores.insert(id, row.clone());
        }
    }
    let rationale = s
        .rationale
        .iter()
        .filter_map(|(l, r)| lookup(l).map(|id| (id, r.clone())))
        .collect();
    let top_choice = match &s.top_choice {
        Some(label) => lookup(label).ok_or_else(|| unknown_label(label))?,
        None => ScoreSheet::derive_top_choice(&scores, &req.criteria)
            .ok_or_else(|| DelegateError::ProviderFailure("script scores no finalist".into()))?,
    };
    Ok(ScoreSheet {
        delegate: req.session.me().id.clone(),
        scores,
        confidence: s.confidence,
        evidence_strength: s.evidence_strength,
        rationale,
        top_choice,
    })
}

impl Delegate for ScriptedDelegate {
    fn generate_proposal(&mut self, req: &ProposalRequest) -> Result<Proposal, DelegateError> {
        self.for_depth(req.session.depth)
            .and_then(|s| s.proposal.clone())
            .ok_or(DelegateError::ScenarioExhausted)
    }

    fn contribute(&mut self, req: &RoundRequest) -> Result<RoundOutput, DelegateError> {
        let round = self
            .for_depth(req.session.depth)
            .and_then(|s| s.rounds.get(req.round as usize - 1))
            .ok_or(DelegateError::ScenarioExhausted)?;
        render_round(round, req)
    }

    fn score(&mut self, req: &ScoreRequest) -> Result<ScoreSheet, DelegateError> {
        let s = self
            .for_depth(req.session.depth)
            .and_then(|s| s.scores.get(req.round as usize - 1))
            .ok_or(DelegateError::ScenarioExhausted)?;
        render_scores(s, req)
    }

    fn integrator_pick(&mut self, req: &PickRequest) -> Result<OptionId, DelegateError> {
        let label = self
            .for_depth(req.session.depth)
            .and_then(|s| s.pick.as_deref())
            .ok_or(DelegateError::ScenarioExhausted)?;
        req.top_two
            .iter()
            .find(|o| o.answers_to(label))
            .map(|o| o.option_id)
            .ok_or_else(|| unknown_label(label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_parses_with_defaults() {
        let s: DelegateScript = serde_json::from_value(json!({
            "proposal": {"hypotheses": [{"label": "a", "description": ""}], "confidence": 0.5},
            "rounds": [{"contributions": [{"option": "a", "kind": "support", "content": "yes"}]}],
            "scores": [{"confidence": 1.0, "evidence_strength": 1.0, "options": {"a": {"q": 5.0}}}]
        }))
        .unwrap();
        assert_eq!(s.rounds.len(), 1);
        assert!(s.pick.is_none());
        assert!(s.subsession.is_none());
    }

    #[test]
    fn silent_delegate_is_exhausted() {
        let d = ScriptedDelegate::silent();
        assert!(d.for_depth(0).unwrap().proposal.is_none());
        assert!(d.for_depth(1).is_none());
    }
}
