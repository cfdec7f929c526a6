//! The decision packet every session ends with: the selected option, why,
//! what still stands against it, who dissents, what to do next, and when to
//! reopen the question.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::convergence::{
    CandidateOption, ConvergenceVerdict, FallbackMethod, Objection, RankEntry, VerdictKind,
    canonical_key,
};
use crate::delegate::{DelegateState, ScoreSheet};
use crate::grammar::MoveForce;
use crate::ids::{DelegateId, OptionId, SessionId};
use crate::session::CouncilMember;
use crate::workspace::NextAction;

pub const GENERIC_REOPEN_CONDITION: &str = "new material evidence on the selected option";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub option_id: OptionId,
    pub label: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorityEntry {
    pub delegate: DelegateId,
    pub preferred_option: OptionId,
    pub preferred_label: String,
    /// The delegate's current view.
    pub position: String,
    pub reasoning: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionPacket {
    pub session_id: SessionId,
    pub decision: Decision,
    pub rationale: String,
    pub supporting_evidence: Vec<String>,
    pub residual_objections: Vec<Objection>,
    pub minority_report: Vec<MinorityEntry>,
    #[serde(rename = "action_plan")]
    pub next_actions: Vec<String>,
    pub assumptions: Vec<String>,
    pub risks: Vec<String>,
    pub reopen_conditions: Vec<String>,
    pub confidence: f64,
    pub forced_fallback: bool,
    pub fallback_method: Option<FallbackMethod>,
    pub verdict: VerdictKind,
    pub rounds: u32,
}

/// Keys a serialized packet must carry.
pub const PACKET_KEYS: [&str; 12] = [
    "decision",
    "rationale",
    "supporting_evidence",
    "residual_objections",
    "minority_report",
    "action_plan",
    "assumptions",
    "risks",
    "reopen_conditions",
    "confidence",
    "forced_fallback",
    "fallback_method",
];

/// Everything stage 8 reads.
#[derive(Debug, Clone, Copy)]
pub struct PacketInputs<'a> {
    pub session_id: &'a SessionId,
    pub winner: OptionId,
    pub finalists: &'a [CandidateOption],
    /// Labels of every option the session ever held, for dissent entries.
    pub labels: &'a BTreeMap<OptionId, String>,
    pub ranking: &'a [RankEntry],
    /// Last accepted sheet per delegate.
    pub sheets: &'a BTreeMap<DelegateId, ScoreSheet>,
    pub council: &'a [CouncilMember],
    pub states: &'a BTreeMap<DelegateId, DelegateState>,
    /// Option holding each delegate's first stage-1 hypothesis.
    pub first_hypothesis: &'a BTreeMap<DelegateId, OptionId>,
    pub next_actions: &'a [NextAction],
    pub verdict: ConvergenceVerdict,
    pub fallback: Option<FallbackMethod>,
    pub margin: f64,
    pub rounds: u32,
}

fn dedup(items: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    items
        .into_iter()
        .filter(|s| seen.insert(canonical_key(s)))
        .collect()
}

/// One entry per delegate who prefers another option or keeps a standing
/// objection against the winner.
pub fn build_minority_report(inp: &PacketInputs<'_>, winner: &CandidateOption) -> Vec<MinorityEntry> {
    let mut out = Vec::new();
    for member in inp.council {
        let id = &member.id;
        let sheet = inp.sheets.get(id);
        let preferred = sheet
            .map(|s| s.top_choice)
            .or_else(|| inp.first_hypothesis.get(id).copied());
        let objection = winner
            .record
            .standing_objections()
            .find(|o| &o.author == id);
        let prefers_other = preferred.is_some_and(|p| p != inp.winner);
        if !prefers_other && objection.is_none() {
            continue;
        }
        let state = inp.states.get(id);
        let preferred = preferred.filter(|_| prefers_other).unwrap_or(inp.winner);
        let reasoning = if prefers_other {
            sheet
                .and_then(|s| s.rationale.get(&preferred).cloned())
                .or_else(|| state.map(|s| s.view().to_owned()))
                .unwrap_or_default()
        } else {
            objection.map(|o| o.content.clone()).unwrap_or_default()
        };
        out.push(MinorityEntry {
            delegate: id.clone(),
            preferred_option: preferred,
            preferred_label: inp
                .labels
                .get(&preferred)
                .cloned()
                .unwrap_or_else(|| preferred.to_string()),
            position: state.map(|s| s.view().to_owned()).unwrap_or_default(),
            reasoning,
            confidence: sheet
                .map(|s| s.confidence)
                .or_else(|| state.map(|s| s.confidence()))
                .unwrap_or(0.0),
        });
    }
    out
}

/// Assumptions, fatal residual objections and hard recommendations, deduplicated;
/// never empty.
pub fn derive_reopen_conditions(winner: &CandidateOption, next_actions: &[NextAction]) -> Vec<String> {
    let assumptions = winner
        .record
        .assumptions
        .iter()
        .map(|a| format!("assumption no longer holds: {}", a.text));
    let objections = winner
        .record
        .standing_objections()
        .filter(|o| o.fatal)
        .map(|o| format!("evidence substantiates objection: {}", o.content));
    let hard = next_actions
        .iter()
        .filter(|a| a.force == MoveForce::Hard)
        .map(|a| a.text.clone());
    let out = dedup(assumptions.chain(objections).chain(hard));
    if out.is_empty() {
        vec![GENERIC_REOPEN_CONDITION.to_owned()]
    } else {
        out
    }
}

/// Mean confidence of the winner's backers; the lowest sheet confidence when
/// nobody backs it; the lowest delegate confidence when no sheets exist.
pub fn compute_confidence(inp: &PacketInputs<'_>) -> f64 {
    let backers: Vec<f64> = inp
        .sheets
        .values()
        .filter(|s| s.top_choice == inp.winner)
        .map(|s| s.confidence)
        .collect();
    if !backers.is_empty() {
        return backers.iter().sum::<f64>() / backers.len() as f64;
    }
    let min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    min(&mut inp.sheets.values().map(|s| s.confidence))
        .or_else(|| min(&mut inp.states.values().map(|s| s.confidence())))
        .unwrap_or(0.0)
}

fn build_rationale(inp: &PacketInputs<'_>, winner: &CandidateOption) -> String {
    let score = |o: OptionId| inp.ranking.iter().find(|r| r.option_id == o).map(|r| r.normalized);
    let head = format!("{} ({})", winner.canonical_label, winner.option_id);
    let body = match (inp.verdict.kind, inp.fallback) {
        (VerdictKind::ScoreDominance, _) => match inp.ranking.get(1) {
            Some(second) => format!(
                "leads on weighted score {:.3} against {:.3} for {}, margin above {}",
                score(inp.winner).unwrap_or(0.0),
                second.normalized,
                second.option_id,
                inp.margin
            ),
            None => "is the only remaining finalist".to_owned(),
        },
        (VerdictKind::MajorityBacking, _) => {
            let n = inp.sheets.values().filter(|s| s.top_choice == inp.winner).count();
            format!("is the top choice of {n} of {} delegates", inp.council.len())
        }
        (VerdictKind::NoBlockingObjection, _) => {
            "leads on weighted score and no finalist carries a blocking objection".to_owned()
        }
        (VerdictKind::None, Some(m)) => format!(
            "was selected by forced fallback ({}) after {} rounds without convergence",
            serde_json::to_value(m).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            inp.rounds
        ),
        (VerdictKind::None, None) => "was selected".to_owned(),
    };
    format!(
        "{head} {body}; {} supporting contributions, {} evidence entries",
        winner.record.supports(),
        winner.record.evidence.len()
    )
}

/// Stage 8: assembles the packet for `inp.winner`.
pub fn finalize_decision(inp: &PacketInputs<'_>) -> DecisionPacket {
    let winner = inp
        .finalists
        .iter()
        .find(|f| f.option_id == inp.winner)
        .expect("winner is a finalist");
    let texts = |v: &[crate::convergence::Attributed]| dedup(v.iter().map(|a| a.text.clone()));
    DecisionPacket {
        session_id: inp.session_id.clone(),
        decision: Decision {
            option_id: winner.option_id,
            label: winner.canonical_label.clone(),
            content: winner.description().to_owned(),
        },
        rationale: build_rationale(inp, winner),
        supporting_evidence: texts(&winner.record.evidence),
        residual_objections: winner.record.standing_objections().cloned().collect(),
        minority_report: build_minority_report(inp, winner),
        next_actions: dedup(
            inp.next_actions
                .iter()
                .filter(|a| a.force == MoveForce::Soft)
                .map(|a| a.text.clone()),
        ),
        assumptions: texts(&winner.record.assumptions),
        risks: texts(&winner.record.risks),
        reopen_conditions: derive_reopen_conditions(winner, inp.next_actions),
        confidence: compute_confidence(inp),
        forced_fallback: inp.fallback.is_some(),
        fallback_method: inp.fallback,
        verdict: inp.verdict.kind,
        rounds: inp.rounds,
    }
}

/// Lists the missing or inconsistent components; empty means complete.
pub fn validate_completeness(p: &DecisionPacket) -> Result<(), Vec<String>> {
    let mut missing = Vec::new();
    if p.decision.label.trim().is_empty() {
        missing.push("decision".to_owned());
    }
    if p.rationale.trim().is_empty() {
        missing.push("rationale".to_owned());
    }
    if p.reopen_conditions.is_empty() || p.reopen_conditions.iter().any(|c| c.trim().is_empty()) {
        missing.push("reopen_conditions".to_owned());
    }
    if !(0.0..=1.0).contains(&p.confidence) {
        missing.push("confidence".to_owned());
    }
    if p.forced_fallback != p.fallback_method.is_some() {
        missing.push("fallback_method".to_owned());
    }
    if missing.is_empty() { Ok(()) } else { Err(missing) }
}

/// Checks a packet document: every key present and non-null (the method may
/// be null only when no fallback ran), then the typed checks.
pub fn validate_document(doc: &Value) -> Result<DecisionPacket, Vec<String>> {
    let Some(obj) = doc.as_object() else {
        return Err(vec!["document".to_owned()]);
    };
    let forced = obj.get("forced_fallback").and_then(Value::as_bool).unwrap_or(false);
    let missing: Vec<String> = PACKET_KEYS
        .iter()
        .filter(|k| match obj.get(**k) {
            None => true,
            Some(Value::Null) => **k != "fallback_method" || forced,
            Some(_) => false,
        })
        .map(|k| (*k).to_owned())
        .collect();
    if !missing.is_empty() {
        return Err(missing);
    }
    let packet: DecisionPacket =
        serde_json::from_value(doc.clone()).map_err(|e| vec![format!("document: {e}")])?;
    validate_completeness(&packet)?;
    Ok(packet)
}
