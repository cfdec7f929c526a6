//! Implements the delegate trait by hand and seats it beside simulated
//! delegates. The custom delegate keeps arguing for its own option, so it
//! ends up in the minority report.

use std::collections::BTreeMap;

use dci_core::delegate::{
    ArchetypeKind, ChallengeContribution, ContributionKind, Delegate, DelegateBox, DelegateError,
    Hypothesis, PickRequest, Policy, Proposal, ProposalRequest, RoundOutput, RoundRequest,
    ScoreRequest, ScoreSheet, SimulatedDelegate,
};
use dci_core::session::{CouncilMember, Criterion, SessionEnvelope};
use dci_core::{DelegateId, OptionId, run_session};

const MINE: &str = "batch nightly";

struct Contrarian;

impl Delegate for Contrarian {
    fn generate_proposal(&mut self, _: &ProposalRequest) -> Result<Proposal, DelegateError> {
        Ok(Proposal {
            author: DelegateId::default(),
            framing: "Do we need real time at all?".into(),
            hypotheses: vec![Hypothesis { label: MINE.into(), description: "One nightly job.".into() }],
            concerns: vec!["operational cost".into()],
            confidence: 0.8,
            suggested_criteria: vec![],
        })
    }

    fn contribute(&mut self, req: &RoundRequest) -> Result<RoundOutput, DelegateError> {
        let contributions = req
            .options
            .iter()
            .filter(|o| !o.answers_to(MINE))
            .map(|o| ChallengeContribution {
                author: DelegateId::default(),
                option_id: o.option_id,
                kind: ContributionKind::Challenge,
                content: format!("{} costs more than it returns", o.label),
                fatal: false,
                linked_evidence: None,
                proposed_new_hypothesis: None,
                move_id: None,
            })
            .collect();
        Ok(RoundOutput { contributions, moves: vec![] })
    }

    fn score(&mut self, req: &ScoreRequest) -> Result<ScoreSheet, DelegateError> {
        let scores: BTreeMap<_, _> = req
            .finalists
            .iter()
            .map(|o| {
                let s = if o.answers_to(MINE) { 9.0 } else { 4.0 };
                (o.option_id, req.criteria.iter().map(|c| (c.id.clone(), s)).collect())
            })
            .collect();
        let top_choice = ScoreSheet::derive_top_choice(&scores, &req.criteria).unwrap();
        Ok(ScoreSheet {
            delegate: DelegateId::default(),
            scores,
            confidence: 0.8,
            evidence_strength: 0.6,
            rationale: BTreeMap::new(),
            top_choice,
        })
    }

    fn integrator_pick(&mut self, req: &PickRequest) -> Result<OptionId, DelegateError> {
        Ok(req.top_two[0].option_id)
    }
}

fn main() {
    let council: Vec<CouncilMember> = ArchetypeKind::ALL
        .iter()
        .enumerate()
        .map(|(i, a)| CouncilMember { id: format!("d{i}").into(), archetype: *a })
        .collect();
    let envelope = SessionEnvelope::with_defaults(
        "custom",
        "How fresh must the reporting data be?",
        council,
        vec![Criterion { id: "value".into(), weight: 0.6 }, Criterion { id: "cost".into(), weight: 0.4 }],
    );
    let mut delegates: Vec<DelegateBox> = vec![
        Box::new(SimulatedDelegate::new(Policy::Cooperative, 1)),
        Box::new(SimulatedDelegate::new(Policy::Cooperative, 2)),
        Box::new(Contrarian),
        Box::new(SimulatedDelegate::new(Policy::Cooperative, 3)),
    ];
    let packet = run_session(envelope, &mut delegates).unwrap();
    println!("decision: {} ({:?})", packet.decision.label, packet.verdict);
    for m in &packet.minority_report {
        println!("minority: {} prefers {} ({})", m.delegate, m.preferred_label, m.reasoning);
    }
}
