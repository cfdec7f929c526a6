//! Seeded synthetic delegates for fuzzing and demos.
//!
//! Every choice comes from a ChaCha stream seeded at construction, so a
//! delegate's behavior is a pure function of its seed and the requests it sees.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Value, json};

use super::{
    Archetype, ChallengeContribution, ContributionKind, Delegate, DelegateError, Hypothesis,
    NewHypothesis, PickRequest, Proposal, ProposalRequest, RoundOutput, RoundRequest,
    ScoreRequest, ScoreSheet,
};
use crate::grammar::{ActType, default_mode};
use crate::ids::OptionId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Shares one label with the rest of the council and scores it clearly first.
    Cooperative,
    /// Backs only its own option, objects fatally to all others, never concedes.
    Adversarial,
    /// Asks for a sub-session every round it is allowed to.
    SpawnHappy,
    /// Draws acts from its archetype bias and scores uniformly at random.
    Random,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::Cooperative,
        Policy::Adversarial,
        Policy::SpawnHappy,
        Policy::Random,
    ];
}

const LABELS: [&str; 7] = [
    "batch nightly",
    "stream in place",
    "buy a vendor tool",
    "rewrite the core",
    "add a cache",
    "split the service",
    "do nothing",
];

pub const COOPERATIVE_LABEL: &str = "shared plan";

#[derive(Debug, Clone)]
pub struct SimulatedDelegate {
    policy: Policy,
    rng: ChaCha8Rng,
    /// Chance that a random delegate sends a broken document.
    malformed_rate: f64,
}

impl SimulatedDelegate {
    pub fn new(policy: Policy, seed: u64) -> Self {
        Self {
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            malformed_rate: 0.1,
        }
    }

    pub fn with_malformed_rate(mut self, rate: f64) -> Self {
        self.malformed_rate = rate.clamp(0.0, 1.0);
        self
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    fn own_label(req_seat: usize) -> String {
        format!("hold-out plan {req_seat}")
    }

    fn random_move(&mut self, req: &RoundRequest, k: usize) -> Value {
        let me = req.session.me();
        let bias = Archetype::standard(me.archetype);
        let acts: Vec<(ActType, f64)> = bias.act_bias().iter().map(|(a, w)| (*a, *w)).collect();
        let dist = WeightedIndex::new(acts.iter().map(|(_, w)| *w)).expect("positive weights");
        let mut act = acts[dist.sample(&mut self.rng)].0;
        if act == ActType::Recall && req.recallable.is_empty() {
            act = ActType::Synthesize;
        }
        if act == ActType::Spawn && req.session.depth >= 2 {
            act = ActType::Propose;
        }
        let target = match act {
            ActType::Recall => {
                let i = self.rng.gen_range(0..req.recallable.len());
                format!("contribution:{}", req.recallable[i])
            }
            _ if !req.known_moves.is_empty() && self.rng.gen_bool(0.6) => {
                let i = self.rng.gen_range(0..req.known_moves.len());
                format!("contribution:{}", req.known_moves[i])
            }
            _ => "problem".into(),
        };
        let mut doc = json!({
            "move_id": format!("s-{}-r{}-{}", me.id, req.round, k + 1),
            "session_id": req.session.session_id,
            "round": req.round,
            "phase": req.phase,
            "actor": me.id,
            "mode": default_mode(act).as_str(),
            "act": act.as_str(),
            "intent": format!("{act} the current state"),
            "target": target,
            "content": format!("{} says {act} in round {}", me.id, req.round),
            "confidence": self.rng.gen_range(0.0..=1.0),
            "move_force": if self.rng.gen_bool(0.2) { "hard" } else { "soft" },
            "meta_level": false,
        });
        if act == ActType::Bridge && req.options.len() >= 2 && self.rng.gen_bool(0.5) {
            let a = self.rng.gen_range(0..req.options.len());
            let b = (a + 1) % req.options.len();
            doc["bridges"] = json!([req.options[a].label, req.options[b].label]);
        }
        if act == ActType::Spawn {
            doc["rounds"] = json!(self.rng.gen_range(1..=3));
        }
        if self.rng.gen_bool(self.malformed_rate) {
            self.corrupt(&mut doc);
        }
        doc
    }

    fn corrupt(&mut self, doc: &mut Value) {
        match self.rng.gen_range(0..5) {
            0 => doc["act"] = json!("shout"),
            1 => doc["mode"] = json!("sarcastic"),
            2 => doc["confidence"] = json!(1.5),
            3 => doc["target"] = json!("contribution:nowhere"),
            _ => doc["phase"] = json!("arrival"),
        }
    }

    fn spawn_move(&mut self, req: &RoundRequest) -> Value {
        let me = req.session.me();
        json!({
            "move_id": format!("s-{}-r{}-spawn", me.id, req.round),
            "session_id": req.session.session_id,
            "round": req.round,
            "phase": req.phase,
            "actor": me.id,
            "mode": "exploratory",
            "act": "spawn",
            "intent": "split off a sub-problem",
            "target": "problem",
            "content": format!("sub-problem of {} from {}", req.session.session_id, me.id),
            "confidence": 0.5,
            "move_force": "soft",
            "meta_level": false,
            "rounds": 99,
        })
    }
}

impl Delegate for SimulatedDelegate {
    fn generate_proposal(&mut self, req: &ProposalRequest) -> Result<Proposal, DelegateError> {
        let seat = req.session.seat;
        let hypotheses = match self.policy {
            Policy::Cooperative => vec![Hypothesis {
                label: COOPERATIVE_LABEL.into(),
                description: "the plan everyone converges on".into(),
            }],
            Policy::Adversarial => vec![Hypothesis {
                label: Self::own_label(seat),
                description: format!("seat {seat} will not move from this"),
            }],
            Policy::SpawnHappy | Policy::Random => {
                let n = self.rng.gen_range(1..=2);
                (0..n)
                    .map(|_| {
                        let l = LABELS[self.rng.gen_range(0..LABELS.len())];
                        // vary case and spacing so canonicalization has work to do
                        let label = if self.rng.gen_bool(0.3) {
                            l.to_uppercase().replace(' ', "  ")
                        } else {
                            l.to_owned()
                        };
                        Hypothesis {
                            label,
                            description: String::new(),
                        }
                    })
                    .collect()
            }
        };
        Ok(Proposal {
            author: req.session.me().id.clone(),
            framing: format!("{} frames: {}", req.session.me().id, req.session.problem),
            hypotheses,
            concerns: if self.rng.gen_bool(0.3) {
                vec!["cost may be underestimated".into()]
            } else {
                Vec::new()
            },
            confidence: self.rng.gen_range(0.3..=0.9),
            suggested_criteria: Vec::new(),
        })
    }

    fn contribute(&mut self, req: &RoundRequest) -> Result<RoundOutput, DelegateError> {
        let mut out = RoundOutput::default();
        let seat = req.session.seat;
        match self.policy {
            Policy::Cooperative => {
                if let Some(o) = req.option_by_label(COOPERATIVE_LABEL) {
                    out.contributions.push(ChallengeContribution {
                        author: req.session.me().id.clone(),
                        option_id: o.option_id,
                        kind: ContributionKind::Support,
                        content: "agreed".into(),
                        fatal: false,
                        linked_evidence: None,
                        proposed_new_hypothesis: None,
                        move_id: None,
                    });
                }
            }
            Policy::Adversarial => {
                let own = Self::own_label(seat);
                for o in req.options.iter().filter(|o| !o.answers_to(&own)) {
                    out.contributions.push(ChallengeContribution {
                        author: req.session.me().id.clone(),
                        option_id: o.option_id,
                        kind: ContributionKind::Challenge,
                        content: format!("{} is unacceptable", o.label),
                        fatal: true,
                        linked_evidence: None,
                        proposed_new_hypothesis: None,
                        move_id: None,
                    });
                }
            }
            Policy::SpawnHappy => {
                if req.session.depth < 2 {
                    out.moves.push(self.spawn_move(req));
                }
            }
            Policy::Random => {
                if !req.options.is_empty() {
                    let n = self.rng.gen_range(0..=2);
                    for _ in 0..n {
                        let o = &req.options[self.rng.gen_range(0..req.options.len())];
                        let kinds = [
                            ContributionKind::Support,
                            ContributionKind::Challenge,
                            ContributionKind::Evidence,
                            ContributionKind::Counterexample,
                            ContributionKind::RevisionSuggestion,
                            ContributionKind::UncertaintyNote,
                        ];
                        let kind = kinds[self.rng.gen_range(0..kinds.len())];
                        let fatal = kind == ContributionKind::Challenge && self.rng.gen_bool(0.3);
                        let proposed_new_hypothesis = self.rng.gen_bool(0.15).then(|| NewHypothesis {
                            label: LABELS[self.rng.gen_range(0..LABELS.len())].into(),
                            description: String::new(),
                            evidence_link: "observed in a pilot".into(),
                        });
                        out.contributions.push(ChallengeContribution {
                            author: req.session.me().id.clone(),
                            option_id: o.option_id,
                            kind,
                            content: format!("{kind:?} on {}", o.label),
                            fatal,
                            linked_evidence: None,
                            proposed_new_hypothesis,
                            move_id: None,
                        });
                    }
                }
                let m = self.rng.gen_range(0..=2);
                for k in 0..m {
                    let doc = self.random_move(req, k);
                    out.moves.push(doc);
                }
            }
        }
        Ok(out)
    }

    fn score(&mut self, req: &ScoreRequest) -> Result<ScoreSheet, DelegateError> {
        let seat = req.session.seat;
        let mut scores = BTreeMap::new();
        let (confidence, evidence_strength) = match self.policy {
            Policy::Cooperative | Policy::Adversarial => (1.0, 1.0),
            _ => (self.rng.gen_range(0.0..=1.0), self.rng.gen_range(0.0..=1.0)),
        };
        for o in &req.finalists {
            let row = req
                .criteria
                .iter()
                .map(|c| {
                    let s = match self.policy {
                        Policy::Cooperative => {
                            if o.answers_to(COOPERATIVE_LABEL) { 9.0 } else { 3.0 }
                        }
                        Policy::Adversarial => {
                            if o.answers_to(&Self::own_label(seat)) { 9.0 } else { 1.0 }
                        }
                        _ => f64::from(self.rng.gen_range(0..=10u8)),
                    };
                    (c.id.clone(), s)
                })
                .collect();
            scores.insert(o.option_id, row);
        }
        let top_choice = ScoreSheet::derive_top_choice(&scores, &req.criteria)
            .ok_or(DelegateError::ScenarioExhausted)?;
        Ok(ScoreSheet {
            delegate: req.session.me().id.clone(),
            scores,
            confidence,
            evidence_strength,
            rationale: BTreeMap::new(),
            top_choice,
        })
    }

    fn integrator_pick(&mut self, req: &PickRequest) -> Result<OptionId, DelegateError> {
        if req.top_two.is_empty() {
            return Err(DelegateError::ScenarioExhausted);
        }
        let i = self.rng.gen_range(0..req.top_two.len());
        Ok(req.top_two[i].option_id)
    }
}
