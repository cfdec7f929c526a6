//! Termination fuzzer: random envelopes, random delegate populations, and a
//! check of every run against the round bound and packet completeness.

use std::panic::{AssertUnwindSafe, catch_unwind};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convergence::{SessionOutcome, run_session_logged};
use crate::delegate::{ArchetypeKind, DelegateBox, Policy, SimulatedDelegate};
use crate::events::EventLog;
use crate::ids::DelegateId;
use crate::packet::validate_completeness;
use crate::session::{
    CouncilMember, Criterion, DomainFit, FallbackRule, SessionEnvelope, effective_bound,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// Every seat draws its policy at random.
    Mixed,
    AdversarialOnly,
    CooperativeOnly,
}

/// Inclusive ranges the random envelopes are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzParams {
    pub council: (usize, usize),
    pub criteria: (usize, usize),
    pub max_rounds: (u32, u32),
    pub max_options: (usize, usize),
    pub max_depth: (u32, u32),
    pub spawns: (u32, u32),
    pub ceiling: (u32, u32),
    pub population: Population,
}

impl Default for FuzzParams {
    fn default() -> Self {
        Self {
            council: (2, 6),
            criteria: (1, 4),
            max_rounds: (1, 4),
            max_options: (2, 6),
            max_depth: (0, 3),
            spawns: (0, 3),
            ceiling: (5, 50),
            population: Population::Mixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FuzzReport {
    pub runs: u64,
    pub terminations: u64,
    pub max_rounds_observed: u32,
    pub fallbacks: u64,
    pub fallback_rate: f64,
    pub bound_violations: u64,
    pub completeness_failures: u64,
    /// Descriptions of the first few failures.
    pub failures: Vec<String>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.terminations == self.runs && self.bound_violations == 0 && self.completeness_failures == 0
    }
}

#[derive(Debug)]
struct RunResult {
    terminated: bool,
    rounds: u32,
    fallback: bool,
    bound_violation: bool,
    incomplete: bool,
    failure: Option<String>,
}

fn pick<T: Copy + PartialOrd + rand::distributions::uniform::SampleUniform>(
    rng: &mut ChaCha8Rng,
    (lo, hi): (T, T),
) -> T {
    rng.gen_range(lo..=hi)
}

/// Draws one envelope and population. Public so a failing run can be rebuilt.
pub fn generate_run(params: &FuzzParams, rng: &mut ChaCha8Rng, index: u64) -> (SessionEnvelope, Vec<DelegateBox>) {
    let mut max_options = pick(rng, params.max_options).max(1);
    let mut finalist_count = rng.gen_range(1..=max_options);
    let mut n = pick(rng, params.council).max(2);
    let mut threshold = rng.gen_range(0.5..0.8);
    if params.population == Population::AdversarialOnly {
        // each adversary's own option must reach the finals for the standoff to hold
        max_options = max_options.max(2);
        finalist_count = finalist_count.max(2);
        n = n.min(finalist_count).max(2);
        finalist_count = finalist_count.max(n);
        max_options = max_options.max(finalist_count);
        threshold = 0.5;
    }
    let council: Vec<CouncilMember> = (0..n)
        .map(|i| CouncilMember {
            id: DelegateId::new(format!("d{i}")),
            archetype: ArchetypeKind::ALL[rng.gen_range(0..4)],
        })
        .collect();
    let criteria: Vec<Criterion> = (0..pick(rng, params.criteria).max(1))
        .map(|c| Criterion {
            id: format!("c{c}"),
            weight: rng.gen_range(0.1..3.0),
        })
        .collect();
    let rules = [
        FallbackRule::Outranking,
        FallbackRule::MinimaxRegret,
        FallbackRule::RobustSatisficing,
        FallbackRule::Integrator,
    ];
    let domain_fit = if params.population == Population::Mixed && rng.gen_bool(0.3) {
        DomainFit::PerDelegate((0..n).map(|_| rng.gen_range(0.5..1.5)).collect())
    } else {
        DomainFit::Uniform
    };
    let envelope = SessionEnvelope {
        session_id: format!("F-{index}").into(),
        problem: format!("fuzz problem {index}"),
        council,
        criteria,
        max_rounds: pick(rng, params.max_rounds).max(1),
        max_options,
        finalist_count,
        convergence_margin: rng.gen_range(0.05..0.3),
        majority_threshold: threshold,
        fallback_rule: rules[rng.gen_range(0..rules.len())],
        depth: 0,
        max_depth: pick(rng, params.max_depth),
        tree_ceiling: pick(rng, params.ceiling).max(1),
        max_spawns_per_session: pick(rng, params.spawns),
        domain_fit,
    };
    let delegates = (0..n)
        .map(|_| {
            let policy = match params.population {
                Population::Mixed => Policy::ALL[rng.gen_range(0..Policy::ALL.len())],
                Population::AdversarialOnly => Policy::Adversarial,
                Population::CooperativeOnly => Policy::Cooperative,
            };
            Box::new(SimulatedDelegate::new(policy, rng.gen())) as DelegateBox
        })
        .collect();
    (envelope, delegates)
}

fn complete_tree(o: &SessionOutcome) -> bool {
    validate_completeness(&o.packet).is_ok() && o.children.iter().all(complete_tree)
}

fn run_one(params: &FuzzParams, seed: u64, index: u64) -> RunResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let (envelope, mut delegates) = generate_run(params, &mut rng, index);
    let bound = effective_bound(&envelope);
    let result = catch_unwind(AssertUnwindSafe(|| {
        let mut log = EventLog::new();
        run_session_logged(envelope, &mut delegates, &mut log)
    }));
    match result {
        Ok(Ok(out)) => {
            let rounds = out.total_rounds();
            let bound_violation = u64::from(rounds) > bound || rounds != out.tree_rounds;
            let incomplete = !complete_tree(&out);
            let failure = (bound_violation || incomplete).then(|| {
                format!("run {index}: rounds {rounds} bound {bound} complete {}", !incomplete)
            });
            RunResult {
                terminated: true,
                rounds,
                fallback: out.packet.forced_fallback,
                bound_violation,
                incomplete,
                failure,
            }
        }
        Ok(Err(e)) => RunResult {
            terminated: false,
            rounds: 0,
            fallback: false,
            bound_violation: false,
            incomplete: true,
            failure: Some(format!("run {index}: {e}")),
        },
        Err(_) => RunResult {
            terminated: false,
            rounds: 0,
            fallback: false,
            bound_violation: false,
            incomplete: true,
            failure: Some(format!("run {index}: panicked")),
        },
    }
}

/// Runs `n_runs` sessions in parallel. The report depends only on `seed`
/// and `params`: run `i` draws from stream `i` of the seeded generator.
pub fn fuzz_termination(seed: u64, n_runs: u64, params: &FuzzParams) -> FuzzReport {
    let results: Vec<RunResult> = (0..n_runs)
        .into_par_iter()
        .map(|i| run_one(params, seed, i))
        .collect();
    let mut r = FuzzReport {
        runs: n_runs,
        ..FuzzReport::default()
    };
    for x in results {
        r.terminations += u64::from(x.terminated);
        r.max_rounds_observed = r.max_rounds_observed.max(x.rounds);
        r.fallbacks += u64::from(x.fallback);
        r.bound_violations += u64::from(x.bound_violation);
        r.completeness_failures += u64::from(x.incomplete);
        if let Some(f) = x.failure {
            if r.failures.len() < 10 {
                r.failures.push(f);
            }
        }
    }
    r.fallback_rate = if n_runs == 0 {
        0.0
    } else {
        r.fallbacks as f64 / n_runs as f64
    };
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_reproducible() {
        let p = FuzzParams::default();
        assert_eq!(fuzz_termination(3, 20, &p), fuzz_termination(3, 20, &p));
    }

    #[test]
    fn populations_set_fallback_rate() {
        let adv = FuzzParams {
            population: Population::AdversarialOnly,
            ..FuzzParams::default()
        };
        let r = fuzz_termination(1, 30, &adv);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.fallback_rate, 1.0);

        let coop = FuzzParams {
            population: Population::CooperativeOnly,
            ..FuzzParams::default()
        };
        let r = fuzz_termination(1, 30, &coop);
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.fallback_rate, 0.0);
    }
}
