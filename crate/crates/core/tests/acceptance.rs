//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Value, json};

use dci_core::convergence::{
    AdmissionOutcome, AdmissionRequest, CandidateOption, FallbackMethod, HypothesisPool,
    Objection, OptionRecord, PoolEntry, RankEntry, ScoreTable, VerdictKind, admit_new_hypotheses,
    canonicalize_and_cluster, fallback_select, revise_and_compress, test_convergence,
};
use dci_core::delegate::{
    ArchetypeKind, ChallengeContribution, ContributionKind, Delegate, DelegateBox, DelegateError,
    Hypothesis, PickRequest, Policy, Proposal, ProposalRequest, RoundOutput, RoundRequest,
    ScoreRequest, ScoreSheet, SimulatedDelegate,
};
use dci_core::events::EventLog;
use dci_core::grammar::{MoveContext, Rejection, parse_move, validate_move};
use dci_core::harness::{FuzzParams, FuzzReport, fuzz_termination, replay, run_scenario};
use dci_core::harness::fuzz::generate_run;
use dci_core::packet::validate_completeness;
use dci_core::session::{
    CouncilMember, Criterion, DomainFit, FallbackRule, Phase, SessionEnvelope,
};
use dci_core::{DelegateId, MoveId, OptionId, SessionId, SessionOutcome, run_session_logged};

type Outcome = Result<String, String>;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn scenario_paths() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .expect("scenarios directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

// 1 -------------------------------------------------------------------------

fn termination(report: &FuzzReport, elapsed: Duration) -> Outcome {
    ensure(report.runs == 1000, format!("ran {} sessions", report.runs))?;
    ensure(
        report.terminations == report.runs,
        format!("{} of {} terminated: {:?}", report.terminations, report.runs, report.failures),
    )?;
    ensure(
        report.bound_violations == 0,
        format!("{} bound violations: {:?}", report.bound_violations, report.failures),
    )?;
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    // envelopes must vary across runs
    let params = FuzzParams::default();
    let mut saw = BTreeSet::new();
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        rng.set_stream(i);
        let (env, _) = generate_run(&params, &mut rng, i);
        saw.insert(env.council.len());
    }
    ensure(saw.len() > 1, "fuzz envelopes do not vary")?;
    Ok(format!(
        "{}/{} terminated, 0 violations, max tree rounds {}, fallback rate {:.3}, {:.1?}",
        report.terminations, report.runs, report.max_rounds_observed, report.fallback_rate, elapsed
    ))
}

// 2 -------------------------------------------------------------------------

fn all_complete(o: &SessionOutcome) -> bool {
    validate_completeness(&o.packet).is_ok() && o.children.iter().all(all_complete)
}

fn completeness(report: &FuzzReport) -> Outcome {
    ensure(
        report.completeness_failures == 0,
        format!("{} fuzzed packets incomplete", report.completeness_failures),
    )?;
    let mut n = 0;
    for p in scenario_paths() {
        let run = run_scenario(&p).map_err(|e| format!("{}: {e}", p.display()))?;
        ensure(all_complete(&run.outcome), format!("{} packet incomplete", p.display()))?;
        n += 1;
    }
    Ok(format!("{} fuzzed and {n} scenario packets complete", report.runs))
}

// 3 -------------------------------------------------------------------------

const HOLDOUT: &str = "lone holdout";

/// Backs its own option in every round and never concedes anything.
struct PermanentDissenter;

impl Delegate for PermanentDissenter {
    fn generate_proposal(&mut self, _: &ProposalRequest) -> Result<Proposal, DelegateError> {
        Ok(Proposal {
            author: DelegateId::default(),
            framing: "everyone else is wrong".into(),
            hypotheses: vec![Hypothesis {
                label: HOLDOUT.into(),
                description: "the option nobody else wants".into(),
            }],
            concerns: vec![],
            confidence: 0.95,
            suggested_criteria: vec![],
        })
    }

    fn contribute(&mut self, req: &RoundRequest) -> Result<RoundOutput, DelegateError> {
        let contributions = req
            .options
            .iter()
            .filter(|o| !o.answers_to(HOLDOUT))
            .map(|o| ChallengeContribution {
                author: DelegateId::default(),
                option_id: o.option_id,
                kind: ContributionKind::Challenge,
                content: format!("{} misses the point", o.label),
                fatal: false,
                linked_evidence: None,
                proposed_new_hypothesis: None,
                move_id: None,
            })
            .collect();
        Ok(RoundOutput { contributions, moves: vec![] })
    }

    fn score(&mut self, req: &ScoreRequest) -> Result<ScoreSheet, DelegateError> {
        let scores: BTreeMap<OptionId, BTreeMap<String, f64>> = req
            .finalists
            .iter()
            .map(|o| {
                let s = if o.answers_to(HOLDOUT) { 10.0 } else { 0.0 };
                (o.option_id, req.criteria.iter().map(|c| (c.id.clone(), s)).collect())
            })
            .collect();
        let top_choice = ScoreSheet::derive_top_choice(&scores, &req.criteria).unwrap();
        Ok(ScoreSheet {
            delegate: DelegateId::default(),
            scores,
            confidence: 0.95,
            evidence_strength: 0.9,
            rationale: BTreeMap::new(),
            top_choice,
        })
    }

    fn integrator_pick(&mut self, req: &PickRequest) -> Result<OptionId, DelegateError> {
        Ok(req.top_two[0].option_id)
    }
}

fn dissent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut present = 0;
    for i in 0..200 {
        let n = rng.gen_range(3..=6);
        let dissenter_seat = rng.gen_range(0..n);
        let council: Vec<CouncilMember> = (0..n)
            .map(|s| CouncilMember {
                id: DelegateId::new(format!("d{s}")),
                archetype: ArchetypeKind::ALL[s % 4],
            })
            .collect();
        let criteria: Vec<Criterion> = (0..rng.gen_range(1..=3))
            .map(|c| Criterion { id: format!("c{c}"), weight: rng.gen_range(0.5..2.0) })
            .collect();
        let mut env = SessionEnvelope::with_defaults(format!("DIS-{i}"), "pick a plan", council, criteria);
        env.max_rounds = rng.gen_range(1..=3);
        let mut delegates: Vec<DelegateBox> = (0..n)
            .map(|s| {
                if s == dissenter_seat {
                    Box::new(PermanentDissenter) as DelegateBox
                } else {
                    Box::new(SimulatedDelegate::new(Policy::Cooperative, rng.gen())) as DelegateBox
                }
            })
            .collect();
        let out = run_session_logged(env, &mut delegates, &mut EventLog::new())
            .map_err(|e| format!("session {i}: {e}"))?;
        let dissenter = DelegateId::new(format!("d{dissenter_seat}"));
        if out.packet.decision.label != HOLDOUT
            && out.packet.minority_report.iter().any(|m| m.delegate == dissenter)
        {
            present += 1;
        }
    }
    ensure(present == 200, format!("minority report kept the dissenter in {present}/200"))?;
    Ok("dissenter preserved in 200/200 minority reports".into())
}

// 4 -------------------------------------------------------------------------

fn pipeline() -> Outcome {
    let run = run_scenario(&scenarios_dir().join("pipeline.json")).map_err(|e| e.to_string())?;
    let p = &run.packet;
    ensure(run.passed(), format!("{:?}", run.mismatches))?;
    ensure(p.rounds == 2, format!("{} rounds", p.rounds))?;
    ensure(p.verdict == VerdictKind::ScoreDominance, format!("{:?}", p.verdict))?;
    ensure(!p.forced_fallback, "forced fallback")?;
    ensure(p.decision.label == "exactly-once processing", p.decision.label.clone())?;
    ensure(
        p.minority_report.iter().any(|m| m.preferred_label == "immutable ledger"),
        "ledger missing from minority report",
    )?;
    ensure(p.reopen_conditions.len() >= 3, format!("{} reopen conditions", p.reopen_conditions.len()))?;
    Ok(format!(
        "{} in {} rounds by {:?}, minority {}, reopen {}",
        p.decision.label,
        p.rounds,
        p.verdict,
        p.minority_report.len(),
        p.reopen_conditions.len()
    ))
}

// 5 -------------------------------------------------------------------------

struct RandomTable {
    criteria: Vec<Criterion>,
    options: Vec<OptionId>,
    sheets: Vec<(usize, ScoreSheet)>,
    fit: Vec<Vec<f64>>,
    council: usize,
}

fn random_table(rng: &mut ChaCha8Rng, coarse: bool) -> RandomTable {
    let nc = rng.gen_range(1..=5);
    let raw: Vec<f64> = (0..nc).map(|_| rng.gen_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    let criteria: Vec<Criterion> = raw
        .iter()
        .enumerate()
        .map(|(i, w)| Criterion { id: format!("c{i}"), weight: w / sum })
        .collect();
    let options: Vec<OptionId> = (1..=rng.gen_range(1..=5)).map(OptionId).collect();
    let council = rng.gen_range(2..=7);
    let scored = rng.gen_range(1..=council);
    let draw = |rng: &mut ChaCha8Rng| {
        if coarse {
            f64::from(rng.gen_range(0..=3u8) * 3)
        } else {
            rng.gen_range(0.0..=10.0)
        }
    };
    let sheets = (0..scored)
        .map(|seat| {
            let scores = options
                .iter()
                .map(|o| (*o, criteria.iter().map(|c| (c.id.clone(), draw(rng))).collect()))
                .collect();
            let (confidence, evidence_strength) = if coarse {
                (1.0, 1.0)
            } else {
                (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0))
            };
            let sheet = ScoreSheet {
                delegate: DelegateId::new(format!("d{seat}")),
                scores,
                confidence,
                evidence_strength,
                rationale: BTreeMap::new(),
                top_choice: options[0],
            };
            (seat, sheet)
        })
        .collect();
    let fit = (0..council)
        .map(|_| (0..nc).map(|_| if coarse { 1.0 } else { rng.gen_range(0.5..1.5) }).collect())
        .collect();
    RandomTable { criteria, options, sheets, fit, council }
}

fn engine_table(t: &RandomTable) -> ScoreTable {
    ScoreTable::from_sheets(
        &t.criteria,
        &t.options,
        &t.sheets,
        &DomainFit::PerDelegateCriterion(t.fit.clone()),
        t.council,
    )
}

/// Naive weighted total: delegates outer, criteria inner.
fn oracle_total(t: &RandomTable, o: OptionId) -> f64 {
    let mut total = 0.0;
    for (seat, sheet) in &t.sheets {
        for (ci, c) in t.criteria.iter().enumerate() {
            let s = sheet.scores[&o][&c.id];
            total += c.weight * s * sheet.confidence * sheet.evidence_strength * t.fit[*seat][ci];
        }
    }
    total / (10.0 * t.council as f64)
}

fn score_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let t = random_table(&mut rng, false);
        let table = engine_table(&t);
        for o in &t.options {
            let got = table.total_score(*o).map_err(|e| e.to_string())?.normalized;
            let want = oracle_total(&t, *o);
            let rel = if want == 0.0 { got.abs() } else { ((got - want) / want).abs() };
            worst = worst.max(rel);
            ensure(rel <= 1e-9, format!("table {i} option {o}: {got} vs {want}"))?;
        }
    }
    Ok(format!("1000 tables, worst relative error {worst:.2e}"))
}

// 6 -------------------------------------------------------------------------

fn fallback() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rules = [
        FallbackRule::Outranking,
        FallbackRule::MinimaxRegret,
        FallbackRule::RobustSatisficing,
        FallbackRule::Integrator,
    ];
    let mut reached_integrator = 0;
    for i in 0..1000 {
        let t = random_table(&mut rng, true);
        let table = engine_table(&t);
        let ranking = table.ranking().map_err(|e| e.to_string())?;
        let rule = rules[i % rules.len()];
        let mut pick = |two: &[OptionId]| two.last().copied();
        let a = fallback_select(&table, &ranking, rule, &mut pick);
        let b = fallback_select(&table, &ranking, rule, &mut pick);
        ensure(a == b, format!("set {i}: repeated runs differ"))?;
        ensure(
            serde_json::to_string(&a).unwrap() == serde_json::to_string(&b).unwrap(),
            format!("set {i}: serialized outcomes differ"),
        )?;
        ensure(t.options.contains(&a.winner), format!("set {i}: winner outside finalists"))?;
        ensure(
            a.trail.last().map(|s| s.survivors.len()) == Some(1),
            format!("set {i}: cascade ended without a single survivor"),
        )?;
        if a.method == FallbackMethod::Integrator {
            reached_integrator += 1;
        }
    }
    // constructed symmetric case
    let run = run_scenario(&scenarios_dir().join("symmetric.json")).map_err(|e| e.to_string())?;
    ensure(
        run.packet.fallback_method == Some(FallbackMethod::Integrator),
        format!("symmetric case ended at {:?}", run.packet.fallback_method),
    )?;
    ensure(run.passed(), format!("{:?}", run.mismatches))?;
    Ok(format!(
        "1000 sets deterministic with one winner ({reached_integrator} reached the Integrator); symmetric case picked by Integrator"
    ))
}

// 7 -------------------------------------------------------------------------

fn cutoff() -> Outcome {
    let stream = (
        1u32..=5,
        2usize..=6,
        1usize..=4,
        prop::collection::vec((0u32..8, 0usize..10, any::<bool>(), 0u32..6), 0..40),
    );
    let mut runner = TestRunner::new(Config { cases: 512, failure_persistence: None, ..Config::default() });
    let result = runner.run(&stream, |(max_rounds, k_max, initial, requests)| {
        let mut pool = HypothesisPool::default();
        for k in 0..initial {
            pool.push(PoolEntry {
                author: DelegateId::new(format!("d{k}")),
                label: format!("seed option {k}"),
                description: String::new(),
                evidence_link: None,
                move_id: MoveId::new(format!("p-{k}")),
                round: 1,
            });
        }
        let mut options = canonicalize_and_cluster(&pool, k_max).unwrap().options;
        let mut next_id = options.len() as u32 + 1;
        let mut last_len: Option<usize> = None;
        for round in 1..=max_rounds + 2 {
            let reqs: Vec<AdmissionRequest> = requests
                .iter()
                .filter(|(r, ..)| r % (max_rounds + 2) + 1 == round)
                .enumerate()
                .map(|(j, (_, label, evidence, rival))| AdmissionRequest {
                    entry: PoolEntry {
                        author: DelegateId::new("x"),
                        label: format!("late idea {label}"),
                        description: String::new(),
                        evidence_link: evidence.then(|| "benchmark".to_owned()),
                        move_id: MoveId::new(format!("h-{round}-{j}")),
                        round,
                    },
                    claimed_superior_to: OptionId(rival + 1),
                })
                .collect();
            let (after, outcomes) =
                admit_new_hypotheses(&options, &reqs, round, max_rounds, k_max, &mut next_id);
            if round >= max_rounds {
                prop_assert!(
                    !outcomes.iter().any(|o| matches!(o, AdmissionOutcome::Admitted(_))),
                    "admitted at round {round} with R_max {max_rounds}"
                );
                if let Some(prev) = last_len {
                    prop_assert!(after.len() <= prev);
                }
            }
            let compressed = revise_and_compress(&after, &[], &BTreeSet::new(), 3.min(k_max));
            if round >= max_rounds {
                prop_assert!(compressed.options.len() <= after.len());
                last_len = Some(compressed.options.len());
            }
            options = compressed.options;
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;
    Ok("512 random admission streams: nothing admitted at or after R_max, option count never grows".into())
}

// 8 -------------------------------------------------------------------------

fn reference_doc() -> Value {
    let text = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference_move.json"),
    )
    .unwrap();
    serde_json::from_str(&text).unwrap()
}

fn check_move(doc: &Value) -> Result<(), Rejection> {
    let m = parse_move(doc)?;
    let sid = SessionId::new("DCI-S-001");
    let known: BTreeSet<MoveId> = [MoveId::new("mv-031")].into();
    let none = BTreeSet::new();
    validate_move(
        &m,
        &MoveContext {
            session_id: &sid,
            round: 2,
            phase: Phase::MutualEngagement,
            known_moves: &known,
            recallable: &none,
            depth: 0,
            max_depth: 2,
        },
    )
}

fn malformed_corpus() -> Vec<(Value, &'static str)> {
    let base = reference_doc();
    let mut out = Vec::new();
    let mut with = |field: &'static str, v: Value| {
        let mut d = base.clone();
        d[field] = v;
        out.push((d, field));
    };
    for a in ["argue", "vote", "attack", "deny", "insult", "shout", "agree", "retract", "promote", "summarise"] {
        with("act", json!(a));
    }
    for m in ["sarcastic", "angry", "neutral", "formal", "casual", "emotional", "poetic", "ironic", "loud", "quiet"] {
        with("mode", json!(m));
    }
    for c in [1.01, 1.5, 2.0, 10.0, 100.0, -0.01, -0.5, -1.0, -100.0, 1.000_000_1] {
        with("confidence", json!(c));
    }
    for k in 0..10 {
        with("target", json!(format!("contribution:mv-{}", 900 + k)));
    }
    for p in [
        "arrival",
        "independent_first_thought",
        "collective_shaping",
        "closure",
        "mutual",
        "engagement",
        "phase_2",
        "MutualEngagement",
        "",
        "closing",
    ] {
        with("phase", json!(p));
    }
    out
}

fn grammar() -> Outcome {
    let corpus = malformed_corpus();
    ensure(corpus.len() == 50, format!("corpus has {} documents", corpus.len()))?;
    for (i, (doc, field)) in corpus.iter().enumerate() {
        match check_move(doc) {
            Ok(()) => return Err(format!("document {i} ({field}) accepted")),
            Err(r) => ensure(
                r.field == *field,
                format!("document {i}: expected a reason on {field}, got {} ({})", r.field, r.message),
            )?,
        }
    }
    let reference = reference_doc();
    check_move(&reference).map_err(|r| format!("reference move rejected: {r}"))?;
    let parsed = parse_move(&reference).unwrap();
    ensure(parsed.to_document() == reference, "reference move does not round-trip")?;
    ensure(
        serde_json::to_string(&parsed.to_document()).unwrap() == serde_json::to_string(&reference).unwrap(),
        "reference move bytes differ after re-serialization",
    )?;
    Ok("50/50 malformed documents rejected on the offending field; reference move round-trips exactly".into())
}

// 9 -------------------------------------------------------------------------

fn replay_fidelity() -> Outcome {
    let mut n = 0;
    for p in scenario_paths() {
        let run = run_scenario(&p).map_err(|e| format!("{}: {e}", p.display()))?;
        let log = EventLog::from_jsonl(&run.log.to_jsonl()).map_err(|e| e.to_string())?;
        let first = replay(&log).map_err(|e| format!("{}: {e}", p.display()))?;
        let second = replay(&log).map_err(|e| format!("{}: {e}", p.display()))?;
        ensure(first.packet == run.packet, format!("{}: replayed packet differs", p.display()))?;
        ensure(first.packet == second.packet, format!("{}: replays differ", p.display()))?;
        ensure(first.log == run.log, format!("{}: replayed log differs", p.display()))?;
        n += 1;
    }
    let params = FuzzParams::default();
    for i in 0..25u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        rng.set_stream(i);
        let (env, mut delegates) = generate_run(&params, &mut rng, i);
        let mut log = EventLog::new();
        let out = run_session_logged(env, &mut delegates, &mut log).map_err(|e| e.to_string())?;
        let r = replay(&EventLog::from_jsonl(&log.to_jsonl()).unwrap())
            .map_err(|e| format!("fuzz run {i}: {e}"))?;
        ensure(r.packet == out.packet, format!("fuzz run {i}: replayed packet differs"))?;
    }
    Ok(format!("{n} scenarios and 25 fuzzed sessions replay to identical packets"))
}

// 10 ------------------------------------------------------------------------

fn verdict_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let margin = 0.15;
    let threshold = 0.5;
    let mut overlaps = 0;
    let mut all_three = 0;
    for i in 0..2000 {
        let k = rng.gen_range(1..=4u32);
        let council = rng.gen_range(2..=6usize);
        let mut ranking: Vec<RankEntry> = (1..=k)
            .map(|o| {
                let v = rng.gen_range(0.0..1.0);
                RankEntry { option_id: OptionId(o), total: v, normalized: v }
            })
            .collect();
        ranking.sort_by(|a, b| b.normalized.total_cmp(&a.normalized));
        let top = ranking[0].option_id;
        let finalists: Vec<CandidateOption> = (1..=k)
            .map(|o| {
                let mut record = OptionRecord::default();
                if rng.gen_bool(0.3) {
                    record.objections.push(Objection {
                        id: MoveId::new(format!("obj-{o}")),
                        author: DelegateId::new("d0"),
                        round: 1,
                        content: "no".into(),
                        fatal: true,
                        withdrawn: rng.gen_bool(0.3),
                    });
                }
                CandidateOption {
                    option_id: OptionId(o),
                    canonical_label: format!("option {o}"),
                    aliases: vec![],
                    members: vec![],
                    record,
                }
            })
            .collect();
        let sheets: Vec<ScoreSheet> = (0..rng.gen_range(0..=council))
            .map(|d| ScoreSheet {
                delegate: DelegateId::new(format!("d{d}")),
                scores: BTreeMap::new(),
                confidence: 1.0,
                evidence_strength: 1.0,
                rationale: BTreeMap::new(),
                top_choice: if rng.gen_bool(0.6) { top } else { OptionId(rng.gen_range(1..=k)) },
            })
            .collect();

        let dom = ranking.len() == 1 || ranking[0].normalized - ranking[1].normalized > margin;
        let backers = sheets.iter().filter(|s| s.top_choice == top).count();
        let maj = backers as f64 / council as f64 > threshold;
        let clear = finalists
            .iter()
            .all(|f| f.record.objections.iter().all(|o| !o.fatal || o.withdrawn));
        let expected = if dom {
            VerdictKind::ScoreDominance
        } else if maj {
            VerdictKind::MajorityBacking
        } else if clear {
            VerdictKind::NoBlockingObjection
        } else {
            VerdictKind::None
        };
        let held = [dom, maj, clear].iter().filter(|x| **x).count();
        overlaps += usize::from(held >= 2);
        all_three += usize::from(held == 3);

        let v = test_convergence(&ranking, &finalists, margin, threshold, &sheets, council);
        ensure(v.kind == expected, format!("case {i}: got {:?}, expected {expected:?}", v.kind))?;
        let winner_ok = match expected {
            VerdictKind::None => v.winner.is_none(),
            _ => v.winner == Some(top),
        };
        ensure(winner_ok, format!("case {i}: winner {:?}", v.winner))?;
    }
    ensure(overlaps >= 200 && all_three >= 50, format!("too few overlapping cases ({overlaps}, {all_three})"))?;
    Ok(format!("2000 cases ({overlaps} with several conditions, {all_three} with all three) report the highest priority"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let report = fuzz_termination(7, 1000, &FuzzParams::default());
    let elapsed = start.elapsed();

    let results: Vec<(&str, Outcome)> = vec![
        ("termination", termination(&report, elapsed)),
        ("packet completeness", completeness(&report)),
        ("dissent preservation", dissent()),
        ("worked example", pipeline()),
        ("weighted score oracle", score_oracle()),
        ("fallback determinism", fallback()),
        ("hypothesis cutoff", cutoff()),
        ("grammar enforcement", grammar()),
        ("replay fidelity", replay_fidelity()),
        ("verdict ordering", verdict_ordering()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
