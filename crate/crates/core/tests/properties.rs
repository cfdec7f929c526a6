use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value, json};

use dci_core::convergence::{FallbackMethod, ScoreTable, fallback_select};
use dci_core::delegate::ScoreSheet;
use dci_core::events::EventLog;
use dci_core::grammar::{ActType, Move, MoveForce, SpeechMode, Target, parse_move};
use dci_core::harness::FuzzParams;
use dci_core::harness::fuzz::generate_run;
use dci_core::session::{
    Criterion, DomainFit, FallbackRule, Phase, effective_bound, per_depth_caps, termination_bound,
};
use dci_core::workspace::sections_for;
use dci_core::{DelegateId, MoveId, OptionId, SessionId, Workspace, run_session_logged};

fn phase() -> impl Strategy<Value = Phase> {
    prop_oneof![
        Just(Phase::Arrival),
        Just(Phase::IndependentFirstThought),
        Just(Phase::MutualEngagement),
        Just(Phase::CollectiveShaping),
        Just(Phase::Closure),
    ]
}

fn target() -> impl Strategy<Value = Target> {
    prop_oneof![
        Just(Target::Problem),
        Just(Target::Workspace),
        "[a-z]{1,3}-[0-9]{1,3}".prop_map(Target::contribution),
    ]
}

prop_compose! {
    fn a_move()(
        id in "mv-[0-9]{1,4}",
        round in 1u32..6,
        phase in phase(),
        actor in "[A-Za-z]{1,10}",
        mode in prop::sample::select(SpeechMode::ALL.to_vec()),
        act in prop::sample::select(ActType::ALL.to_vec()),
        intent in "[ -~]{0,30}",
        target in target(),
        content in "\\PC{0,60}",
        confidence in 0.0f64..=1.0,
        hard in any::<bool>(),
        meta_level in any::<bool>(),
        extra in prop::collection::btree_map("x_[a-z]{1,6}", any::<i32>(), 0..3),
    ) -> Move {
        Move {
            move_id: MoveId::new(id),
            session_id: SessionId::new("S"),
            round,
            phase,
            actor,
            mode,
            act,
            intent,
            target,
            content,
            confidence,
            move_force: if hard { MoveForce::Hard } else { MoveForce::Soft },
            meta_level,
            extra: extra.into_iter().map(|(k, v)| (k, json!(v))).collect::<Map<String, Value>>(),
        }
    }
}

proptest! {
    #[test]
    fn moves_round_trip(m in a_move()) {
        let doc = m.to_document();
        let back = parse_move(&doc).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_document(), doc);
    }

    #[test]
    fn moves_touch_only_their_sections(moves in prop::collection::vec(a_move(), 1..12)) {
        let mut ws = Workspace::new("how do we ship?");
        for m in &moves {
            let next = ws.apply_move(m);
            let changed = ws.diff_sections(&next);
            let allowed = sections_for(m.act);
            prop_assert!(changed.is_subset(&allowed), "{:?} changed {:?}", m.act, changed);
            prop_assert_eq!(next.provenance().len(), ws.provenance().len() + 1);
            ws = next;
        }
    }

    #[test]
    fn bound_grows_with_rounds(
        rounds in 1u32..10, depth in 0u32..5, spawns in 0u32..5,
    ) {
        let caps = per_depth_caps(depth, spawns);
        prop_assert_eq!(caps.len() as u32, depth + 1);
        prop_assert_eq!(caps[0], 1);
        prop_assert!(termination_bound(rounds + 1, &caps) >= termination_bound(rounds, &caps));
        prop_assert!(termination_bound(rounds, &caps) >= u64::from(rounds));
    }
}

fn fuzz_case() -> impl Strategy<Value = (u64, u64)> {
    (any::<u64>(), 0u64..64)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn sessions_stay_within_bound_and_logs_round_trip((seed, index) in fuzz_case()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let (env, mut delegates) = generate_run(&FuzzParams::default(), &mut rng, index);
        let bound = effective_bound(&env);
        prop_assert!(bound <= u64::from(env.tree_ceiling));
        let mut log = EventLog::new();
        let out = run_session_logged(env, &mut delegates, &mut log).unwrap();
        prop_assert!(u64::from(out.total_rounds()) <= bound);
        let seqs: Vec<u64> = log.events().iter().map(|e| e.seq).collect();
        prop_assert!(seqs.windows(2).all(|w| w[1] == w[0] + 1));
        let back = EventLog::from_jsonl(&log.to_jsonl()).unwrap();
        prop_assert_eq!(back.events(), log.events());
        prop_assert_eq!(back.root_packet(), Some(&out.packet));
    }
}

prop_compose! {
    fn a_table()(n_opt in 1u32..5, n_crit in 1usize..4, n_del in 1usize..5)(
        weights in prop::collection::vec(0.01f64..1.0, n_crit),
        scores in prop::collection::vec(prop::collection::vec(prop::collection::vec(0u8..=10, n_crit), n_opt as usize), n_del),
        ce in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), n_del),
        n_opt in Just(n_opt),
    ) -> (Vec<Criterion>, Vec<OptionId>, Vec<(usize, ScoreSheet)>) {
        let sum: f64 = weights.iter().sum();
        let criteria: Vec<Criterion> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| Criterion { id: format!("c{i}"), weight: w / sum })
            .collect();
        let options: Vec<OptionId> = (1..=n_opt).map(OptionId).collect();
        let sheets = scores
            .iter()
            .zip(&ce)
            .enumerate()
            .map(|(d, (rows, (c, e)))| {
                let scores: BTreeMap<OptionId, BTreeMap<String, f64>> = options
                    .iter()
                    .zip(rows)
                    .map(|(o, row)| {
                        (*o, criteria.iter().zip(row).map(|(k, s)| (k.id.clone(), f64::from(*s))).collect())
                    })
                    .collect();
                let sheet = ScoreSheet {
                    delegate: DelegateId::new(format!("d{d}")),
                    scores,
                    confidence: *c,
                    evidence_strength: *e,
                    rationale: BTreeMap::new(),
                    top_choice: options[0],
                };
                (d, sheet)
            })
            .collect();
        (criteria, options, sheets)
    }
}

proptest! {
    #[test]
    fn ranking_is_sorted_and_bounded((criteria, options, sheets) in a_table()) {
        let n = sheets.len();
        let table = ScoreTable::from_sheets(&criteria, &options, &sheets, &DomainFit::Uniform, n);
        let ranking = table.ranking().unwrap();
        prop_assert_eq!(ranking.len(), options.len());
        prop_assert!(ranking.windows(2).all(|w| w[0].normalized >= w[1].normalized));
        for r in &ranking {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&r.normalized));
        }
    }

    #[test]
    fn fallback_always_names_a_finalist(
        (criteria, options, sheets) in a_table(),
        rule in prop::sample::select(vec![
            FallbackRule::Outranking,
            FallbackRule::MinimaxRegret,
            FallbackRule::RobustSatisficing,
            FallbackRule::Integrator,
        ]),
    ) {
        let n = sheets.len();
        let table = ScoreTable::from_sheets(&criteria, &options, &sheets, &DomainFit::Uniform, n);
        let ranking = table.ranking().unwrap();
        let out = fallback_select(&table, &ranking, rule, &mut |two: &[OptionId]| two.first().copied());
        prop_assert!(options.contains(&out.winner));
        if out.method == FallbackMethod::Integrator {
            let top_two: Vec<OptionId> = ranking.iter().take(2).map(|r| r.option_id).collect();
            prop_assert!(top_two.contains(&out.winner));
        }
    }
}
