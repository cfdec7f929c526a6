//! Scores three finalists, then forces a decision with each fallback rule.

use std::collections::BTreeMap;

use dci_core::convergence::{ScoreTable, fallback_select};
use dci_core::delegate::ScoreSheet;
use dci_core::session::{Criterion, DomainFit, FallbackRule};
use dci_core::{DelegateId, OptionId};

fn sheet(who: &str, rows: [[f64; 2]; 3], confidence: f64) -> ScoreSheet {
    let scores = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let per = BTreeMap::from([("cost".to_owned(), r[0]), ("risk".to_owned(), r[1])]);
            (OptionId(i as u32 + 1), per)
        })
        .collect();
    ScoreSheet {
        delegate: DelegateId::new(who),
        scores,
        confidence,
        evidence_strength: 0.8,
        rationale: BTreeMap::new(),
        top_choice: OptionId(1),
    }
}

fn main() {
    let criteria = vec![
        Criterion { id: "cost".into(), weight: 0.5 },
        Criterion { id: "risk".into(), weight: 0.5 },
    ];
    let options = [OptionId(1), OptionId(2), OptionId(3)];
    let sheets = vec![
        (0, sheet("a", [[9.0, 2.0], [6.0, 6.0], [3.0, 8.0]], 0.9)),
        (1, sheet("b", [[2.0, 9.0], [6.0, 6.0], [8.0, 3.0]], 0.9)),
        (2, sheet("c", [[5.0, 5.0], [4.0, 7.0], [7.0, 4.0]], 0.6)),
    ];
    let table = ScoreTable::from_sheets(&criteria, &options, &sheets, &DomainFit::Uniform, 3);
    let ranking = table.ranking().unwrap();
    for r in &ranking {
        println!("option {}: total {:.3}, normalized {:.3}", r.option_id, r.total, r.normalized);
    }

    for rule in [
        FallbackRule::Outranking,
        FallbackRule::MinimaxRegret,
        FallbackRule::RobustSatisficing,
        FallbackRule::Integrator,
    ] {
        let out = fallback_select(&table, &ranking, rule, &mut |two: &[OptionId]| two.last().copied());
        let trail: Vec<String> = out
            .trail
            .iter()
            .map(|s| {
                let ids: Vec<String> = s.survivors.iter().map(ToString::to_string).collect();
                format!("{:?} [{}]", s.method, ids.join(" "))
            })
            .collect();
        println!("{rule:?}: option {} by {:?} via {}", out.winner, out.method, trail.join(" -> "));
    }
}
