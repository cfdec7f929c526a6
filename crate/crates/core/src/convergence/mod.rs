//! Convergent flow, stages 1–7: hypothesis pooling, clustering into
//! candidate options, bounded admission, compression, weighted scoring, the
//! three convergence tests and the forced-decision cascade.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delegate::ScoreSheet;
use crate::ids::{DelegateId, MoveId, OptionId};
use crate::session::{Criterion, DomainFit, FallbackRule};

pub mod runner;

pub use runner::{RETRY_BOUND, SessionOutcome, run_session, run_session_logged};

/// Clustering key: lowercase with whitespace runs collapsed to one space.
pub fn canonical_key(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub author: DelegateId,
    pub label: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence_link: Option<String>,
    /// The propose move that put this hypothesis on the table.
    pub move_id: MoveId,
    pub round: u32,
}

/// Raw stage-1 hypotheses in authorship order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HypothesisPool {
    pub entries: Vec<PoolEntry>,
}

impl HypothesisPool {
    pub fn push(&mut self, entry: PoolEntry) {
        self.entries.push(entry);
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attributed {
    pub author: DelegateId,
    pub round: u32,
    pub text: String,
    pub move_id: MoveId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objection {
    pub id: MoveId,
    pub author: DelegateId,
    pub round: u32,
    pub content: String,
    pub fatal: bool,
    pub withdrawn: bool,
}

impl Objection {
    pub fn is_blocking(&self) -> bool {
        self.fatal && !self.withdrawn
    }
}

/// Stage-3 record for one option.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OptionRecord {
    pub pros: Vec<Attributed>,
    pub cons: Vec<Attributed>,
    pub assumptions: Vec<Attributed>,
    pub evidence: Vec<Attributed>,
    pub risks: Vec<Attributed>,
    pub revisions: Vec<Attributed>,
    pub objections: Vec<Objection>,
}

impl OptionRecord {
    pub fn supports(&self) -> usize {
        self.pros.len()
    }

    pub fn blocking_objections(&self) -> usize {
        self.objections.iter().filter(|o| o.is_blocking()).count()
    }

    pub fn standing_objections(&self) -> impl Iterator<Item = &Objection> {
        self.objections.iter().filter(|o| !o.withdrawn)
    }

    fn absorb(&mut self, other: OptionRecord) {
        self.pros.extend(other.pros);
        self.cons.extend(other.cons);
        self.assumptions.extend(other.assumptions);
        self.evidence.extend(other.evidence);
        self.risks.extend(other.risks);
        self.revisions.extend(other.revisions);
        self.objections.extend(other.objections);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateOption {
    pub option_id: OptionId,
    pub canonical_label: String,
    /// Keys of variants merged into this option.
    pub aliases: Vec<String>,
    pub members: Vec<PoolEntry>,
    pub record: OptionRecord,
}

impl CandidateOption {
    pub fn anchor(&self) -> &MoveId {
        &self.members[0].move_id
    }

    pub fn description(&self) -> &str {
        &self.members[0].description
    }

    pub fn answers_to(&self, key: &str) -> bool {
        self.canonical_label == key || self.aliases.iter().any(|a| a == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum ConvergenceError {
    #[error("hypothesis pool is empty")]
    EmptyPool,
    #[error("score table is incomplete for {0}")]
    IncompleteTable(OptionId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedCluster {
    pub label: String,
    pub members: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub options: Vec<CandidateOption>,
    pub dropped: Vec<DroppedCluster>,
}

/// Groups the pool by canonical key. When more than `k_max` clusters form,
/// the largest survive, ties going to the earliest-authored cluster. Option
/// ids follow first appearance.
pub fn canonicalize_and_cluster(
    pool: &HypothesisPool,
    k_max: usize,
) -> Result<Clustering, ConvergenceError> {
    if pool.is_empty() {
        return Err(ConvergenceError::EmptyPool);
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<PoolEntry>> = BTreeMap::new();
    for e in &pool.entries {
        let key = canonical_key(&e.label);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(e.clone());
    }
    let mut ranked: Vec<(usize, &String)> = order.iter().enumerate().collect();
    ranked.sort_by(|(ia, a), (ib, b)| groups[*b].len().cmp(&groups[*a].len()).then(ia.cmp(ib)));
    let keep: BTreeSet<&String> = ranked.iter().take(k_max).map(|(_, k)| *k).collect();

    let mut options = Vec::new();
    let mut dropped = Vec::new();
    for key in &order {
        let members = groups[key].clone();
        if keep.contains(key) {
            options.push(CandidateOption {
                option_id: OptionId(options.len() as u32 + 1),
                canonical_label: key.clone(),
                aliases: Vec::new(),
                members,
                record: OptionRecord::default(),
            });
        } else {
            dropped.push(DroppedCluster {
                label: key.clone(),
                members: members.len(),
            });
        }
    }
    Ok(Clustering { options, dropped })
}

/// A hypothesis put forward during stage 3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissionRequest {
    pub entry: PoolEntry,
    /// The existing option the author claims to beat.
    pub claimed_superior_to: OptionId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissionRefusal {
    Cutoff,
    NotDistinct,
    NoEvidenceLink,
    UnknownRival,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "detail", rename_all = "snake_case")]
pub enum AdmissionOutcome {
    Admitted(OptionId),
    Refused(AdmissionRefusal),
}

/// Admits stage-3 hypotheses that arrive before the cutoff round, are
/// distinct from every existing option, carry an evidence link and name an
/// existing rival, as long as there is room under `k_max`. `next_id` is the
/// session's option-id counter.
pub fn admit_new_hypotheses(
    options: &[CandidateOption],
    requests: &[AdmissionRequest],
    round: u32,
    max_rounds: u32,
    k_max: usize,
    next_id: &mut u32,
) -> (Vec<CandidateOption>, Vec<AdmissionOutcome>) {
    let mut out = options.to_vec();
    let outcomes = requests
        .iter()
        .map(|req| {
            use AdmissionRefusal::*;
            let key = canonical_key(&req.entry.label);
            let refusal = if round >= max_rounds {
                Some(Cutoff)
            } else if out.iter().any(|o| o.answers_to(&key)) {
                Some(NotDistinct)
            } else if req
                .entry
                .evidence_link
                .as_deref()
                .is_none_or(|l| l.trim().is_empty())
            {
                Some(NoEvidenceLink)
            } else if !options.iter().any(|o| o.option_id == req.claimed_superior_to) {
                Some(UnknownRival)
            } else if out.len() >= k_max {
                Some(Full)
            } else {
                None
            };
            match refusal {
                Some(r) => AdmissionOutcome::Refused(r),
                None => {
                    let id = OptionId(*next_id);
                    *next_id += 1;
                    out.push(CandidateOption {
                        option_id: id,
                        canonical_label: key,
                        aliases: Vec::new(),
                        members: vec![req.entry.clone()],
                        record: OptionRecord::default(),
                    });
                    AdmissionOutcome::Admitted(id)
                }
            }
        })
        .collect();
    (out, outcomes)
}

/// True when `a` strictly dominates `b`: at least as many supports, no more
/// blocking objections, at least as much evidence, strictly better on one of
/// those, and `b` is nobody's top preference.
pub fn dominates(a: &CandidateOption, b: &CandidateOption, preferred: &BTreeSet<OptionId>) -> bool {
    if preferred.contains(&b.option_id) {
        return false;
    }
    let (ra, rb) = (&a.record, &b.record);
    let ge = ra.supports() >= rb.supports()
        && ra.blocking_objections() <= rb.blocking_objections()
        && ra.evidence.len() >= rb.evidence.len();
    let strict = ra.supports() > rb.supports()
        || ra.blocking_objections() < rb.blocking_objections()
        || ra.evidence.len() > rb.evidence.len();
    ge && strict
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub option_id: OptionId,
    pub dominated_by: OptionId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub kept: OptionId,
    pub absorbed: OptionId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compression {
    pub options: Vec<CandidateOption>,
    pub removed: Vec<Removal>,
    pub merged: Vec<Merge>,
    /// Sorted by option id.
    pub finalists: Vec<OptionId>,
}

/// Stage 4. Drops strictly dominated options, merges variants declared
/// compatible by bridge moves (the lower id absorbs the higher), then picks
/// the `m` options with the most supports, ties to the lowest id.
pub fn revise_and_compress(
    options: &[CandidateOption],
    bridges: &[(String, String)],
    preferred: &BTreeSet<OptionId>,
    m: usize,
) -> Compression {
    let mut removed = Vec::new();
    for b in options {
        if let Some(a) = options
            .iter()
            .find(|a| a.option_id != b.option_id && dominates(a, b, preferred))
        {
            removed.push(Removal {
                option_id: b.option_id,
                dominated_by: a.option_id,
            });
        }
    }
    let gone: BTreeSet<_> = removed.iter().map(|r| r.option_id).collect();
    let mut kept: Vec<CandidateOption> = options
        .iter()
        .filter(|o| !gone.contains(&o.option_id))
        .cloned()
        .collect();

    let mut merged = Vec::new();
    for (x, y) in bridges {
        let (kx, ky) = (canonical_key(x), canonical_key(y));
        let ix = kept.iter().position(|o| o.answers_to(&kx));
        let iy = kept.iter().position(|o| o.answers_to(&ky));
        let (Some(ix), Some(iy)) = (ix, iy) else { continue };
        if ix == iy {
            continue;
        }
        let (lo, hi) = if kept[ix].option_id < kept[iy].option_id {
            (ix, iy)
        } else {
            (iy, ix)
        };
        let absorbed = kept[hi].clone();
        let target = &mut kept[lo];
        target.aliases.push(absorbed.canonical_label);
        target.aliases.extend(absorbed.aliases);
        target.members.extend(absorbed.members);
        target.record.absorb(absorbed.record);
        merged.push(Merge {
            kept: target.option_id,
            absorbed: absorbed.option_id,
        });
        kept.remove(hi);
    }

    let mut by_support: Vec<&CandidateOption> = kept.iter().collect();
    by_support.sort_by(|a, b| {
        b.record
            .supports()
            .cmp(&a.record.supports())
            .then(a.option_id.cmp(&b.option_id))
    });
    let mut finalists: Vec<OptionId> = by_support.iter().take(m.max(1)).map(|o| o.option_id).collect();
    finalists.sort();
    Compression {
        options: kept,
        removed,
        merged,
        finalists,
    }
}

/// One delegate's row of the score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub delegate: DelegateId,
    pub confidence: f64,
    pub evidence_strength: f64,
    /// Domain fit per criterion, in criteria order.
    pub fit: Vec<f64>,
    /// Raw scores per option, in criteria order.
    pub scores: BTreeMap<OptionId, Vec<f64>>,
}

/// Everything the weighted total needs: raw scores, confidence, evidence
/// strength and domain fit per delegate, and the criterion weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub criteria: Vec<Criterion>,
    pub options: Vec<OptionId>,
    pub rows: Vec<ScoreRow>,
    /// Normalization uses the full council size, even if a row was excluded.
    pub council_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub total: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub option_id: OptionId,
    pub total: f64,
    pub normalized: f64,
}

impl ScoreTable {
    /// Builds the table from accepted sheets. `seats` gives each sheet's
    /// council index, used to look up domain fit.
    pub fn from_sheets(
        criteria: &[Criterion],
        finalists: &[OptionId],
        sheets: &[(usize, ScoreSheet)],
        fit: &DomainFit,
        council_size: usize,
    ) -> Self {
        let rows = sheets
            .iter()
            .map(|(seat, sheet)| ScoreRow {
                delegate: sheet.delegate.clone(),
                confidence: sheet.confidence,
                evidence_strength: sheet.evidence_strength,
                fit: (0..criteria.len()).map(|c| fit.factor(*seat, c)).collect(),
                scores: finalists
                    .iter()
                    .filter_map(|o| {
                        let row = sheet.scores.get(o)?;
                        let v = criteria
                            .iter()
                            .map(|c| row.get(&c.id).copied())
                            .collect::<Option<Vec<_>>>()?;
                        Some((*o, v))
                    })
                    .collect(),
            })
            .collect();
        Self {
            criteria: criteria.to_vec(),
            options: finalists.to_vec(),
            rows,
            council_size,
        }
    }

    fn check(&self, o: OptionId) -> Result<(), ConvergenceError> {
        let complete = self.options.contains(&o)
            && self
                .rows
                .iter()
                .all(|r| r.scores.get(&o).is_some_and(|v| v.len() == self.criteria.len()));
        if complete {
            Ok(())
        } else {
            Err(ConvergenceError::IncompleteTable(o))
        }
    }

    /// Σ_d s·c·e·φ for one option and criterion index.
    pub fn agg(&self, o: OptionId, c: usize) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let s = r.scores.get(&o).map_or(0.0, |v| v[c]);
                s * r.confidence * r.evidence_strength * r.fit[c]
            })
            .sum()
    }

    fn scale(&self) -> f64 {
        10.0 * self.council_size as f64
    }

    pub fn total_score(&self, o: OptionId) -> Result<Score, ConvergenceError> {
        self.check(o)?;
        let total: f64 = self
            .criteria
            .iter()
            .enumerate()
            .map(|(c, crit)| crit.weight * self.agg(o, c))
            .sum();
        let normalized = if self.council_size == 0 {
            0.0
        } else {
            total / self.scale()
        };
        Ok(Score { total, normalized })
    }

    /// Finalists by normalized total, descending; ties to the lowest id.
    pub fn ranking(&self) -> Result<Vec<RankEntry>, ConvergenceError> {
        let mut out = self
            .options
            .iter()
            .map(|o| {
                self.total_score(*o).map(|s| RankEntry {
                    option_id: *o,
                    total: s.total,
                    normalized: s.normalized,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_by(|a, b| {
            b.normalized
                .total_cmp(&a.normalized)
                .then(a.option_id.cmp(&b.option_id))
        });
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    ScoreDominance,
    MajorityBacking,
    NoBlockingObjection,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub kind: VerdictKind,
    pub winner: Option<OptionId>,
}

impl ConvergenceVerdict {
    pub fn none() -> Self {
        Self {
            kind: VerdictKind::None,
            winner: None,
        }
    }

    pub fn converged(&self) -> bool {
        self.kind != VerdictKind::None
    }
}

/// Stage 6. Score dominance, then majority backing of the leader, then
/// absence of blocking objections across all finalists, in that order.
pub fn test_convergence(
    ranking: &[RankEntry],
    finalists: &[CandidateOption],
    margin: f64,
    majority_threshold: f64,
    sheets: &[ScoreSheet],
    council_size: usize,
) -> ConvergenceVerdict {
    let Some(top) = ranking.first() else {
        return ConvergenceVerdict::none();
    };
    let hit = |kind| ConvergenceVerdict {
        kind,
        winner: Some(top.option_id),
    };
    let dominant = match ranking.get(1) {
        None => true,
        Some(second) => top.normalized - second.normalized > margin,
    };
    if dominant {
        return hit(VerdictKind::ScoreDominance);
    }
    if council_size > 0 {
        let backers = sheets.iter().filter(|s| s.top_choice == top.option_id).count();
        if backers as f64 / council_size as f64 > majority_threshold {
            return hit(VerdictKind::MajorityBacking);
        }
    }
    if finalists.iter().all(|f| f.record.blocking_objections() == 0) {
        return hit(VerdictKind::NoBlockingObjection);
    }
    ConvergenceVerdict::none()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FallbackMethod {
    Outranking,
    MinimaxRegret,
    RobustSatisficing,
    Integrator,
}

impl FallbackMethod {
    fn level(self) -> u8 {
        match self {
            FallbackMethod::Outranking => 1,
            FallbackMethod::MinimaxRegret => 2,
            FallbackMethod::RobustSatisficing => 3,
            FallbackMethod::Integrator => 4,
        }
    }
}

impl From<FallbackRule> for FallbackMethod {
    fn from(r: FallbackRule) -> Self {
        match r {
            FallbackRule::Outranking => FallbackMethod::Outranking,
            FallbackRule::MinimaxRegret => FallbackMethod::MinimaxRegret,
            FallbackRule::RobustSatisficing => FallbackMethod::RobustSatisficing,
            FallbackRule::Integrator => FallbackMethod::Integrator,
        }
    }
}

/// Whether `a` beats `b` on the sign-weighted criterion comparison.
pub fn outranks(table: &ScoreTable, a: OptionId, b: OptionId) -> bool {
    let s: f64 = table
        .criteria
        .iter()
        .enumerate()
        .map(|(c, crit)| {
            let d = table.agg(a, c) - table.agg(b, c);
            let sign = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            crit.weight * sign
        })
        .sum();
    s > 0.0
}

fn arg_best<F: Fn(OptionId) -> f64>(candidates: &[OptionId], key: F, maximize: bool) -> Vec<OptionId> {
    let vals: Vec<(OptionId, f64)> = candidates.iter().map(|o| (*o, key(*o))).collect();
    let best = vals
        .iter()
        .map(|(_, v)| *v)
        .fold(None, |acc: Option<f64>, v| match acc {
            None => Some(v),
            Some(b) if (maximize && v > b) || (!maximize && v < b) => Some(v),
            keep => keep,
        });
    match best {
        None => Vec::new(),
        Some(b) => vals.into_iter().filter(|(_, v)| *v == b).map(|(o, _)| o).collect(),
    }
}

/// Copeland count over the candidates: the options with the most pairwise wins.
pub fn outranking(table: &ScoreTable, candidates: &[OptionId]) -> Vec<OptionId> {
    arg_best(
        candidates,
        |a| {
            candidates
                .iter()
                .filter(|b| **b != a && outranks(table, a, **b))
                .count() as f64
        },
        true,
    )
}

/// Options whose worst weighted shortfall against the best finalist on any
/// criterion is smallest. The best is taken over `reference`.
pub fn minimax_regret(table: &ScoreTable, candidates: &[OptionId], reference: &[OptionId]) -> Vec<OptionId> {
    let best: Vec<f64> = (0..table.criteria.len())
        .map(|c| {
            reference
                .iter()
                .map(|o| table.agg(*o, c))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    arg_best(
        candidates,
        |o| {
            table
                .criteria
                .iter()
                .enumerate()
                .map(|(c, crit)| crit.weight * (best[c] - table.agg(o, c)))
                .fold(f64::NEG_INFINITY, f64::max)
        },
        false,
    )
}

/// Options whose weakest normalized criterion aggregate is highest.
pub fn robust_satisficing(table: &ScoreTable, candidates: &[OptionId]) -> Vec<OptionId> {
    let scale = (10 * table.council_size.max(1)) as f64;
    arg_best(
        candidates,
        |o| {
            (0..table.criteria.len())
                .map(|c| table.agg(o, c) / scale)
                .fold(f64::INFINITY, f64::min)
        },
        true,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackStep {
    pub method: FallbackMethod,
    pub survivors: Vec<OptionId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackOutcome {
    pub winner: OptionId,
    pub method: FallbackMethod,
    pub trail: Vec<FallbackStep>,
}

/// Stage 7. Runs the cascade from `start`; every level narrows the tied set
/// and the first unique survivor wins. The last level hands the top two (by
/// ranking) to `integrator_pick`; an absent or invalid pick goes to the
/// higher-ranked of the two.
pub fn fallback_select(
    table: &ScoreTable,
    ranking: &[RankEntry],
    start: FallbackRule,
    integrator_pick: &mut dyn FnMut(&[OptionId]) -> Option<OptionId>,
) -> FallbackOutcome {
    let all: Vec<OptionId> = ranking.iter().map(|r| r.option_id).collect();
    let mut candidates = all.clone();
    let mut trail = Vec::new();
    let first = FallbackMethod::from(start).level();
    let levels = [
        FallbackMethod::Outranking,
        FallbackMethod::MinimaxRegret,
        FallbackMethod::RobustSatisficing,
    ];
    for method in levels.into_iter().filter(|m| m.level() >= first) {
        let survivors = match method {
            FallbackMethod::Outranking => outranking(table, &candidates),
            FallbackMethod::MinimaxRegret => minimax_regret(table, &candidates, &all),
            _ => robust_satisficing(table, &candidates),
        };
        trail.push(FallbackStep {
            method,
            survivors: survivors.clone(),
        });
        if let [winner] = survivors[..] {
            return FallbackOutcome {
                winner,
                method,
                trail,
            };
        }
        candidates = survivors;
    }
    // ranking order restricted to the survivors
    let top_two: Vec<OptionId> = all
        .iter()
        .filter(|o| candidates.contains(o))
        .take(2)
        .copied()
        .collect();
    let winner = match integrator_pick(&top_two) {
        Some(p) if top_two.contains(&p) => p,
        _ => top_two[0],
    };
    trail.push(FallbackStep {
        method: FallbackMethod::Integrator,
        survivors: vec![winner],
    });
    FallbackOutcome {
        winner,
        method: FallbackMethod::Integrator,
        trail,
    }
}
