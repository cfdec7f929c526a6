//! Interaction grammar: speech modes, the fourteen epistemic acts, their
//! families, and the move document that carries one act on the wire.
//!
//! A move is parsed from a structured document whose keys are spelled
//! exactly as in [`MOVE_FIELDS`]. Parsing rejects type and vocabulary errors;
//! [`validate_move`] then checks a parsed move against the live session
//! (round, phase, resolvable targets, recursion depth). Every rejection names
//! the offending field so the delegate can be re-prompted with it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::ids::{MoveId, SessionId};
use crate::session::Phase;

/// Wire field names, in the order they are checked during parsing.
pub const MOVE_FIELDS: [&str; 13] = [
    "move_id",
    "session_id",
    "round",
    "phase",
    "actor",
    "mode",
    "act",
    "intent",
    "target",
    "content",
    "confidence",
    "move_force",
    "meta_level",
];

/// Layer 1: the stance of a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeechMode {
    Exploratory,
    Analytical,
    Critical,
    Integrative,
    Reflective,
    Decisional,
}

impl SpeechMode {
    pub const ALL: [SpeechMode; 6] = [
        SpeechMode::Exploratory,
        SpeechMode::Analytical,
        SpeechMode::Critical,
        SpeechMode::Integrative,
        SpeechMode::Reflective,
        SpeechMode::Decisional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SpeechMode::Exploratory => "exploratory",
            SpeechMode::Analytical => "analytical",
            SpeechMode::Critical => "critical",
            SpeechMode::Integrative => "integrative",
            SpeechMode::Reflective => "reflective",
            SpeechMode::Decisional => "decisional",
        }
    }
}

impl FromStr for SpeechMode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SpeechMode::ALL.into_iter().find(|m| m.as_str() == s).ok_or(())
    }
}

/// Act families. Each family serves one cognitive function in deliberation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    Orienting,
    Generative,
    Critical,
    Integrative,
    Epistemic,
    Decisional,
}

/// Layer 2: the core interaction act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActType {
    Frame,
    Propose,
    Clarify,
    Ask,
    Challenge,
    Extend,
    Reframe,
    Bridge,
    Synthesize,
    Ground,
    Update,
    Recommend,
    Spawn,
    Recall,
}

impl ActType {
    pub const ALL: [ActType; 14] = [
        ActType::Frame,
        ActType::Propose,
        ActType::Clarify,
        ActType::Ask,
        ActType::Challenge,
        ActType::Extend,
        ActType::Reframe,
        ActType::Bridge,
        ActType::Synthesize,
        ActType::Ground,
        ActType::Update,
        ActType::Recommend,
        ActType::Spawn,
        ActType::Recall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActType::Frame => "frame",
            ActType::Propose => "propose",
            ActType::Clarify => "clarify",
            ActType::Ask => "ask",
            ActType::Challenge => "challenge",
            ActType::Extend => "extend",
            ActType::Reframe => "reframe",
            ActType::Bridge => "bridge",
            ActType::Synthesize => "synthesize",
            ActType::Ground => "ground",
            ActType::Update => "update",
            ActType::Recommend => "recommend",
            ActType::Spawn => "spawn",
            ActType::Recall => "recall",
        }
    }

    pub fn family(self) -> Family {
        act_family(self)
    }
}

impl FromStr for ActType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActType::ALL.into_iter().find(|a| a.as_str() == s).ok_or(())
    }
}

impl fmt::Display for ActType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Family of an act. Total over the fourteen acts.
pub fn act_family(act: ActType) -> Family {
    use ActType::*;
    match act {
        Frame | Clarify | Reframe => Family::Orienting,
        Propose | Extend | Spawn => Family::Generative,
        Ask | Challenge => Family::Critical,
        Bridge | Synthesize | Recall => Family::Integrative,
        Ground | Update => Family::Epistemic,
        Recommend => Family::Decisional,
    }
}

/// Speech mode a move takes when its author does not choose one.
pub fn default_mode(act: ActType) -> SpeechMode {
    match act_family(act) {
        Family::Orienting => SpeechMode::Analytical,
        Family::Generative => SpeechMode::Exploratory,
        Family::Critical => SpeechMode::Critical,
        Family::Integrative => SpeechMode::Integrative,
        Family::Epistemic => SpeechMode::Reflective,
        Family::Decisional => SpeechMode::Decisional,
    }
}

/// Responses an act invites from the delegates it targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseKind {
    Defend,
    Refine,
    Update,
    Concede,
    Affirm,
    Sharpen,
    SurfaceOmission,
    Recommend,
}

/// Response grammar. Only `challenge` and `synthesize` carry one; every
/// other act invites no particular response.
pub fn expected_responses(act: ActType) -> BTreeSet<ResponseKind> {
    use ResponseKind::*;
    match act {
        ActType::Challenge => [Defend, Refine, Update, Concede].into_iter().collect(),
        ActType::Synthesize => [Affirm, Sharpen, SurfaceOmission, Recommend]
            .into_iter()
            .collect(),
        _ => BTreeSet::new(),
    }
}

/// Soft moves are tentative, hard moves committal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveForce {
    Soft,
    Hard,
}

impl FromStr for MoveForce {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "soft" => Ok(MoveForce::Soft),
            "hard" => Ok(MoveForce::Hard),
            _ => Err(()),
        }
    }
}

/// What a move is aimed at.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Problem,
    Workspace,
    Contribution(MoveId),
}

impl Target {
    pub fn contribution(id: impl Into<String>) -> Self {
        Target::Contribution(MoveId::new(id))
    }

    pub fn move_id(&self) -> Option<&MoveId> {
        match self {
            Target::Contribution(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Problem => f.write_str("problem"),
            Target::Workspace => f.write_str("workspace"),
            Target::Contribution(id) => write!(f, "contribution:{id}"),
        }
    }
}

impl FromStr for Target {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "problem" => Ok(Target::Problem),
            "workspace" => Ok(Target::Workspace),
            _ => match s.strip_prefix("contribution:") {
                Some(id) if !id.trim().is_empty() => Ok(Target::contribution(id)),
                _ => Err(()),
            },
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse()
            .map_err(|_| serde::de::Error::custom(format!("invalid target: {s}")))
    }
}

/// One typed epistemic act.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub move_id: MoveId,
    pub session_id: SessionId,
    pub round: u32,
    pub phase: Phase,
    pub actor: String,
    pub mode: SpeechMode,
    pub act: ActType,
    pub intent: String,
    pub target: Target,
    pub content: String,
    pub confidence: f64,
    pub move_force: MoveForce,
    pub meta_level: bool,
    /// Keys outside the known field set, carried through untouched.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Move {
    pub fn family(&self) -> Family {
        act_family(self.act)
    }

    /// Serializes back to the wire document.
    pub fn to_document(&self) -> Value {
        serde_json::to_value(self).expect("move serialization is infallible")
    }

    /// Option labels this move declares compatible (bridge moves only).
    pub fn bridged_labels(&self) -> Option<(String, String)> {
        if self.act != ActType::Bridge {
            return None;
        }
        let arr = self.extra.get("bridges")?.as_array()?;
        match arr.as_slice() {
            [Value::String(a), Value::String(b)] => Some((a.clone(), b.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum ParseError {
    #[error("move document is not an object")]
    NotAnObject,
    #[error("missing field `{field}`")]
    MissingField { field: String },
    #[error("field `{field}` must be {expected}")]
    InvalidType { field: String, expected: String },
    #[error("field `{field}` has invalid value `{value}`")]
    InvalidValue { field: String, value: String },
    #[error("unknown act `{value}` in field `act`")]
    UnknownAct { value: String },
    #[error("unknown speech mode `{value}` in field `mode`")]
    UnknownMode { value: String },
    #[error("confidence {value} outside [0, 1]")]
    OutOfRangeConfidence { value: f64 },
}

impl ParseError {
    /// The field the error is about, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            ParseError::NotAnObject => None,
            ParseError::MissingField { field }
            | ParseError::InvalidType { field, .. }
            | ParseError::InvalidValue { field, .. } => Some(field),
            ParseError::UnknownAct { .. } => Some("act"),
            ParseError::UnknownMode { .. } => Some("mode"),
            ParseError::OutOfRangeConfidence { .. } => Some("confidence"),
        }
    }
}

fn get<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<&'a Value, ParseError> {
    obj.get(field).ok_or_else(|| ParseError::MissingField {
        field: field.to_owned(),
    })
}

fn get_str<'a>(obj: &'a Map<String, Value>, field: &str) -> Result<&'a str, ParseError> {
    get(obj, field)?
        .as_str()
        .ok_or_else(|| ParseError::InvalidType {
            field: field.to_owned(),
            expected: "a string".into(),
        })
}

fn invalid_value(field: &str, value: &str) -> ParseError {
    ParseError::InvalidValue {
        field: field.to_owned(),
        value: value.to_owned(),
    }
}

/// Parses a move document. Fields are checked in wire order and the first
/// offending one is reported.
pub fn parse_move(raw: &Value) -> Result<Move, ParseError> {
    let obj = raw.as_object().ok_or(ParseError::NotAnObject)?;

    let move_id = MoveId::new(get_str(obj, "move_id")?);
    let session_id = SessionId::new(get_str(obj, "session_id")?);
    let round = get(obj, "round")?
        .as_u64()
        .ok_or_else(|| ParseError::InvalidType {
            field: "round".into(),
            expected: "a non-negative integer".into(),
        })?;
    if round == 0 || round > u64::from(u32::MAX) {
        return Err(invalid_value("round", &round.to_string()));
    }
    let phase_raw = get_str(obj, "phase")?;
    let phase: Phase = phase_raw
        .parse()
        .map_err(|_| invalid_value("phase", phase_raw))?;
    let actor = get_str(obj, "actor")?.to_owned();
    let mode_raw = get_str(obj, "mode")?;
    let mode: SpeechMode = mode_raw.parse().map_err(|_| ParseError::UnknownMode {
        value: mode_raw.to_owned(),
    })?;
    let act_raw = get_str(obj, "act")?;
    let act: ActType = act_raw.parse().map_err(|_| ParseError::UnknownAct {
        value: act_raw.to_owned(),
    })?;
    let intent = get_str(obj, "intent")?.to_owned();
    let target_raw = get_str(obj, "target")?;
    let target: Target = target_raw
        .parse()
        .map_err(|_| invalid_value("target", target_raw))?;
    let content = get_str(obj, "content")?.to_owned();
    let confidence = get(obj, "confidence")?
        .as_f64()
        .ok_or_else(|| ParseError::InvalidType {
            field: "confidence".into(),
            expected: "a number".into(),
        })?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(ParseError::OutOfRangeConfidence { value: confidence });
    }
    let force_raw = get_str(obj, "move_force")?;
    let move_force: MoveForce = force_raw
        .parse()
        .map_err(|_| invalid_value("move_force", force_raw))?;
    let meta_level = get(obj, "meta_level")?
        .as_bool()
        .ok_or_else(|| ParseError::InvalidType {
            field: "meta_level".into(),
            expected: "a boolean".into(),
        })?;

    let extra = obj
        .iter()
        .filter(|(k, _)| !MOVE_FIELDS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();

    Ok(Move {
        move_id,
        session_id,
        round: round as u32,
        phase,
        actor,
        mode,
        act,
        intent,
        target,
        content,
        confidence,
        move_force,
        meta_level,
        extra,
    })
}

/// Session facts a move is checked against.
#[derive(Debug, Clone, Copy)]
pub struct MoveContext<'a> {
    pub session_id: &'a SessionId,
    pub round: u32,
    pub phase: Phase,
    pub known_moves: &'a BTreeSet<MoveId>,
    /// Spawn moves whose child session has finished and may be recalled.
    pub recallable: &'a BTreeSet<MoveId>,
    pub depth: u32,
    pub max_depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    SessionMismatch,
    RoundMismatch,
    PhaseMismatch,
    EmptyField,
    OutOfRange,
    DuplicateMoveId,
    DanglingTarget,
    DepthExhausted,
    ActorMismatch,
    Malformed,
}

/// A machine-readable refusal, suitable for re-prompting the delegate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub reason: RejectionReason,
    pub field: String,
    pub message: String,
}

impl Rejection {
    pub fn new(reason: RejectionReason, field: &str, message: impl Into<String>) -> Self {
        Self {
            reason,
            field: field.to_owned(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} on `{}`: {}", self.reason, self.field, self.message)
    }
}

impl From<ParseError> for Rejection {
    fn from(e: ParseError) -> Self {
        let field = e.field().unwrap_or("document").to_owned();
        Rejection {
            reason: match e {
                ParseError::OutOfRangeConfidence { .. } => RejectionReason::OutOfRange,
                _ => RejectionReason::Malformed,
            },
            field,
            message: e.to_string(),
        }
    }
}

/// Checks a parsed move against the session it claims to belong to.
pub fn validate_move(m: &Move, ctx: &MoveContext<'_>) -> Result<(), Rejection> {
    use RejectionReason::*;
    if &m.session_id != ctx.session_id {
        return Err(Rejection::new(
            SessionMismatch,
            "session_id",
            format!("expected session {}, got {}", ctx.session_id, m.session_id),
        ));
    }
    if m.round != ctx.round {
        return Err(Rejection::new(
            RoundMismatch,
            "round",
            format!("expected round {}, got {}", ctx.round, m.round),
        ));
    }
    if m.phase != ctx.phase {
        return Err(Rejection::new(
            PhaseMismatch,
            "phase",
            format!("expected phase {}, got {}", ctx.phase, m.phase),
        ));
    }
    if m.move_id.as_str().trim().is_empty() {
        return Err(Rejection::new(EmptyField, "move_id", "move_id is empty"));
    }
    if m.actor.trim().is_empty() {
        return Err(Rejection::new(EmptyField, "actor", "actor is empty"));
    }
    if m.intent.trim().is_empty() {
        return Err(Rejection::new(EmptyField, "intent", "intent is empty"));
    }
    if m.content.trim().is_empty() {
        return Err(Rejection::new(EmptyField, "content", "content is empty"));
    }
    if !(0.0..=1.0).contains(&m.confidence) {
        return Err(Rejection::new(
            OutOfRange,
            "confidence",
            format!("confidence {} outside [0, 1]", m.confidence),
        ));
    }
    if ctx.known_moves.contains(&m.move_id) {
        return Err(Rejection::new(
            DuplicateMoveId,
            "move_id",
            format!("move id {} already used in this session", m.move_id),
        ));
    }
    if let Target::Contribution(id) = &m.target {
        if !ctx.known_moves.contains(id) {
            return Err(Rejection::new(
                DanglingTarget,
                "target",
                format!("no move {id} in this session"),
            ));
        }
    }
    match m.act {
        ActType::Spawn if ctx.depth >= ctx.max_depth => Err(Rejection::new(
            DepthExhausted,
            "act",
            format!("session depth {} has reached the limit {}", ctx.depth, ctx.max_depth),
        )),
        ActType::Recall => match m.target.move_id() {
            Some(id) if ctx.recallable.contains(id) => Ok(()),
            _ => Err(Rejection::new(
                DanglingTarget,
                "target",
                "recall must target a spawn move whose sub-session has finished",
            )),
        },
        _ => Ok(()),
    }
}

/// Counts of soft and hard moves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForceCounts {
    pub soft: usize,
    pub hard: usize,
}

/// Soft/hard counts per phase, for observing the soft-early/hard-late drift.
pub fn force_profile<'a>(moves: impl IntoIterator<Item = &'a Move>) -> BTreeMap<Phase, ForceCounts> {
    let mut out: BTreeMap<Phase, ForceCounts> = BTreeMap::new();
    for m in moves {
        let c = out.entry(m.phase).or_default();
        match m.move_force {
            MoveForce::Soft => c.soft += 1,
            MoveForce::Hard => c.hard += 1,
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn reference_doc() -> Value {
        json!({
            "move_id": "mv-042",
            "session_id": "DCI-S-001",
            "round": 2,
            "phase": "mutual_engagement",
            "actor": "Challenger",
            "mode": "critical",
            "act": "challenge",
            "intent": "test assumption",
            "target": "contribution:mv-031",
            "content": "This proposal assumes delegates can self-regulate without coordination pressure. What prevents divergence?",
            "confidence": 0.78,
            "move_force": "hard",
            "meta_level": false
        })
    }

    fn ctx<'a>(
        sid: &'a SessionId,
        known: &'a BTreeSet<MoveId>,
        recallable: &'a BTreeSet<MoveId>,
    ) -> MoveContext<'a> {
        MoveContext {
            session_id: sid,
            round: 2,
            phase: Phase::MutualEngagement,
            known_moves: known,
            recallable,
            depth: 0,
            max_depth: 2,
        }
    }

    #[test]
    fn parses_reference_move() {
        let m = parse_move(&reference_doc()).unwrap();
        assert_eq!(m.act, ActType::Challenge);
        assert_eq!(m.family(), Family::Critical);
        assert_eq!(m.mode, SpeechMode::Critical);
        assert_eq!(m.move_force, MoveForce::Hard);
        assert_eq!(m.confidence, 0.78);
        assert_eq!(m.target, Target::contribution("mv-031"));
        assert_eq!(m.to_document(), reference_doc());
    }

    #[test]
    fn missing_act_is_named() {
        let mut doc = reference_doc();
        doc.as_object_mut().unwrap().remove("act");
        assert_eq!(
            parse_move(&doc),
            Err(ParseError::MissingField { field: "act".into() })
        );
    }

    #[test]
    fn confidence_above_one_is_out_of_range() {
        let mut doc = reference_doc();
        doc["confidence"] = json!(1.3);
        let err = parse_move(&doc).unwrap_err();
        assert_eq!(err, ParseError::OutOfRangeConfidence { value: 1.3 });
        assert_eq!(err.field(), Some("confidence"));
    }

    #[test]
    fn first_offending_field_wins() {
        let mut doc = reference_doc();
        doc["mode"] = json!("shouty");
        doc["act"] = json!("shout");
        assert_eq!(err_field(&doc), "mode");
    }

    fn err_field(doc: &Value) -> String {
        parse_move(doc).unwrap_err().field().unwrap().to_owned()
    }

    #[test]
    fn extra_fields_survive() {
        let mut doc = reference_doc();
        doc["x_trace"] = json!({"span": 7});
        let m = parse_move(&doc).unwrap();
        assert_eq!(m.extra.get("x_trace"), Some(&json!({"span": 7})));
        assert_eq!(m.to_document(), doc);
    }

    #[test]
    fn valid_challenge_is_accepted() {
        let sid = SessionId::new("DCI-S-001");
        let known: BTreeSet<_> = [MoveId::new("mv-031")].into();
        let none = BTreeSet::new();
        let m = parse_move(&reference_doc()).unwrap();
        assert_eq!(validate_move(&m, &ctx(&sid, &known, &none)), Ok(()));
    }

    #[test]
    fn dangling_target_is_rejected() {
        let sid = SessionId::new("DCI-S-001");
        let known: BTreeSet<_> = [MoveId::new("mv-031")].into();
        let none = BTreeSet::new();
        let mut m = parse_move(&reference_doc()).unwrap();
        m.target = Target::contribution("mv-999");
        let r = validate_move(&m, &ctx(&sid, &known, &none)).unwrap_err();
        assert_eq!(r.reason, RejectionReason::DanglingTarget);
        assert_eq!(r.field, "target");
    }

    #[test]
    fn spawn_at_depth_limit_is_rejected() {
        let sid = SessionId::new("DCI-S-001");
        let known = BTreeSet::new();
        let none = BTreeSet::new();
        let mut m = parse_move(&reference_doc()).unwrap();
        m.act = ActType::Spawn;
        m.target = Target::Problem;
        let mut c = ctx(&sid, &known, &none);
        c.depth = 2;
        assert_eq!(
            validate_move(&m, &c).unwrap_err().reason,
            RejectionReason::DepthExhausted
        );
        c.depth = 1;
        assert!(validate_move(&m, &c).is_ok());
    }

    #[test]
    fn recall_without_finished_child_dangles() {
        let sid = SessionId::new("DCI-S-001");
        let known: BTreeSet<_> = [MoveId::new("mv-031")].into();
        let none = BTreeSet::new();
        let mut m = parse_move(&reference_doc()).unwrap();
        m.act = ActType::Recall;
        let r = validate_move(&m, &ctx(&sid, &known, &none)).unwrap_err();
        assert_eq!(r.reason, RejectionReason::DanglingTarget);
        let done: BTreeSet<_> = [MoveId::new("mv-031")].into();
        assert!(validate_move(&m, &ctx(&sid, &known, &done)).is_ok());
    }

    #[test]
    fn round_and_phase_must_match() {
        let sid = SessionId::new("DCI-S-001");
        let known: BTreeSet<_> = [MoveId::new("mv-031")].into();
        let none = BTreeSet::new();
        let mut m = parse_move(&reference_doc()).unwrap();
        m.round = 1;
        assert_eq!(
            validate_move(&m, &ctx(&sid, &known, &none)).unwrap_err().reason,
            RejectionReason::RoundMismatch
        );
        m.round = 2;
        m.phase = Phase::Closure;
        assert_eq!(
            validate_move(&m, &ctx(&sid, &known, &none)).unwrap_err().reason,
            RejectionReason::PhaseMismatch
        );
    }

    #[test]
    fn families_match_table() {
        assert_eq!(act_family(ActType::Challenge), Family::Critical);
        assert_eq!(act_family(ActType::Synthesize), Family::Integrative);
        assert_eq!(act_family(ActType::Ground), Family::Epistemic);
        assert_eq!(act_family(ActType::Spawn), Family::Generative);
        assert_eq!(act_family(ActType::Bridge), Family::Integrative);
    }

    #[test]
    fn family_partition_sizes() {
        let mut sizes: BTreeMap<Family, usize> = BTreeMap::new();
        for a in ActType::ALL {
            *sizes.entry(act_family(a)).or_default() += 1;
        }
        let expected: BTreeMap<Family, usize> = [
            (Family::Orienting, 3),
            (Family::Generative, 3),
            (Family::Critical, 2),
            (Family::Integrative, 3),
            (Family::Epistemic, 2),
            (Family::Decisional, 1),
        ]
        .into();
        assert_eq!(sizes, expected);
    }

    #[test]
    fn response_grammar() {
        use ResponseKind::*;
        assert_eq!(
            expected_responses(ActType::Challenge),
            [Defend, Refine, Update, Concede].into()
        );
        assert_eq!(
            expected_responses(ActType::Synthesize),
            [Affirm, Sharpen, SurfaceOmission, Recommend].into()
        );
        assert!(expected_responses(ActType::Propose).is_empty());
        assert_eq!(
            serde_json::to_value(SurfaceOmission).unwrap(),
            json!("surface-omission")
        );
    }

    #[test]
    fn exactly_six_modes() {
        for m in SpeechMode::ALL {
            assert_eq!(m.as_str().parse::<SpeechMode>(), Ok(m));
        }
        assert!("rhetorical".parse::<SpeechMode>().is_err());
    }

    #[test]
    fn force_profile_counts_per_phase() {
        let m = parse_move(&reference_doc()).unwrap();
        let mut soft = m.clone();
        soft.move_force = MoveForce::Soft;
        soft.phase = Phase::IndependentFirstThought;
        let p = force_profile([&m, &soft, &m]);
        assert_eq!(p[&Phase::MutualEngagement], ForceCounts { soft: 0, hard: 2 });
        assert_eq!(p[&Phase::IndependentFirstThought], ForceCounts { soft: 1, hard: 0 });
    }
}
