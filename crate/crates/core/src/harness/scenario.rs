//! Scenario files: a session config, per-delegate scripts and optional
//! expected outcomes that are checked exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convergence::{FallbackMethod, SessionOutcome, VerdictKind, run_session_logged};
use crate::delegate::{DelegateBox, DelegateScript, ScriptedDelegate};
use crate::events::EventLog;
use crate::packet::DecisionPacket;
use crate::session::{SessionConfig, SessionError};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winner: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minority_report_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_fallback: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_method: Option<FallbackMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reopen_conditions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minority_options: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub config: SessionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectations>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("expectation mismatch on {field}: expected {expected}, got {actual}")]
pub struct ExpectationMismatch {
    pub field: &'static str,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot parse scenario {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("delegate {0} has neither a script nor a usable endpoint")]
    NoBehavior(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

fn json_str<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_default()
}

impl Expectations {
    /// Every stated expectation that the run missed.
    pub fn check(&self, packet: &DecisionPacket) -> Vec<ExpectationMismatch> {
        let mut out = Vec::new();
        let mut cmp = |field, expected: String, actual: String| {
            if expected != actual {
                out.push(ExpectationMismatch { field, expected, actual });
            }
        };
        if let Some(w) = &self.winner {
            cmp("decision", w.clone(), packet.decision.label.clone());
        }
        if let Some(v) = self.verdict {
            cmp("verdict", json_str(&v), json_str(&packet.verdict));
        }
        if let Some(r) = self.rounds {
            cmp("rounds", r.to_string(), packet.rounds.to_string());
        }
        if let Some(n) = self.minority_report_size {
            cmp("minority_report", n.to_string(), packet.minority_report.len().to_string());
        }
        if let Some(f) = self.forced_fallback {
            cmp("forced_fallback", f.to_string(), packet.forced_fallback.to_string());
        }
        if let Some(m) = self.fallback_method {
            cmp("fallback_method", json_str(&Some(m)), json_str(&packet.fallback_method));
        }
        if let Some(n) = self.reopen_conditions {
            cmp("reopen_conditions", n.to_string(), packet.reopen_conditions.len().to_string());
        }
        if let Some(labels) = &self.minority_options {
            let actual: Vec<String> = packet
                .minority_report
                .iter()
                .map(|m| m.preferred_label.clone())
                .collect();
            cmp("minority_options", labels.join(", "), actual.join(", "));
        }
        out
    }
}

/// A completed scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub packet: DecisionPacket,
    pub log: EventLog,
    pub outcome: SessionOutcome,
    pub mismatches: Vec<ExpectationMismatch>,
}

impl ScenarioRun {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn write_log(&self, path: &Path) -> std::io::Result<()> {
        let f = fs::File::create(path)?;
        self.log.write_jsonl(std::io::BufWriter::new(f))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut s: Scenario = serde_json::from_str(&text).map_err(|e| ScenarioError::Parse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in &mut s.config.delegates {
            if d.script.is_none() {
                if let Some(rel) = &d.script_path {
                    let p = base.join(rel);
                    let text = fs::read_to_string(&p).map_err(|source| ScenarioError::Io {
                        path: p.clone(),
                        source,
                    })?;
                    let script: DelegateScript =
                        serde_json::from_str(&text).map_err(|e| ScenarioError::Parse {
                            path: p,
                            reason: e.to_string(),
                        })?;
                    d.script = Some(script);
                }
            }
        }
        Ok(s)
    }

    pub fn delegates(&self) -> Result<Vec<DelegateBox>, ScenarioError> {
        self.config
            .delegates
            .iter()
            .map(|d| match (&d.script, &d.endpoint) {
                (Some(s), _) => Ok(Box::new(ScriptedDelegate::new(s.clone())) as DelegateBox),
                #[cfg(feature = "remote-http")]
                (None, Some(_)) => crate::delegate::remote::HttpTransport::from_env()
                    .map(|t| Box::new(crate::delegate::RemoteDelegate::new(t)) as DelegateBox)
                    .ok_or_else(|| ScenarioError::NoBehavior(d.id.to_string())),
                _ => Err(ScenarioError::NoBehavior(d.id.to_string())),
            })
            .collect()
    }

    pub fn run(&self) -> Result<ScenarioRun, ScenarioError> {
        let mut delegates = self.delegates()?;
        let mut log = EventLog::new();
        let outcome = run_session_logged(self.config.envelope(), &mut delegates, &mut log)?;
        let mismatches = self
            .expect
            .as_ref()
            .map(|e| e.check(&outcome.packet))
            .unwrap_or_default();
        Ok(ScenarioRun {
            packet: outcome.packet.clone(),
            log,
            outcome,
            mismatches,
        })
    }
}

/// Loads and runs a scenario file.
pub fn run_scenario(path: &Path) -> Result<ScenarioRun, ScenarioError> {
    Scenario::load(path)?.run()
}

/// Runs a scenario given as a JSON string (scripts must be inline).
pub fn run_scenario_doc(doc: &str) -> Result<ScenarioRun, ScenarioError> {
    let s: Scenario = serde_json::from_str(doc).map_err(|e| ScenarioError::Parse {
        path: PathBuf::from("<inline>"),
        reason: e.to_string(),
    })?;
    s.run()
}
