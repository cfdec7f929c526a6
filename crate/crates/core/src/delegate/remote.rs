//! Delegates backed by an external completion service.
//!
//! The engine sends each request as JSON and expects the matching artifact
//! back as JSON. Anything that fails to decode is a provider failure, which
//! the engine answers with its usual re-prompt.

use serde::{Deserialize, Serialize};
use serde::de::DeserializeOwned;
use serde_json::Value;

use super::{
    Delegate, DelegateError, PickRequest, Proposal, ProposalRequest, RoundOutput, RoundRequest,
    ScoreRequest, ScoreSheet,
};
use crate::events::CallKind;
use crate::ids::OptionId;

/// Environment variable holding the base address of the completion service.
pub const ENDPOINT_ENV: &str = "DCI_REMOTE_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub call: CallKind,
    pub payload: Value,
}

/// Moves one request to a provider and brings back its raw JSON answer.
pub trait CompletionTransport {
    fn complete(&mut self, req: &CompletionRequest) -> Result<Value, String>;
}

impl<F> CompletionTransport for F
where
    F: FnMut(&CompletionRequest) -> Result<Value, String>,
{
    fn complete(&mut self, req: &CompletionRequest) -> Result<Value, String> {
        self(req)
    }
}

pub struct RemoteDelegate<T> {
    transport: T,
}

impl<T: CompletionTransport> RemoteDelegate<T> {
    pub fn new(transport: T) -> Self {
        Self { transport }
    }

    fn call<Req: Serialize, Resp: DeserializeOwned>(
        &mut self,
        call: CallKind,
        req: &Req,
    ) -> Result<Resp, DelegateError> {
        let payload = serde_json::to_value(req).map_err(|e| DelegateError::ProviderFailure(e.to_string()))?;
        let raw = self
            .transport
            .complete(&CompletionRequest { call, payload })
            .map_err(DelegateError::ProviderFailure)?;
        serde_json::from_value(raw).map_err(|e| DelegateError::ProviderFailure(format!("undecodable response: {e}")))
    }
}

impl<T: CompletionTransport> Delegate for RemoteDelegate<T> {
    fn generate_proposal(&mut self, req: &ProposalRequest) -> Result<Proposal, DelegateError> {
        self.call(CallKind::Proposal, req)
    }

    fn contribute(&mut self, req: &RoundRequest) -> Result<RoundOutput, DelegateError> {
        self.call(CallKind::Contribute, req)
    }

    fn score(&mut self, req: &ScoreRequest) -> Result<ScoreSheet, DelegateError> {
        self.call(CallKind::Score, req)
    }

    fn integrator_pick(&mut self, req: &PickRequest) -> Result<OptionId, DelegateError> {
        self.call(CallKind::IntegratorPick, req)
    }
}

/// Posts each request to `{base}/{call}` and reads the JSON body.
#[cfg(feature = "remote-http")]
pub struct HttpTransport {
    base: String,
    client: reqwest::blocking::Client,
}

#[cfg(feature = "remote-http")]
impl HttpTransport {
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_owned(),
            client: reqwest::blocking::Client::new(),
        }
    }

    /// Reads the base address from [`ENDPOINT_ENV`].
    pub fn from_env() -> Option<Self> {
        std::env::var(ENDPOINT_ENV).ok().map(Self::new)
    }
}

#[cfg(feature = "remote-http")]
impl CompletionTransport for HttpTransport {
    fn complete(&mut self, req: &CompletionRequest) -> Result<Value, String> {
        let call = serde_json::to_value(req.call)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        self.client
            .post(format!("{}/{call}", self.base))
            .json(&req.payload)
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.json())
            .map_err(|e| e.to_string())
    }
}
