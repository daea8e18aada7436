use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use super::service::{AgentStatus, Invitation, IssueRequest, RequestProof, RevokeRequest};
use super::state::Connection;
use super::AgentError;
use crate::did::Did;
use crate::vc::{RevocationRegistry, VerifiableCredential};
use crate::vp::PresentationReport;

/// Client for a running agent's loopback admin API.
#[derive(Debug, Clone)]
pub struct AdminClient {
    base: String,
    http: reqwest::Client,
}

impl AdminClient {
    pub fn new(base: impl Into<String>) -> Self {
        Self { base: base.into().trim_end_matches('/').to_string(), http: reqwest::Client::new() }
    }

    async fn decode<T: DeserializeOwned>(&self, resp: reqwest::Response) -> Result<T, AgentError> {
        let status = resp.status();
        let body: Value = resp.json().await.map_err(|e| AgentError::Protocol(format!("admin API: {e}")))?;
        if status.is_success() {
            serde_json::from_value(body).map_err(|e| AgentError::Protocol(format!("admin API: {e}")))
        } else {
            let detail = body.get("detail").and_then(Value::as_str).unwrap_or("request failed");
            let code = body.get("code").and_then(Value::as_str).unwrap_or("unknown");
            Err(AgentError::Protocol(format!("{code}: {detail} (HTTP {status})")))
        }
    }

    async fn get<T: DeserializeOwned>(&self, path: &str) -> Result<T, AgentError> {
        let url = format!("{}{path}", self.base);
        let resp = self.http.get(&url).send().await.map_err(|e| AgentError::Unreachable(format!("{url}: {e}")))?;
        self.decode(resp).await
    }

    async fn post<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T, AgentError> {
        let url = format!("{}{path}", self.base);
        let resp = self
            .http
            .post(&url)
            .json(body)
            .send()
            .await
            .map_err(|e| AgentError::Unreachable(format!("{url}: {e}")))?;
        self.decode(resp).await
    }

    pub async fn status(&self) -> Result<AgentStatus, AgentError> {
        self.get("/status").await
    }

    pub async fn connections(&self) -> Result<Vec<Connection>, AgentError> {
        self.get("/connections").await
    }

    pub async fn credentials(&self) -> Result<Vec<VerifiableCredential>, AgentError> {
        self.get("/credentials").await
    }

    pub async fn connect(&self, invitation: &Invitation) -> Result<Connection, AgentError> {
        self.post("/connect", invitation).await
    }

    pub async fn issue(&self, request: &IssueRequest) -> Result<VerifiableCredential, AgentError> {
        self.post("/issue", request).await
    }

    pub async fn request_proof(&self, target: &Did, attributes: &[String]) -> Result<PresentationReport, AgentError> {
        self.post("/request-proof", &RequestProof { target: target.clone(), attributes: attributes.to_vec() }).await
    }

    pub async fn revoke(&self, request: &RevokeRequest) -> Result<RevocationRegistry, AgentError> {
        self.post("/revoke", request).await
    }
}
