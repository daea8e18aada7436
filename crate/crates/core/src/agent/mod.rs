//! Agents for publishers, datasets and users, talking over HTTP.
//!
//! Every agent owns a wallet and a DID. A publisher connects to a dataset
//! agent and issues it credentials; a user agent connects to the same
//! dataset agent and asks for a presentation bound to a fresh challenge.
//! All peer traffic is signed [`MessageEnvelope`]s posted to `/inbox`.

mod client;
mod config;
mod protocol;
mod service;
mod state;

use thiserror::Error;

use crate::vc::{IssueError, RevokeError};
use crate::vp::PresentationReport;
use crate::wallet::WalletError;

pub use client::AdminClient;
pub use config::{AgentConfig, DidConfig, PolicyConfig, ResolverConfig, Role, Sharable, WalletConfig};
pub use protocol::{
    open_envelope, ConnectionBody, CredentialAckBody, CredentialIssueBody, Inbound, MessageEnvelope, MessageType,
    ProblemBody, ProblemCode, ProofRequestBody, ProofResponseBody, NAMESPACE,
};
pub use service::{
    provision, Agent, AgentStatus, IssueRequest, Invitation, PendingProof, ProofOutcome, RequestProof, RevokeRequest,
    RunningAgent,
};
pub use state::{AgentState, Connection, ConnectionState, IssuedRecord, NonceEntry};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("address {0} is already in use")]
    PortInUse(std::net::SocketAddr),
    #[error(transparent)]
    Wallet(#[from] WalletError),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("peer unreachable: {0}")]
    Unreachable(String),
    #[error("signature invalid: {0}")]
    SignatureInvalid(String),
    #[error("connection rejected by policy: {0}")]
    PolicyRejected(String),
    #[error("connection {0} is not active")]
    ConnectionInactive(String),
    #[error("no connection: {0}")]
    UnknownConnection(String),
    #[error("credential rejected: {0}")]
    CredentialRejected(String),
    #[error("no matching credential: {0}")]
    NoMatchingCredential(String),
    #[error("challenge expired")]
    ChallengeExpired,
    #[error("challenge already used")]
    ChallengeConsumed,
    #[error("no outstanding proof request {0}")]
    UnknownRequest(String),
    #[error("presentation verification failed: {}", .0.verdict)]
    VerificationFailed(Box<PresentationReport>),
    #[error("not allowed: {0}")]
    RoleForbidden(String),
    #[error("peer reported {code:?}: {detail}")]
    Problem { code: ProblemCode, detail: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Issue(#[from] IssueError),
    #[error(transparent)]
    Revoke(#[from] RevokeError),
}

impl AgentError {
    /// Stable short code used by the admin API.
    pub fn code(&self) -> &'static str {
        match self {
            AgentError::PortInUse(_) => "port-in-use",
            AgentError::Wallet(_) => "wallet",
            AgentError::BadConfig(_) => "bad-config",
            AgentError::Unreachable(_) => "unreachable",
            AgentError::SignatureInvalid(_) => "signature-invalid",
            AgentError::PolicyRejected(_) => "policy-rejected",
            AgentError::ConnectionInactive(_) => "connection-inactive",
            AgentError::UnknownConnection(_) => "unknown-connection",
            AgentError::CredentialRejected(_) => "credential-rejected",
            AgentError::NoMatchingCredential(_) => "no-matching-credential",
            AgentError::ChallengeExpired => "challenge-expired",
            AgentError::ChallengeConsumed => "challenge-consumed",
            AgentError::UnknownRequest(_) => "unknown-request",
            AgentError::VerificationFailed(_) => "verification-failed",
            AgentError::RoleForbidden(_) => "role-forbidden",
            AgentError::Problem { .. } => "peer-problem",
            AgentError::Protocol(_) => "protocol",
            AgentError::Io(_) => "io",
            AgentError::Issue(_) => "issue",
            AgentError::Revoke(_) => "revoke",
        }
    }

    fn from_problem(p: ProblemBody) -> Self {
        match p.code {
            ProblemCode::SignatureInvalid => AgentError::SignatureInvalid(format!("peer: {}", p.detail)),
            ProblemCode::PolicyRejected => AgentError::PolicyRejected(p.detail),
            ProblemCode::ConnectionInactive => AgentError::ConnectionInactive(p.detail),
            ProblemCode::UnknownConnection => AgentError::UnknownConnection(p.detail),
            ProblemCode::CredentialRejected => AgentError::CredentialRejected(p.detail),
            ProblemCode::NoMatchingCredential => AgentError::NoMatchingCredential(p.detail),
            ProblemCode::RoleForbidden => AgentError::RoleForbidden(p.detail),
            code => AgentError::Problem { code, detail: p.detail },
        }
    }
}
