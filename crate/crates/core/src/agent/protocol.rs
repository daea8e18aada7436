//! Signed message envelopes exchanged between agents over `POST /inbox`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::did::{Did, KeyPurpose, Resolver};
use crate::keys::KeyPair;
use crate::proof::{default_verification_method, sign_serializable, verify_embedded, Proof, ProofError};
use crate::report::CheckStatus;
use crate::time::Timestamp;

pub const NAMESPACE: &str = "datacred/1.0/";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageType {
    ConnectionRequest,
    ConnectionResponse,
    CredentialIssue,
    CredentialAck,
    ProofRequest,
    ProofResponse,
    ProblemReport,
}

impl MessageType {
    pub const ALL: [MessageType; 7] = [
        MessageType::ConnectionRequest,
        MessageType::ConnectionResponse,
        MessageType::CredentialIssue,
        MessageType::CredentialAck,
        MessageType::ProofRequest,
        MessageType::ProofResponse,
        MessageType::ProblemReport,
    ];

    fn short(self) -> &'static str {
        match self {
            MessageType::ConnectionRequest => "connection-request",
            MessageType::ConnectionResponse => "connection-response",
            MessageType::CredentialIssue => "credential-issue",
            MessageType::CredentialAck => "credential-ack",
            MessageType::ProofRequest => "proof-request",
            MessageType::ProofResponse => "proof-response",
            MessageType::ProblemReport => "problem-report",
        }
    }

    pub fn uri(self) -> String {
        format!("{NAMESPACE}{}", self.short())
    }

    pub fn parse(uri: &str) -> Option<Self> {
        let short = uri.strip_prefix(NAMESPACE)?;
        Self::ALL.into_iter().find(|t| t.short() == short)
    }
}

impl std::fmt::Display for MessageType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.uri())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MessageEnvelope {
    pub id: String,
    #[serde(rename = "type")]
    pub message_type: String,
    pub from: Did,
    pub to: Did,
    pub created_at: Timestamp,
    /// Id of the message this one answers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thid: Option<String>,
    pub body: Value,
    pub signature: Proof,
}

impl MessageEnvelope {
    pub fn signed(
        kind: MessageType,
        from: &Did,
        to: &Did,
        thid: Option<String>,
        body: impl Serialize,
        key: &KeyPair,
    ) -> Result<Self, ProofError> {
        let now = Timestamp::now();
        let mut env = Self {
            id: uuid::Uuid::new_v4().to_string(),
            message_type: kind.uri(),
            from: from.clone(),
            to: to.clone(),
            created_at: now,
            thid,
            body: serde_json::to_value(body).expect("message body serializes"),
            signature: Proof::new(default_verification_method(from), KeyPurpose::Authentication, now),
        };
        env.signature.signature_value = sign_serializable(&env, "signature", key)?;
        Ok(env)
    }

    pub fn kind(&self) -> Option<MessageType> {
        MessageType::parse(&self.message_type)
    }

    pub fn body_as<T: serde::de::DeserializeOwned>(&self) -> Result<T, String> {
        serde_json::from_value(self.body.clone()).map_err(|e| format!("{} body: {e}", self.message_type))
    }
}

/// Outcome of checking an inbound envelope.
#[derive(Debug)]
pub enum Inbound {
    Verified(MessageEnvelope),
    Malformed(String),
    /// Signature failed; nothing in the envelope may be acted on.
    Rejected(MessageEnvelope, String),
    /// The sender's DID could not be resolved right now.
    Unverifiable(MessageEnvelope, String),
}

/// Parse `raw` and verify its signature against the claimed sender, over
/// the bytes as received.
pub async fn open_envelope(raw: &Value, resolver: &Resolver) -> Inbound {
    let env: MessageEnvelope = match serde_json::from_value(raw.clone()) {
        Ok(e) => e,
        Err(e) => return Inbound::Malformed(e.to_string()),
    };
    let check = verify_embedded(raw, "signature", &env.from, KeyPurpose::Authentication, resolver).await;
    match check.status {
        CheckStatus::Pass => Inbound::Verified(env),
        CheckStatus::Indeterminate { detail } => Inbound::Unverifiable(env, detail),
        other => Inbound::Rejected(env, other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConnectionBody {
    pub connection_id: String,
    /// Sender's inbox URL.
    pub endpoint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CredentialIssueBody {
    pub credential: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CredentialAckBody {
    pub credential_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProofRequestBody {
    pub challenge: String,
    pub requested_attributes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProofResponseBody {
    pub presentation: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemCode {
    Malformed,
    WrongRecipient,
    SignatureInvalid,
    SenderUnresolvable,
    PolicyRejected,
    UnknownConnection,
    ConnectionInactive,
    CredentialRejected,
    NoMatchingCredential,
    RoleForbidden,
    ChallengeRejected,
    UnsupportedType,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemBody {
    pub code: ProblemCode,
    pub detail: String,
}
