use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{ConnectInfo, Request, State};
use axum::http::StatusCode;
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::net::TcpListener;
use tokio::sync::{oneshot, Mutex};
use tracing::{debug, info, warn};

use super::config::{AgentConfig, DidConfig, Role};
use super::protocol::{
    open_envelope, ConnectionBody, CredentialAckBody, CredentialIssueBody, Inbound, MessageEnvelope, MessageType,
    ProblemBody, ProblemCode, ProofRequestBody, ProofResponseBody,
};
use super::state::{AgentState, Connection, ConnectionState, IssuedRecord, NonceEntry, RejectedConnection};
use super::AgentError;
use crate::did::key::generate_did_key;
use crate::did::web::{did_web_for, did_web_url};
use crate::did::{Did, DidDocument, Fetcher, HttpFetcher, KeyBackend, Resolver, WebBackend};
use crate::keys::KeyPair;
use crate::report::{verdict, Check, CheckStatus, Reason};
use crate::time::Timestamp;
use crate::vc::{
    issue_credential, verify_credential_value, CredentialSchema, CredentialStatus, IssueOptions, RevocationRegistry,
    VerifiableCredential, VerifyOptions,
};
use crate::vp::{create_presentation, new_challenge, verify_presentation_value};
use crate::wallet::{Wallet, WalletError};

/// What a peer needs to open a connection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invitation {
    pub did: Did,
    /// The peer's inbox URL.
    pub endpoint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentStatus {
    pub role: Role,
    pub did: Did,
    pub endpoint: String,
    pub connections: usize,
    pub active_connections: usize,
    pub credentials: usize,
    pub issued: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry_url: Option<String>,
}

/// Admin request to issue a credential. Names the connection directly or
/// by the subject's DID.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IssueRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<Did>,
    pub claims: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expiration_date: Option<Timestamp>,
    /// Defaults to the dataset provenance schema.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<CredentialSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RequestProof {
    pub target: Did,
    pub attributes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RevokeRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status_id: Option<String>,
}

/// A proof request that has been recorded but not yet answered.
#[derive(Debug, Clone)]
pub struct PendingProof {
    pub thread_id: String,
    pub target: Did,
    pub endpoint: String,
    pub envelope: MessageEnvelope,
}

/// A verified answer to a proof request.
#[derive(Debug, Clone)]
pub struct ProofOutcome {
    pub thread_id: String,
    pub report: crate::vp::PresentationReport,
    /// Trust anchor: who issued the presented credential.
    pub issuer: Did,
    pub credential: VerifiableCredential,
    /// The proof-response envelope as received.
    pub response: Value,
}

struct Problem {
    status: StatusCode,
    code: ProblemCode,
    detail: String,
}

impl Problem {
    fn new(status: StatusCode, code: ProblemCode, detail: impl Into<String>) -> Self {
        Self { status, code, detail: detail.into() }
    }
}

struct Inner {
    config: AgentConfig,
    did: Did,
    key: KeyPair,
    public_url: String,
    document: DidDocument,
    wallet: Mutex<Wallet>,
    state: Mutex<AgentState>,
    state_path: PathBuf,
    registry: Mutex<Option<RevocationRegistry>>,
    registry_path: PathBuf,
    registry_url: Option<String>,
    resolver: Resolver,
    http: reqwest::Client,
}

/// Handle to an agent's state and operations. Cheap to clone.
#[derive(Clone)]
pub struct Agent {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for Agent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Agent").field("role", &self.role()).field("did", &self.inner.did).finish_non_exhaustive()
    }
}

fn wallet_err(e: WalletError) -> AgentError {
    AgentError::Wallet(e)
}

impl Agent {
    /// Open wallet and state for an agent whose server is bound at `bound`.
    fn open(config: AgentConfig, bound: SocketAddr) -> Result<Self, AgentError> {
        let passphrase = config.passphrase()?;
        let mut wallet = Wallet::open_with(&config.wallet.path, &passphrase, config.wallet.kdf.unwrap_or_default())?;
        let key = match wallet.get_keypair(&config.wallet.key_label) {
            Ok(kp) => kp.clone(),
            Err(WalletError::NoSuchEntry(_)) => {
                let kp = KeyPair::random();
                wallet.put_keypair(config.wallet.key_label.clone(), kp.clone());
                wallet.save()?;
                kp
            }
            Err(e) => return Err(e.into()),
        };

        let public_url = config.public_url.clone().unwrap_or_else(|| format!("http://{bound}"));
        let public_url = public_url.trim_end_matches('/').to_string();
        let inbox = format!("{public_url}/inbox");
        let (did, document) = match &config.did {
            DidConfig::Key => {
                let (did, doc) = generate_did_key(&key.public_key());
                (did, doc.with_service(&inbox))
            }
            DidConfig::Web { domain, path } => {
                let domain = match domain {
                    Some(d) => d.clone(),
                    None => {
                        let u = url::Url::parse(&public_url).map_err(|e| AgentError::BadConfig(e.to_string()))?;
                        let host = u.host_str().ok_or_else(|| AgentError::BadConfig("publicUrl has no host".into()))?;
                        match u.port() {
                            Some(p) => format!("{host}:{p}"),
                            None => host.to_string(),
                        }
                    }
                };
                let segments: Vec<&str> = path.iter().map(String::as_str).collect();
                let did = did_web_for(&domain, &segments).map_err(|e| AgentError::BadConfig(e.to_string()))?;
                let doc = DidDocument::new_ed25519(&did, &key.public_key()).with_service(&inbox);
                (did, doc)
            }
        };

        let dir = config.state_dir();
        let stem = config
            .wallet
            .path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "agent".into());
        let state_path = dir.join(format!("{stem}.state.json"));
        let registry_path = dir.join(format!("{stem}.registry.json"));
        let mut state = AgentState::load(&state_path)?;
        match &state.did {
            Some(prev) if prev != &did => {
                return Err(AgentError::BadConfig(format!(
                    "state {} belongs to {prev}, but this config yields {did}",
                    state_path.display()
                )))
            }
            Some(_) => {}
            None => {
                state.did = Some(did.clone());
                state.save(&state_path)?;
            }
        }
        let doc_bytes = serde_json::to_vec_pretty(&document).expect("document serializes");
        crate::wallet::write_atomic(&dir.join(format!("{stem}.did.json")), &doc_bytes).map_err(wallet_err)?;

        let (registry, registry_url) = if config.role == Role::Publisher {
            let reg = match std::fs::read(&registry_path) {
                Ok(bytes) => serde_json::from_slice::<RevocationRegistry>(&bytes)
                    .map_err(|e| AgentError::BadConfig(format!("{}: {e}", registry_path.display())))?,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    let reg = RevocationRegistry::new(&did, &key, None).map_err(|e| AgentError::Protocol(e.to_string()))?;
                    let bytes = serde_json::to_vec_pretty(&reg).expect("registry serializes");
                    crate::wallet::write_atomic(&registry_path, &bytes).map_err(wallet_err)?;
                    reg
                }
                Err(e) => return Err(AgentError::Io(format!("{}: {e}", registry_path.display()))),
            };
            if reg.issuer != did {
                return Err(AgentError::BadConfig(format!("registry belongs to {}", reg.issuer)));
            }
            let url = config.registry_url.clone().unwrap_or_else(|| format!("{public_url}/registry.json"));
            (Some(reg), Some(url))
        } else {
            (None, None)
        };

        let http_fetcher: Arc<dyn Fetcher> = Arc::new(HttpFetcher::new(config.resolver.allow_insecure_loopback));
        let resolver = Resolver::builder()
            .backend(Arc::new(KeyBackend))
            .backend(Arc::new(WebBackend::new(http_fetcher.clone())))
            .document_fetcher(http_fetcher)
            .cache_ttl(Duration::from_secs(config.resolver.cache_ttl_secs))
            .build();
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(10))
            .pool_max_idle_per_host(0)
            .build()
            .map_err(|e| AgentError::Io(e.to_string()))?;

        Ok(Self {
            inner: Arc::new(Inner {
                config,
                did,
                key,
                public_url,
                document,
                wallet: Mutex::new(wallet),
                state: Mutex::new(state),
                state_path,
                registry: Mutex::new(registry),
                registry_path,
                registry_url,
                resolver,
                http,
            }),
        })
    }

    pub fn role(&self) -> Role {
        self.inner.config.role
    }

    pub fn did(&self) -> &Did {
        &self.inner.did
    }

    pub fn did_document(&self) -> &DidDocument {
        &self.inner.document
    }

    pub fn public_url(&self) -> &str {
        &self.inner.public_url
    }

    pub fn inbox(&self) -> String {
        format!("{}/inbox", self.inner.public_url)
    }

    pub fn invitation(&self) -> Invitation {
        Invitation { did: self.inner.did.clone(), endpoint: self.inbox() }
    }

    pub fn resolver(&self) -> &Resolver {
        &self.inner.resolver
    }

    pub fn registry_url(&self) -> Option<&str> {
        self.inner.registry_url.as_deref()
    }

    pub async fn registry(&self) -> Option<RevocationRegistry> {
        self.inner.registry.lock().await.clone()
    }

    pub async fn status(&self) -> AgentStatus {
        let st = self.inner.state.lock().await;
        let credentials = self.inner.wallet.lock().await.credentials().count();
        AgentStatus {
            role: self.role(),
            did: self.inner.did.clone(),
            endpoint: self.inbox(),
            connections: st.connections.len(),
            active_connections: st.connections.iter().filter(|c| c.is_active()).count(),
            credentials,
            issued: st.issued.len(),
            registry_url: self.inner.registry_url.clone(),
        }
    }

    pub async fn connections(&self) -> Vec<Connection> {
        self.inner.state.lock().await.connections.clone()
    }

    pub async fn credentials(&self) -> Vec<VerifiableCredential> {
        self.inner.wallet.lock().await.credentials().map(|(_, vc)| vc.clone()).collect()
    }

    pub async fn issued(&self) -> Vec<IssuedRecord> {
        self.inner.state.lock().await.issued.clone()
    }

    async fn persist(&self, st: &AgentState) -> Result<(), AgentError> {
        st.save(&self.inner.state_path)
    }

    fn require_role(&self, allowed: &[Role], what: &str) -> Result<(), AgentError> {
        if allowed.contains(&self.role()) {
            Ok(())
        } else {
            Err(AgentError::RoleForbidden(format!("{what} is not available to {} agents", self.role())))
        }
    }

    // ---- outbound ----

    async fn exchange(
        &self,
        endpoint: &str,
        peer: &Did,
        env: &MessageEnvelope,
    ) -> Result<(MessageEnvelope, Value), AgentError> {
        debug!(to = %peer, kind = %env.message_type, "sending");
        let resp = self
            .inner
            .http
            .post(endpoint)
            .json(env)
            .send()
            .await
            .map_err(|e| AgentError::Unreachable(format!("{endpoint}: {e}")))?;
        let status = resp.status();
        let raw: Value = resp
            .json()
            .await
            .map_err(|e| AgentError::Protocol(format!("{endpoint} answered {status} without JSON: {e}")))?;
        let reply = match open_envelope(&raw, &self.inner.resolver).await {
            Inbound::Verified(reply) => reply,
            Inbound::Malformed(why) => {
                return Err(match serde_json::from_value::<ProblemBody>(raw["body"].clone()) {
                    Ok(p) => AgentError::from_problem(p),
                    Err(_) => AgentError::Protocol(format!("{endpoint} answered {status}: {why}")),
                })
            }
            Inbound::Rejected(_, why) => return Err(AgentError::SignatureInvalid(format!("reply from {endpoint}: {why}"))),
            Inbound::Unverifiable(_, why) => return Err(AgentError::Unreachable(format!("cannot resolve peer: {why}"))),
        };
        if &reply.from != peer {
            return Err(AgentError::SignatureInvalid(format!("reply signed by {} instead of {peer}", reply.from)));
        }
        if reply.to != self.inner.did || reply.thid.as_deref() != Some(env.id.as_str()) {
            return Err(AgentError::Protocol("reply does not answer the request".into()));
        }
        if reply.kind() == Some(MessageType::ProblemReport) {
            let p: ProblemBody = reply.body_as().map_err(AgentError::Protocol)?;
            return Err(AgentError::from_problem(p));
        }
        Ok((reply, raw))
    }

    fn expect_kind(env: &MessageEnvelope, kind: MessageType) -> Result<(), AgentError> {
        if env.kind() == Some(kind) {
            Ok(())
        } else {
            Err(AgentError::Protocol(format!("expected {kind}, got {}", env.message_type)))
        }
    }

    fn sign(&self, kind: MessageType, to: &Did, thid: Option<String>, body: impl Serialize) -> Result<MessageEnvelope, AgentError> {
        MessageEnvelope::signed(kind, &self.inner.did, to, thid, body, &self.inner.key)
            .map_err(|e| AgentError::Protocol(e.to_string()))
    }

    /// Open a connection to `invitation`, or return the active one.
    ///
    /// A half-finished handshake left by a crash is resumed with the same
    /// connection id, which the responder treats idempotently.
    pub async fn connect(&self, invitation: &Invitation) -> Result<Connection, AgentError> {
        self.require_role(&[Role::Publisher, Role::User], "connect")?;
        if invitation.did == self.inner.did {
            return Err(AgentError::Protocol("cannot connect to self".into()));
        }
        let connection_id = {
            let mut st = self.inner.state.lock().await;
            if let Some(c) = st.connection_with(&invitation.did) {
                if c.is_active() {
                    return Ok(c.clone());
                }
            }
            let id = match st.connection_with(&invitation.did) {
                Some(c) => c.connection_id.clone(),
                None => {
                    let id = uuid::Uuid::new_v4().to_string();
                    st.connections.push(Connection {
                        connection_id: id.clone(),
                        my_did: self.inner.did.clone(),
                        their_did: invitation.did.clone(),
                        their_endpoint: invitation.endpoint.clone(),
                        state: ConnectionState::Invited,
                        created_at: Timestamp::now(),
                    });
                    id
                }
            };
            let c = st.connection_mut(&id).expect("just ensured");
            c.their_endpoint = invitation.endpoint.clone();
            c.advance(ConnectionState::Requested)?;
            self.persist(&st).await?;
            id
        };

        let body = ConnectionBody { connection_id: connection_id.clone(), endpoint: self.inbox() };
        let env = self.sign(MessageType::ConnectionRequest, &invitation.did, None, &body)?;
        match self.exchange(&invitation.endpoint, &invitation.did, &env).await {
            Ok((reply, _)) => {
                Self::expect_kind(&reply, MessageType::ConnectionResponse)?;
                let rb: ConnectionBody = reply.body_as().map_err(AgentError::Protocol)?;
                if rb.connection_id != connection_id {
                    return Err(AgentError::Protocol("connection-response names another connection".into()));
                }
                let mut st = self.inner.state.lock().await;
                let c = st
                    .connection_mut(&connection_id)
                    .ok_or_else(|| AgentError::UnknownConnection(connection_id.clone()))?;
                c.their_endpoint = rb.endpoint;
                c.advance(ConnectionState::Active)?;
                let out = c.clone();
                self.persist(&st).await?;
                info!(peer = %invitation.did, id = %connection_id, "connection active");
                Ok(out)
            }
            Err(e @ (AgentError::PolicyRejected(_) | AgentError::SignatureInvalid(_))) => {
                let mut st = self.inner.state.lock().await;
                st.connections.retain(|c| c.connection_id != connection_id);
                st.rejected.push(RejectedConnection {
                    their_did: invitation.did.clone(),
                    at: Timestamp::now(),
                    reason: e.to_string(),
                });
                self.persist(&st).await?;
                Err(e)
            }
            Err(e) => Err(e),
        }
    }

    async fn active_connection(&self, id: Option<&str>, did: Option<&Did>) -> Result<Connection, AgentError> {
        let st = self.inner.state.lock().await;
        let c = match (id, did) {
            (Some(id), _) => st.connection(id).ok_or_else(|| AgentError::UnknownConnection(id.to_string()))?,
            (None, Some(did)) => st.connection_with(did).ok_or_else(|| AgentError::UnknownConnection(did.text()))?,
            (None, None) => return Err(AgentError::UnknownConnection("no connection or subject given".into())),
        };
        if !c.is_active() {
            return Err(AgentError::ConnectionInactive(c.connection_id.clone()));
        }
        Ok(c.clone())
    }

    /// Issue a credential to the dataset agent on the other end of a
    /// connection and wait for its acknowledgement.
    pub async fn issue(&self, request: IssueRequest) -> Result<VerifiableCredential, AgentError> {
        self.require_role(&[Role::Publisher], "issue")?;
        let conn = self.active_connection(request.connection_id.as_deref(), request.subject.as_ref()).await?;
        if let Some(s) = &request.subject {
            if s != &conn.their_did {
                return Err(AgentError::Protocol(format!("connection {} is with {}, not {s}", conn.connection_id, conn.their_did)));
            }
        }
        let schema = request.schema.unwrap_or_else(CredentialSchema::dataset_provenance_v1);
        let mut claims = request.claims;
        schema.normalize_claims(&mut claims);
        let status_id = uuid::Uuid::new_v4().to_string();
        let options = IssueOptions {
            expiration_date: request.expiration_date,
            status: self.inner.registry_url.as_ref().map(|u| CredentialStatus::new(u, &status_id)),
            ..Default::default()
        };
        let vc = issue_credential(&self.inner.key, &self.inner.did, &conn.their_did, &schema, claims, options)?;
        {
            let mut st = self.inner.state.lock().await;
            st.issued.push(IssuedRecord {
                credential_id: vc.id.clone(),
                status_id,
                subject: conn.their_did.clone(),
                issued_at: vc.issuance_date,
                revoked: false,
            });
            self.persist(&st).await?;
        }
        self.send_credential(&conn.connection_id, &vc.to_value()).await?;
        Ok(vc)
    }

    /// Send `credential` as-is over an active connection. Returns the
    /// acknowledged credential id.
    pub async fn send_credential(&self, connection_id: &str, credential: &Value) -> Result<String, AgentError> {
        let conn = self.active_connection(Some(connection_id), None).await?;
        let body = CredentialIssueBody { credential: credential.clone() };
        let env = self.sign(MessageType::CredentialIssue, &conn.their_did, None, &body)?;
        let (reply, _) = self.exchange(&conn.their_endpoint, &conn.their_did, &env).await?;
        Self::expect_kind(&reply, MessageType::CredentialAck)?;
        let ack: CredentialAckBody = reply.body_as().map_err(AgentError::Protocol)?;
        Ok(ack.credential_id)
    }

    /// Record a fresh challenge and build the proof-request for `target`,
    /// connecting first if the target publishes an agent endpoint.
    pub async fn begin_proof_request(&self, target: &Did, attributes: &[String]) -> Result<PendingProof, AgentError> {
        self.require_role(&[Role::Publisher, Role::User], "request-proof")?;
        if attributes.is_empty() {
            return Err(AgentError::Protocol("no attributes requested".into()));
        }
        let conn = match self.active_connection(None, Some(target)).await {
            Ok(c) => c,
            Err(AgentError::UnknownConnection(_)) | Err(AgentError::ConnectionInactive(_)) => {
                let doc = self
                    .inner
                    .resolver
                    .resolve(target)
                    .await
                    .map_err(|e| AgentError::Unreachable(format!("{target}: {e}")))?;
                let endpoint = doc
                    .agent_endpoint()
                    .ok_or_else(|| AgentError::Unreachable(format!("{target} publishes no agent endpoint")))?;
                self.connect(&Invitation { did: target.clone(), endpoint: endpoint.to_string() }).await?
            }
            Err(e) => return Err(e),
        };
        let challenge = new_challenge();
        let body = ProofRequestBody { challenge: challenge.clone(), requested_attributes: attributes.to_vec() };
        let env = self.sign(MessageType::ProofRequest, target, None, &body)?;
        let now = Timestamp::now();
        {
            let mut st = self.inner.state.lock().await;
            st.prune_nonces(now);
            st.nonces.insert(
                env.id.clone(),
                NonceEntry {
                    challenge,
                    target: target.clone(),
                    requested_attributes: attributes.to_vec(),
                    expires_at: now.plus_secs(self.inner.config.policy.challenge_ttl_secs as i64),
                    consumed: false,
                },
            );
            self.persist(&st).await?;
        }
        Ok(PendingProof { thread_id: env.id.clone(), target: target.clone(), endpoint: conn.their_endpoint, envelope: env })
    }

    /// Ask `target` to prove `attributes` and verify the answer.
    pub async fn request_proof(&self, target: &Did, attributes: &[String]) -> Result<ProofOutcome, AgentError> {
        let pending = self.begin_proof_request(target, attributes).await?;
        let (_, raw) = self.exchange(&pending.endpoint, &pending.target, &pending.envelope).await?;
        self.accept_proof_response(&pending.thread_id, &raw).await
    }

    /// Check a proof-response against the request `thread_id`. The
    /// request's challenge is consumed whatever the outcome.
    pub async fn accept_proof_response(&self, thread_id: &str, raw: &Value) -> Result<ProofOutcome, AgentError> {
        let env = match open_envelope(raw, &self.inner.resolver).await {
            Inbound::Verified(env) => env,
            Inbound::Malformed(why) => return Err(AgentError::Protocol(why)),
            Inbound::Rejected(_, why) => return Err(AgentError::SignatureInvalid(why)),
            Inbound::Unverifiable(_, why) => return Err(AgentError::Unreachable(why)),
        };
        if env.to != self.inner.did {
            return Err(AgentError::Protocol(format!("proof-response is addressed to {}", env.to)));
        }
        Self::expect_kind(&env, MessageType::ProofResponse)?;
        let now = Timestamp::now();
        let entry = {
            let mut st = self.inner.state.lock().await;
            let entry = st.nonces.get_mut(thread_id).ok_or_else(|| AgentError::UnknownRequest(thread_id.into()))?;
            if entry.consumed {
                return Err(AgentError::ChallengeConsumed);
            }
            if now >= entry.expires_at {
                return Err(AgentError::ChallengeExpired);
            }
            entry.consumed = true;
            let entry = entry.clone();
            self.persist(&st).await?;
            entry
        };
        let body: ProofResponseBody = env.body_as().map_err(AgentError::Protocol)?;
        let mut report = verify_presentation_value(&body.presentation, &entry.challenge, &self.inner.resolver, now).await;

        let thread = if env.thid.as_deref() == Some(thread_id) {
            CheckStatus::Pass
        } else {
            CheckStatus::fail(Reason::ChallengeMismatch, "response belongs to a different request")
        };
        report.checks.push(Check::new("thread", thread));
        let responder = if env.from == entry.target && report.holder.as_ref() == Some(&entry.target) {
            CheckStatus::Pass
        } else {
            CheckStatus::fail(Reason::SignerMismatch, format!("answered by {}, asked {}", env.from, entry.target))
        };
        report.checks.push(Check::new("responder", responder));
        let presented: Vec<VerifiableCredential> = body
            .presentation
            .get("verifiableCredential")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(|v| serde_json::from_value(v.clone()).ok()).collect())
            .unwrap_or_default();
        let attributes = if presented.iter().any(|vc| vc.covers(&entry.requested_attributes)) {
            CheckStatus::Pass
        } else {
            CheckStatus::fail(Reason::SchemaMismatch, "no presented credential discloses every requested attribute")
        };
        report.checks.push(Check::new("attributes", attributes));
        report.verdict = verdict(&report.checks);

        match (report.is_valid(), presented.into_iter().next()) {
            (true, Some(credential)) => Ok(ProofOutcome {
                thread_id: thread_id.to_string(),
                issuer: credential.issuer.clone(),
                credential,
                report,
                response: raw.clone(),
            }),
            _ => Err(AgentError::VerificationFailed(Box::new(report))),
        }
    }

    /// Revoke a credential this publisher issued and republish the registry.
    pub async fn revoke(&self, request: &RevokeRequest) -> Result<RevocationRegistry, AgentError> {
        self.require_role(&[Role::Publisher], "revoke")?;
        let mut st = self.inner.state.lock().await;
        let status_id = match (&request.status_id, &request.credential_id) {
            (Some(s), _) => s.clone(),
            (None, Some(id)) => st
                .issued
                .iter()
                .find(|r| &r.credential_id == id)
                .map(|r| r.status_id.clone())
                .ok_or_else(|| AgentError::Protocol(format!("no issued credential {id}")))?,
            (None, None) => return Err(AgentError::Protocol("name a credentialId or statusId".into())),
        };
        let mut reg = self.inner.registry.lock().await;
        let current = reg.as_ref().expect("publisher has a registry");
        let next = current.revoke(&status_id, &self.inner.key)?;
        let bytes = serde_json::to_vec_pretty(&next).expect("registry serializes");
        crate::wallet::write_atomic(&self.inner.registry_path, &bytes).map_err(wallet_err)?;
        *reg = Some(next.clone());
        for r in st.issued.iter_mut().filter(|r| r.status_id == status_id) {
            r.revoked = true;
        }
        self.persist(&st).await?;
        info!(status_id, "revoked");
        Ok(next)
    }

    // ---- inbound ----

    /// Process one envelope posted to `/inbox`. Returns the HTTP status and
    /// the reply, if any.
    pub async fn handle_inbound(&self, raw: Value) -> (StatusCode, Option<Value>) {
        let env = match open_envelope(&raw, &self.inner.resolver).await {
            Inbound::Verified(env) => env,
            Inbound::Malformed(why) => {
                warn!("dropping malformed envelope: {why}");
                let body = ProblemBody { code: ProblemCode::Malformed, detail: why };
                return (
                    StatusCode::BAD_REQUEST,
                    Some(json!({"type": MessageType::ProblemReport.uri(), "body": body})),
                );
            }
            Inbound::Rejected(env, why) => {
                warn!(from = %env.from, kind = %env.message_type, "dropping envelope with bad signature: {why}");
                return self.problem_reply(&env, Problem::new(StatusCode::UNAUTHORIZED, ProblemCode::SignatureInvalid, why));
            }
            Inbound::Unverifiable(env, why) => {
                warn!(from = %env.from, "cannot verify sender: {why}");
                return self.problem_reply(
                    &env,
                    Problem::new(StatusCode::SERVICE_UNAVAILABLE, ProblemCode::SenderUnresolvable, why),
                );
            }
        };
        if env.to != self.inner.did {
            let p = Problem::new(StatusCode::BAD_REQUEST, ProblemCode::WrongRecipient, format!("this agent is {}", self.inner.did));
            return self.problem_reply(&env, p);
        }
        let outcome = match env.kind() {
            Some(MessageType::ConnectionRequest) => self.on_connection_request(&env).await,
            Some(MessageType::CredentialIssue) => self.on_credential_issue(&env).await,
            Some(MessageType::ProofRequest) => self.on_proof_request(&env).await,
            Some(MessageType::ProofResponse) => self.on_proof_response(&env, &raw).await,
            _ => Err(Problem::new(
                StatusCode::BAD_REQUEST,
                ProblemCode::UnsupportedType,
                format!("{} is not accepted here", env.message_type),
            )),
        };
        match outcome {
            Ok(Some(reply)) => (StatusCode::OK, Some(serde_json::to_value(reply).expect("envelope serializes"))),
            Ok(None) => (StatusCode::NO_CONTENT, None),
            Err(p) => {
                debug!(from = %env.from, code = ?p.code, "problem: {}", p.detail);
                self.problem_reply(&env, p)
            }
        }
    }

    fn problem_reply(&self, to: &MessageEnvelope, p: Problem) -> (StatusCode, Option<Value>) {
        let body = ProblemBody { code: p.code, detail: p.detail };
        match self.sign(MessageType::ProblemReport, &to.from, Some(to.id.clone()), &body) {
            Ok(env) => (p.status, Some(serde_json::to_value(env).expect("envelope serializes"))),
            Err(_) => (StatusCode::INTERNAL_SERVER_ERROR, None),
        }
    }

    fn reply(&self, to: &MessageEnvelope, kind: MessageType, body: impl Serialize) -> Result<Option<MessageEnvelope>, Problem> {
        self.sign(kind, &to.from, Some(to.id.clone()), body)
            .map(Some)
            .map_err(|e| Problem::new(StatusCode::INTERNAL_SERVER_ERROR, ProblemCode::Internal, e.to_string()))
    }

    fn internal(e: AgentError) -> Problem {
        Problem::new(StatusCode::INTERNAL_SERVER_ERROR, ProblemCode::Internal, e.to_string())
    }

    fn malformed(detail: String) -> Problem {
        Problem::new(StatusCode::BAD_REQUEST, ProblemCode::Malformed, detail)
    }

    fn role_problem(&self, allowed: &[Role], what: &str) -> Result<(), Problem> {
        self.require_role(allowed, what)
            .map_err(|e| Problem::new(StatusCode::FORBIDDEN, ProblemCode::RoleForbidden, e.to_string()))
    }

    async fn connection_of(&self, peer: &Did) -> Result<Connection, Problem> {
        let st = self.inner.state.lock().await;
        match st.connection_with(peer) {
            Some(c) if c.is_active() => Ok(c.clone()),
            Some(c) => Err(Problem::new(StatusCode::CONFLICT, ProblemCode::ConnectionInactive, c.connection_id.clone())),
            None => Err(Problem::new(StatusCode::NOT_FOUND, ProblemCode::UnknownConnection, format!("no connection with {peer}"))),
        }
    }

    async fn on_connection_request(&self, env: &MessageEnvelope) -> Result<Option<MessageEnvelope>, Problem> {
        let body: ConnectionBody = env.body_as().map_err(Self::malformed)?;
        let mut st = self.inner.state.lock().await;
        if !self.inner.config.policy.auto_accept_connections {
            st.rejected.push(RejectedConnection {
                their_did: env.from.clone(),
                at: Timestamp::now(),
                reason: "autoAcceptConnections is off".into(),
            });
            self.persist(&st).await.map_err(Self::internal)?;
            return Err(Problem::new(StatusCode::FORBIDDEN, ProblemCode::PolicyRejected, "this agent does not accept connections"));
        }
        match st.connection(&body.connection_id) {
            Some(c) if c.their_did == env.from => {}
            Some(_) => return Err(Problem::new(StatusCode::CONFLICT, ProblemCode::Malformed, "connection id already in use")),
            None => {
                // A peer that lost its state starts over; forget the old connection.
                st.connections.retain(|c| c.their_did != env.from);
                st.connections.push(Connection {
                    connection_id: body.connection_id.clone(),
                    my_did: self.inner.did.clone(),
                    their_did: env.from.clone(),
                    their_endpoint: body.endpoint.clone(),
                    state: ConnectionState::Requested,
                    created_at: Timestamp::now(),
                });
            }
        }
        let c = st.connection_mut(&body.connection_id).expect("present");
        c.their_endpoint = body.endpoint;
        c.advance(ConnectionState::Active).map_err(Self::internal)?;
        self.persist(&st).await.map_err(Self::internal)?;
        drop(st);
        info!(peer = %env.from, id = %body.connection_id, "accepted connection");
        self.reply(
            env,
            MessageType::ConnectionResponse,
            ConnectionBody { connection_id: body.connection_id, endpoint: self.inbox() },
        )
    }

    async fn on_credential_issue(&self, env: &MessageEnvelope) -> Result<Option<MessageEnvelope>, Problem> {
        self.role_problem(&[Role::Dataset], "receiving credentials")?;
        self.connection_of(&env.from).await?;
        let body: CredentialIssueBody = env.body_as().map_err(Self::malformed)?;
        let reject = |d: String| Problem::new(StatusCode::UNPROCESSABLE_ENTITY, ProblemCode::CredentialRejected, d);
        let vc: VerifiableCredential =
            serde_json::from_value(body.credential.clone()).map_err(|e| reject(format!("unreadable credential: {e}")))?;
        if vc.issuer != env.from {
            return Err(reject(format!("issuer {} did not send it", vc.issuer)));
        }
        if vc.subject() != &self.inner.did {
            return Err(reject(format!("subject {} is not this agent", vc.subject())));
        }
        let report = verify_credential_value(&body.credential, &self.inner.resolver, Timestamp::now(), VerifyOptions::default()).await;
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| matches!(c.check.as_str(), "signature" | "schema" | "temporal" | "format"))
            .filter(|c| !c.status.is_pass())
            .map(|c| format!("{}: {}", c.check, c.status))
            .collect();
        if !failed.is_empty() {
            warn!(from = %env.from, "rejecting credential: {}", failed.join("; "));
            return Err(reject(failed.join("; ")));
        }
        {
            let mut wallet = self.inner.wallet.lock().await;
            wallet.put_credential(format!("credential:{}", vc.id), vc.clone());
            wallet.save().map_err(|e| Self::internal(e.into()))?;
        }
        info!(id = %vc.id, issuer = %vc.issuer, "stored credential");
        self.reply(env, MessageType::CredentialAck, CredentialAckBody { credential_id: vc.id })
    }

    async fn on_proof_request(&self, env: &MessageEnvelope) -> Result<Option<MessageEnvelope>, Problem> {
        self.role_problem(&[Role::Dataset], "presenting credentials")?;
        self.connection_of(&env.from).await?;
        let body: ProofRequestBody = env.body_as().map_err(Self::malformed)?;
        if body.challenge.is_empty() {
            return Err(Self::malformed("empty challenge".into()));
        }
        let policy = &self.inner.config.policy.sharable_credential_ids;
        let chosen = {
            let wallet = self.inner.wallet.lock().await;
            let mut best: Option<&VerifiableCredential> = None;
            for (_, vc) in wallet.credentials() {
                if !policy.allows(&vc.id) || !vc.covers(&body.requested_attributes) {
                    continue;
                }
                if best.map_or(true, |b| vc.issuance_date > b.issuance_date) {
                    best = Some(vc);
                }
            }
            best.cloned()
        };
        let Some(vc) = chosen else {
            return Err(Problem::new(
                StatusCode::NOT_FOUND,
                ProblemCode::NoMatchingCredential,
                format!("no sharable credential covers {:?}", body.requested_attributes),
            ));
        };
        let vp = create_presentation(&self.inner.key, &self.inner.did, &[vc], &body.challenge)
            .map_err(|e| Self::internal(AgentError::Protocol(e.to_string())))?;
        self.reply(env, MessageType::ProofResponse, ProofResponseBody { presentation: vp.to_value() })
    }

    async fn on_proof_response(&self, env: &MessageEnvelope, raw: &Value) -> Result<Option<MessageEnvelope>, Problem> {
        let thid = env.thid.clone().ok_or_else(|| Self::malformed("proof-response without thid".into()))?;
        match self.accept_proof_response(&thid, raw).await {
            Ok(_) => Ok(None),
            Err(e) => Err(Problem::new(StatusCode::UNPROCESSABLE_ENTITY, ProblemCode::ChallengeRejected, e.to_string())),
        }
    }
}

// ---- HTTP ----

fn admin_error(e: AgentError) -> Response {
    let status = match &e {
        AgentError::RoleForbidden(_) | AgentError::PolicyRejected(_) => StatusCode::FORBIDDEN,
        AgentError::UnknownConnection(_) | AgentError::NoMatchingCredential(_) | AgentError::UnknownRequest(_) => {
            StatusCode::NOT_FOUND
        }
        AgentError::ConnectionInactive(_) => StatusCode::CONFLICT,
        AgentError::Unreachable(_) => StatusCode::BAD_GATEWAY,
        AgentError::Protocol(_) | AgentError::Issue(_) | AgentError::BadConfig(_) => StatusCode::BAD_REQUEST,
        AgentError::SignatureInvalid(_)
        | AgentError::CredentialRejected(_)
        | AgentError::ChallengeExpired
        | AgentError::ChallengeConsumed
        | AgentError::VerificationFailed(_)
        | AgentError::Problem { .. } => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    (status, Json(json!({"code": e.code(), "detail": e.to_string()}))).into_response()
}

async fn loopback_only(ConnectInfo(peer): ConnectInfo<SocketAddr>, req: Request, next: Next) -> Response {
    if peer.ip().is_loopback() {
        next.run(req).await
    } else {
        warn!(%peer, "refusing admin request from non-loopback address");
        (StatusCode::FORBIDDEN, Json(json!({"code": "forbidden", "detail": "admin API is loopback only"}))).into_response()
    }
}

async fn inbox(State(agent): State<Agent>, body: Bytes) -> Response {
    let raw = match crate::canonical::parse_strict(&body) {
        Ok(v) => v,
        Err(e) => {
            warn!("dropping unparseable envelope: {e}");
            let body = ProblemBody { code: ProblemCode::Malformed, detail: e.to_string() };
            return (StatusCode::BAD_REQUEST, Json(json!({"type": MessageType::ProblemReport.uri(), "body": body})))
                .into_response();
        }
    };
    match agent.handle_inbound(raw).await {
        (status, Some(v)) => (status, Json(v)).into_response(),
        (status, None) => status.into_response(),
    }
}

async fn admin_status(State(agent): State<Agent>) -> Json<AgentStatus> {
    Json(agent.status().await)
}

async fn admin_connections(State(agent): State<Agent>) -> Json<Vec<Connection>> {
    Json(agent.connections().await)
}

async fn admin_credentials(State(agent): State<Agent>) -> Json<Vec<VerifiableCredential>> {
    Json(agent.credentials().await)
}

async fn admin_connect(State(agent): State<Agent>, Json(inv): Json<Invitation>) -> Response {
    match agent.connect(&inv).await {
        Ok(c) => Json(c).into_response(),
        Err(e) => admin_error(e),
    }
}

async fn admin_issue(State(agent): State<Agent>, Json(req): Json<IssueRequest>) -> Response {
    match agent.issue(req).await {
        Ok(vc) => Json(vc).into_response(),
        Err(e) => admin_error(e),
    }
}

/// Answers with the presentation report whenever verification ran.
async fn admin_request_proof(State(agent): State<Agent>, Json(req): Json<RequestProof>) -> Response {
    match agent.request_proof(&req.target, &req.attributes).await {
        Ok(outcome) => Json(outcome.report).into_response(),
        Err(AgentError::VerificationFailed(report)) => Json(*report).into_response(),
        Err(e) => admin_error(e),
    }
}

async fn admin_revoke(State(agent): State<Agent>, Json(req): Json<RevokeRequest>) -> Response {
    match agent.revoke(&req).await {
        Ok(reg) => Json(reg).into_response(),
        Err(e) => admin_error(e),
    }
}

async fn serve_registry(State(agent): State<Agent>) -> Response {
    match agent.registry().await {
        Some(reg) => Json(reg).into_response(),
        None => StatusCode::NOT_FOUND.into_response(),
    }
}

async fn serve_did(State(agent): State<Agent>) -> Json<DidDocument> {
    Json(agent.did_document().clone())
}

fn router(agent: Agent) -> Router {
    let admin = Router::new()
        .route("/status", get(admin_status))
        .route("/connections", get(admin_connections))
        .route("/credentials", get(admin_credentials))
        .route("/connect", post(admin_connect))
        .route("/issue", post(admin_issue))
        .route("/request-proof", post(admin_request_proof))
        .route("/revoke", post(admin_revoke))
        .route_layer(middleware::from_fn(loopback_only));
    let mut app = Router::new().route("/inbox", post(inbox)).merge(admin);
    if agent.role() == Role::Publisher {
        app = app.route("/registry.json", get(serve_registry));
    }
    if agent.did().method() == "web" {
        if let Ok(url) = did_web_url(agent.did()) {
            app = app.route(url.path(), get(serve_did));
        }
    }
    app.with_state(agent)
}

/// An agent with its HTTP server running. Dropping it stops the server.
pub struct RunningAgent {
    agent: Agent,
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl std::ops::Deref for RunningAgent {
    type Target = Agent;

    fn deref(&self) -> &Agent {
        &self.agent
    }
}

impl RunningAgent {
    pub fn agent(&self) -> &Agent {
        &self.agent
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL of the admin API.
    pub fn admin_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stop accepting requests and wait for the server to finish.
    pub async fn shutdown(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(mut task) = self.task.take() {
            if tokio::time::timeout(Duration::from_secs(5), &mut task).await.is_err() {
                task.abort();
                let _ = task.await;
            }
        }
    }

    /// Run until the server stops on its own or `signal` completes.
    pub async fn serve_until(mut self, signal: impl std::future::Future<Output = ()>) -> std::io::Result<()> {
        let mut task = self.task.take().expect("server task present");
        tokio::select! {
            res = &mut task => res.map_err(std::io::Error::other)?,
            _ = signal => {
                if let Some(tx) = self.shutdown.take() {
                    let _ = tx.send(());
                }
                task.await.map_err(std::io::Error::other)?
            }
        }
    }
}

impl Drop for RunningAgent {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
    }
}

/// Open the wallet, bind the listen address and start serving.
pub async fn provision(config: AgentConfig) -> Result<RunningAgent, AgentError> {
    config.validate()?;
    let listener = TcpListener::bind(config.listen).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => AgentError::PortInUse(config.listen),
        _ => AgentError::Io(format!("bind {}: {e}", config.listen)),
    })?;
    let addr = listener.local_addr().map_err(|e| AgentError::Io(e.to_string()))?;
    let agent = Agent::open(config, addr)?;
    info!(role = %agent.role(), did = %agent.did(), %addr, "agent listening");
    let app = router(agent.clone()).into_make_service_with_connect_info::<SocketAddr>();
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    Ok(RunningAgent { agent, addr, shutdown: Some(tx), task: Some(task) })
}
