mod common;

use std::time::Instant;

use common::*;
use datacred::agent::{
    provision, AdminClient, AgentError, ConnectionState, IssueRequest, MessageEnvelope, MessageType, RevokeRequest,
    Role,
};
use datacred::fingerprint::fingerprint_bytes;
use datacred::report::{Reason, Verdict};
use datacred::vc::DATA_ETHICALLY_SOURCED;

fn issue_request(connection_id: &str) -> IssueRequest {
    IssueRequest {
        connection_id: Some(connection_id.into()),
        claims: listing_claims(&fingerprint_bytes(b"faces dataset").digest),
        ..Default::default()
    }
}

#[tokio::test]
async fn publisher_dataset_user_round_trip_survives_restart() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let Trio { publisher, dataset, user } = trio(dir.path()).await;
    assert_eq!(publisher.did().method(), "web");

    let fresh = dataset.status().await;
    assert_eq!((fresh.role, fresh.connections, fresh.credentials), (Role::Dataset, 0, 0));

    let conn = publisher.connect(&dataset.invitation()).await.unwrap();
    assert_eq!(conn.state, ConnectionState::Active);
    let theirs = dataset.connections().await;
    assert_eq!(theirs.len(), 1);
    assert_eq!(theirs[0].state, ConnectionState::Active);
    assert_eq!(&theirs[0].their_did, publisher.did());

    let vc = publisher.issue(issue_request(&conn.connection_id)).await.unwrap();
    let held = dataset.credentials().await;
    assert_eq!(held.len(), 1);
    assert_eq!(held[0].claim(DATA_ETHICALLY_SOURCED), Some("YES"));
    assert_eq!(held[0].id, vc.id);

    // Restart the dataset agent on the same address with the same wallet.
    let addr = dataset.local_addr();
    let did = dataset.did().clone();
    dataset.shutdown().await;
    let dataset = provision(config(dir.path(), "dataset", Role::Dataset, addr)).await.unwrap();
    assert_eq!(dataset.did(), &did);
    assert_eq!(dataset.credentials().await.len(), 1);

    user.connect(&dataset.invitation()).await.unwrap();
    let outcome = user.request_proof(dataset.did(), &both_attributes()).await.unwrap();
    assert_eq!(outcome.report.verdict, Verdict::Valid);
    assert_eq!(&outcome.issuer, publisher.did());
    assert!(started.elapsed().as_secs() < 10);
}

#[tokio::test]
async fn replayed_response_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let Trio { publisher, dataset, user } = trio(dir.path()).await;
    let conn = publisher.connect(&dataset.invitation()).await.unwrap();
    publisher.issue(issue_request(&conn.connection_id)).await.unwrap();
    user.connect(&dataset.invitation()).await.unwrap();

    let first = user.request_proof(dataset.did(), &both_attributes()).await.unwrap();
    let second = user.begin_proof_request(dataset.did(), &both_attributes()).await.unwrap();
    match user.accept_proof_response(&second.thread_id, &first.response).await {
        Err(AgentError::VerificationFailed(report)) => {
            assert!(report.reasons().contains(&Reason::ChallengeMismatch), "{report:#?}")
        }
        other => panic!("replay accepted: {other:?}"),
    }
    assert!(matches!(
        user.accept_proof_response(&first.thread_id, &first.response).await,
        Err(AgentError::ChallengeConsumed)
    ));
}

#[tokio::test]
async fn missing_attribute_and_revocation() {
    let dir = tempfile::tempdir().unwrap();
    let Trio { publisher, dataset, user } = trio(dir.path()).await;
    let conn = publisher.connect(&dataset.invitation()).await.unwrap();
    let vc = publisher.issue(issue_request(&conn.connection_id)).await.unwrap();
    user.connect(&dataset.invitation()).await.unwrap();

    assert!(matches!(
        user.request_proof(dataset.did(), &["License".to_string()]).await,
        Err(AgentError::NoMatchingCredential(_))
    ));

    assert!(user.request_proof(dataset.did(), &both_attributes()).await.is_ok());
    publisher.revoke(&RevokeRequest { credential_id: Some(vc.id.clone()), status_id: None }).await.unwrap();
    match user.request_proof(dataset.did(), &both_attributes()).await {
        Err(AgentError::VerificationFailed(report)) => {
            assert_eq!(report.verdict, Verdict::Invalid);
            assert_eq!(report.credentials[0].reasons(), vec![Reason::Revoked]);
        }
        other => panic!("revoked credential accepted: {other:?}"),
    }
}

#[tokio::test]
async fn tampered_credential_in_flight_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let Trio { publisher, dataset, .. } = trio(dir.path()).await;
    let conn = publisher.connect(&dataset.invitation()).await.unwrap();
    let vc = publisher.issue(issue_request(&conn.connection_id)).await.unwrap();
    let mut forged = vc.to_value();
    forged["credentialSubject"][DATA_ETHICALLY_SOURCED] = "NO".into();
    forged["id"] = "urn:uuid:forged".into();
    let err = publisher.send_credential(&conn.connection_id, &forged).await.unwrap_err();
    assert!(matches!(err, AgentError::CredentialRejected(_)), "{err}");
    assert_eq!(dataset.credentials().await.len(), 1);
}

#[tokio::test]
async fn corrupted_handshake_signature() {
    let dir = tempfile::tempdir().unwrap();
    let Trio { publisher, dataset, .. } = trio(dir.path()).await;
    let key = datacred::KeyPair::random();
    let me = datacred::did::key::did_key_for(&key.public_key());
    let body = datacred::agent::ConnectionBody { connection_id: "c-1".into(), endpoint: publisher.inbox() };
    let env = MessageEnvelope::signed(MessageType::ConnectionRequest, &me, dataset.did(), None, &body, &key).unwrap();
    let mut raw = serde_json::to_value(&env).unwrap();
    let sig = raw["signature"]["signatureValue"].as_str().unwrap().to_string();
    let flipped = if sig.ends_with('1') { format!("{}2", &sig[..sig.len() - 1]) } else { format!("{}1", &sig[..sig.len() - 1]) };
    raw["signature"]["signatureValue"] = flipped.into();
    let resp = reqwest::Client::new().post(dataset.inbox()).json(&raw).send().await.unwrap();
    assert_eq!(resp.status(), 401);
    let reply: serde_json::Value = resp.json().await.unwrap();
    assert_eq!(reply["body"]["code"], "signature-invalid");
    assert!(dataset.connections().await.is_empty());
}

#[tokio::test]
async fn policy_roles_and_ports() {
    let dir = tempfile::tempdir().unwrap();
    let mut closed = config(dir.path(), "closed", Role::Dataset, loopback());
    closed.policy.auto_accept_connections = false;
    let closed = provision(closed).await.unwrap();
    let user = provision(config(dir.path(), "user", Role::User, loopback())).await.unwrap();
    assert!(matches!(user.connect(&closed.invitation()).await, Err(AgentError::PolicyRejected(_))));
    assert!(closed.connections().await.is_empty());
    assert!(user.connections().await.is_empty());

    assert!(matches!(closed.connect(&user.invitation()).await, Err(AgentError::RoleForbidden(_))));
    assert!(matches!(user.revoke(&RevokeRequest::default()).await, Err(AgentError::RoleForbidden(_))));

    let taken = closed.local_addr();
    let clash = provision(config(dir.path(), "other", Role::Dataset, taken)).await;
    assert!(matches!(clash, Err(AgentError::PortInUse(a)) if a == taken));
}

#[tokio::test]
async fn issuance_needs_active_connection() {
    let dir = tempfile::tempdir().unwrap();
    let mut pc = config(dir.path(), "publisher", Role::Publisher, loopback());
    pc.did = datacred::agent::DidConfig::Web { domain: None, path: vec![] };
    let publisher = provision(pc).await.unwrap();
    let ghost = datacred::agent::Invitation {
        did: datacred::did::key::did_key_for(&datacred::KeyPair::random().public_key()),
        endpoint: "http://127.0.0.1:9/inbox".into(),
    };
    assert!(matches!(publisher.connect(&ghost).await, Err(AgentError::Unreachable(_))));
    let pending = publisher.connections().await;
    assert_eq!(pending[0].state, ConnectionState::Requested);
    let err = publisher.issue(issue_request(&pending[0].connection_id)).await.unwrap_err();
    assert!(matches!(err, AgentError::ConnectionInactive(_)), "{err}");
}

#[tokio::test]
async fn admin_api() {
    let dir = tempfile::tempdir().unwrap();
    let Trio { publisher, dataset, user } = trio(dir.path()).await;
    let p = AdminClient::new(publisher.admin_url());
    let d = AdminClient::new(dataset.admin_url());
    let u = AdminClient::new(user.admin_url());

    let status = p.status().await.unwrap();
    assert_eq!(status.role, Role::Publisher);
    assert_eq!(status.connections, 0);
    let conn = p.connect(&dataset.invitation()).await.unwrap();
    let vc = p.issue(&issue_request(&conn.connection_id)).await.unwrap();
    assert_eq!(d.credentials().await.unwrap().len(), 1);
    assert_eq!(d.connections().await.unwrap().len(), 1);

    u.connect(&dataset.invitation()).await.unwrap();
    let report = u.request_proof(dataset.did(), &both_attributes()).await.unwrap();
    assert_eq!(report.verdict, Verdict::Valid);
    p.revoke(&RevokeRequest { credential_id: Some(vc.id), status_id: None }).await.unwrap();
    let report = u.request_proof(dataset.did(), &both_attributes()).await.unwrap();
    assert_eq!(report.verdict, Verdict::Invalid);
    assert!(d.revoke(&RevokeRequest::default()).await.is_err());
}
