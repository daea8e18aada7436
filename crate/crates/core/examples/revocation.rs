//! Revoke a credential through a signed registry.

use std::sync::Arc;

use datacred::did::key::did_key_for;
use datacred::did::{KeyBackend, StaticFetcher};
use datacred::fingerprint::fingerprint_bytes;
use datacred::vc::{
    issue_credential, CredentialSchema, CredentialStatus, IssueOptions, RevocationRegistry, DATA_ETHICALLY_SOURCED,
    HASH_OF_DATA,
};
use datacred::{verify_credential, KeyPair, Resolver, Timestamp};

const REGISTRY_URL: &str = "https://uni.example/registry.json";

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let key = KeyPair::random();
    let issuer = did_key_for(&key.public_key());
    let subject = did_key_for(&KeyPair::random().public_key());
    let claims = [
        (HASH_OF_DATA.to_string(), fingerprint_bytes(b"v1").digest),
        (DATA_ETHICALLY_SOURCED.to_string(), "YES".to_string()),
    ]
    .into();
    let options = IssueOptions { status: Some(CredentialStatus::new(REGISTRY_URL, "batch-7")), ..Default::default() };
    let vc = issue_credential(&key, &issuer, &subject, &CredentialSchema::dataset_provenance_v1(), claims, options)?;

    // Stand-in for the publisher's web server.
    let registry_host = Arc::new(StaticFetcher::new());
    let resolver = Resolver::builder().backend(Arc::new(KeyBackend)).document_fetcher(registry_host.clone()).build();

    let registry = RevocationRegistry::new(&issuer, &key, None)?;
    registry_host.insert(REGISTRY_URL, serde_json::to_vec(&registry)?);
    let before = verify_credential(&vc, &resolver, Timestamp::now(), Default::default()).await;
    println!("before: {}", before.verdict);

    let registry = registry.revoke("batch-7", &key)?;
    registry_host.insert(REGISTRY_URL, serde_json::to_vec(&registry)?);
    let after = verify_credential(&vc, &resolver, Timestamp::now(), Default::default()).await;
    println!("after:  {} {:?}", after.verdict, after.reasons());
    Ok(())
}
