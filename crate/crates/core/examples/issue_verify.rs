//! Issue a dataset credential and verify it, then show what tampering does.

use datacred::did::key::did_key_for;
use datacred::fingerprint::fingerprint_bytes;
use datacred::vc::{
    issue_credential, verify_credential_value, CredentialSchema, IssueOptions, DATA_ETHICALLY_SOURCED, HASH_OF_DATA,
};
use datacred::{verify_credential, KeyPair, Resolver, Timestamp};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let university = KeyPair::random();
    let issuer = did_key_for(&university.public_key());
    let dataset = did_key_for(&KeyPair::random().public_key());

    let digest = fingerprint_bytes(b"id,label\n1,cat\n").digest;
    let claims = [(HASH_OF_DATA, digest.as_str()), (DATA_ETHICALLY_SOURCED, "YES")]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let vc = issue_credential(
        &university,
        &issuer,
        &dataset,
        &CredentialSchema::dataset_provenance_v1(),
        claims,
        IssueOptions::default(),
    )?;
    println!("{}", serde_json::to_string_pretty(&vc)?);

    let resolver = Resolver::standard(false);
    let report = verify_credential(&vc, &resolver, Timestamp::now(), Default::default()).await;
    println!("\nverdict: {}", report.verdict);
    for c in &report.checks {
        println!("  {:<11} {}", c.check, c.status);
    }

    let mut forged = vc.to_value();
    forged["credentialSubject"][DATA_ETHICALLY_SOURCED] = "NO".into();
    let report = verify_credential_value(&forged, &resolver, Timestamp::now(), Default::default()).await;
    println!("\nforged verdict: {} {:?}", report.verdict, report.reasons());
    Ok(())
}
