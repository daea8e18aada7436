//! A verifier hands out a challenge; the dataset answers with a presentation.
//! Replaying that presentation against a new challenge fails.

use datacred::did::key::did_key_for;
use datacred::fingerprint::fingerprint_bytes;
use datacred::vc::{issue_credential, CredentialSchema, IssueOptions, DATA_ETHICALLY_SOURCED, HASH_OF_DATA};
use datacred::vp::new_challenge;
use datacred::{create_presentation, verify_presentation, KeyPair, Resolver, Timestamp};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let issuer_key = KeyPair::random();
    let issuer = did_key_for(&issuer_key.public_key());
    let dataset_key = KeyPair::random();
    let dataset = did_key_for(&dataset_key.public_key());

    let claims = [
        (HASH_OF_DATA.to_string(), fingerprint_bytes(b"rows").digest),
        (DATA_ETHICALLY_SOURCED.to_string(), "YES".to_string()),
    ]
    .into();
    let vc = issue_credential(
        &issuer_key,
        &issuer,
        &dataset,
        &CredentialSchema::dataset_provenance_v1(),
        claims,
        IssueOptions::default(),
    )?;

    let resolver = Resolver::standard(false);
    let challenge = new_challenge();
    let vp = create_presentation(&dataset_key, &dataset, &[vc], &challenge)?;
    let report = verify_presentation(&vp, &challenge, &resolver, Timestamp::now()).await;
    println!("challenge {challenge}: {}", report.verdict);

    let next = new_challenge();
    let replay = verify_presentation(&vp, &next, &resolver, Timestamp::now()).await;
    println!("replayed against {next}: {} {:?}", replay.verdict, replay.reasons());
    Ok(())
}
