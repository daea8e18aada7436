//! Write a bundle with everything needed to verify a credential, then
//! verify it without touching the network.

use datacred::bundle::{write_bundle, Bundle};
use datacred::fingerprint::fingerprint_bytes;
use datacred::vc::{
    issue_credential, CredentialSchema, CredentialStatus, IssueOptions, RevocationRegistry, DATA_ETHICALLY_SOURCED,
    HASH_OF_DATA,
};
use datacred::{Did, DidDocument, KeyPair, Timestamp};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let key = KeyPair::random();
    let issuer = Did::parse("did:web:uniofscience.com")?;
    let issuer_doc = DidDocument::new_ed25519(&issuer, &key.public_key());
    let subject = Did::parse("did:web:uniofscience.com:datasets:faces")?;
    let claims = [
        (HASH_OF_DATA.to_string(), fingerprint_bytes(b"faces").digest),
        (DATA_ETHICALLY_SOURCED.to_string(), "YES".to_string()),
    ]
    .into();
    let options = IssueOptions {
        status: Some(CredentialStatus::new("https://uniofscience.com/registry.json", "faces-1")),
        ..Default::default()
    };
    let vc = issue_credential(&key, &issuer, &subject, &CredentialSchema::dataset_provenance_v1(), claims, options)?;
    let registry = RevocationRegistry::new(&issuer, &key, None)?;

    let tmp = tempfile::tempdir()?;
    let dir = tmp.path().join("bundle");
    write_bundle(&dir, &vc, &issuer_doc, &[], Some(&registry))?;
    for entry in std::fs::read_dir(&dir)? {
        println!("  {}", entry?.file_name().to_string_lossy());
    }

    let bundle = Bundle::load(&dir)?;
    let report = bundle.verify(Timestamp::now(), Default::default()).await;
    println!(
        "verdict {} with {} lookups, {} over the network",
        report.verdict,
        bundle.resolver().fetch_count(),
        bundle.resolver().network_fetch_count()
    );
    Ok(())
}
