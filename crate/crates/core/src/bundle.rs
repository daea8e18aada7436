//! Self-contained credential packages that verify without network access.
//!
//! A bundle is a directory:
//!
//! ```text
//! credential.json     the signed credential
//! did.json            the issuer's DID document
//! dids/*.json         further DID documents, if any
//! registry.json       the issuer's revocation registry, optional
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use crate::did::{DidDocument, DirectoryBackend, KeyBackend, Resolver, StaticFetcher};
use crate::time::Timestamp;
use crate::vc::{verify_credential_value, RevocationRegistry, VerifiableCredential, VerificationReport, VerifyOptions};
use crate::wallet::write_atomic;

pub const CREDENTIAL_FILE: &str = "credential.json";
pub const ISSUER_FILE: &str = "did.json";
pub const REGISTRY_FILE: &str = "registry.json";
pub const EXTRA_DIDS_DIR: &str = "dids";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("issuer document {doc} does not match credential issuer {issuer}")]
    IssuerMismatch { doc: String, issuer: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BundleError + '_ {
    move |source| BundleError::Io { path: path.to_path_buf(), source }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), BundleError> {
    let bytes = serde_json::to_vec_pretty(value).expect("bundle member serializes");
    write_atomic(path, &bytes).map_err(|e| match e {
        crate::wallet::WalletError::Io { path, source } => BundleError::Io { path, source },
        other => BundleError::Malformed { path: path.to_path_buf(), detail: other.to_string() },
    })
}

/// Write a bundle to `dir`, creating it if needed.
pub fn write_bundle(
    dir: &Path,
    credential: &VerifiableCredential,
    issuer_document: &DidDocument,
    extra_documents: &[DidDocument],
    registry: Option<&RevocationRegistry>,
) -> Result<(), BundleError> {
    if issuer_document.id != credential.issuer {
        return Err(BundleError::IssuerMismatch {
            doc: issuer_document.id.text(),
            issuer: credential.issuer.text(),
        });
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(&dir.join(CREDENTIAL_FILE), credential)?;
    write_json(&dir.join(ISSUER_FILE), issuer_document)?;
    for (i, doc) in extra_documents.iter().enumerate() {
        write_json(&dir.join(EXTRA_DIDS_DIR).join(format!("{i}.json")), doc)?;
    }
    if let Some(reg) = registry {
        write_json(&dir.join(REGISTRY_FILE), reg)?;
    }
    Ok(())
}

/// A loaded bundle: the credential as stored plus an offline resolver.
pub struct Bundle {
    pub dir: PathBuf,
    pub credential: Value,
    resolver: Resolver,
}

impl std::fmt::Debug for Bundle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bundle").field("dir", &self.dir).finish_non_exhaustive()
    }
}

impl Bundle {
    pub fn load(dir: &Path) -> Result<Self, BundleError> {
        let path = dir.join(CREDENTIAL_FILE);
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let credential = crate::canonical::parse_strict(&bytes)
            .map_err(|e| BundleError::Malformed { path: path.clone(), detail: e.to_string() })?;
        let resolver = offline_resolver(dir)?;
        Ok(Self { dir: dir.to_path_buf(), credential, resolver })
    }

    /// Resolver restricted to the bundle's contents.
    pub fn resolver(&self) -> &Resolver {
        &self.resolver
    }

    pub async fn verify(&self, at: Timestamp, options: VerifyOptions) -> VerificationReport {
        verify_credential_value(&self.credential, &self.resolver, at, options).await
    }
}

/// `did:key` locally, other DIDs from the directory, and `registry.json`
/// served for any registry URL. Never touches the network.
pub fn offline_resolver(dir: &Path) -> Result<Resolver, BundleError> {
    let docs = DirectoryBackend::open(dir)
        .map_err(|e| BundleError::Malformed { path: dir.to_path_buf(), detail: e.to_string() })?;
    let registry_path = dir.join(REGISTRY_FILE);
    let fetcher = match fs::read(&registry_path) {
        Ok(bytes) => StaticFetcher::with_fallback(bytes),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => StaticFetcher::new(),
        Err(e) => return Err(io_err(&registry_path)(e)),
    };
    Ok(Resolver::builder()
        .backend(Arc::new(KeyBackend))
        .backend(Arc::new(docs))
        .document_fetcher(Arc::new(fetcher))
        .build())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::did::key::did_key_for;
    use crate::did::Did;
    use crate::fingerprint::fingerprint_bytes;
    use crate::keys::KeyPair;
    use crate::report::{Reason, Verdict};
    use crate::vc::{issue_credential, CredentialSchema, CredentialStatus, IssueOptions, DATA_ETHICALLY_SOURCED, HASH_OF_DATA};

    fn web_issued(status: bool) -> (KeyPair, VerifiableCredential, DidDocument) {
        let kp = KeyPair::random();
        let issuer = Did::parse("did:web:uniofscience.com").unwrap();
        let doc = DidDocument::new_ed25519(&issuer, &kp.public_key());
        let claims = BTreeMap::from([
            (HASH_OF_DATA.to_string(), fingerprint_bytes(b"bundle").digest),
            (DATA_ETHICALLY_SOURCED.to_string(), "YES".to_string()),
        ]);
        let opts = IssueOptions {
            status: status.then(|| CredentialStatus::new("https://uniofscience.com/registry.json", "s1")),
            ..Default::default()
        };
        let subject = did_key_for(&KeyPair::random().public_key());
        let vc = issue_credential(&kp, &issuer, &subject, &CredentialSchema::dataset_provenance_v1(), claims, opts).unwrap();
        (kp, vc, doc)
    }

    #[tokio::test]
    async fn verifies_offline() {
        let dir = tempfile::tempdir().unwrap();
        let (kp, vc, doc) = web_issued(true);
        let reg = RevocationRegistry::new(&vc.issuer, &kp, None).unwrap();
        write_bundle(dir.path(), &vc, &doc, &[], Some(&reg)).unwrap();
        let bundle = Bundle::load(dir.path()).unwrap();
        let report = bundle.verify(Timestamp::now(), VerifyOptions::default()).await;
        assert!(report.is_valid(), "{report:#?}");
        assert_eq!(bundle.resolver().network_fetch_count(), 0);
        assert!(bundle.resolver().fetch_count() >= 2);
    }

    #[tokio::test]
    async fn revoked_registry_in_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let (kp, vc, doc) = web_issued(true);
        let reg = RevocationRegistry::new(&vc.issuer, &kp, None).unwrap().revoke("s1", &kp).unwrap();
        write_bundle(dir.path(), &vc, &doc, &[], Some(&reg)).unwrap();
        let report = Bundle::load(dir.path()).unwrap().verify(Timestamp::now(), VerifyOptions::default()).await;
        assert_eq!(report.reasons(), vec![Reason::Revoked]);
    }

    #[tokio::test]
    async fn missing_registry_is_indeterminate() {
        let dir = tempfile::tempdir().unwrap();
        let (_, vc, doc) = web_issued(true);
        write_bundle(dir.path(), &vc, &doc, &[], None).unwrap();
        let report = Bundle::load(dir.path()).unwrap().verify(Timestamp::now(), VerifyOptions::default()).await;
        assert_eq!(report.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn issuer_document_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let (_, vc, _) = web_issued(false);
        let other = DidDocument::new_ed25519(&Did::parse("did:web:elsewhere.org").unwrap(), &KeyPair::random().public_key());
        assert!(matches!(write_bundle(dir.path(), &vc, &other, &[], None), Err(BundleError::IssuerMismatch { .. })));
    }
}
