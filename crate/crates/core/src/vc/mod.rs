//! Verifiable credentials describing datasets.
//!
//! A credential names the publisher as issuer and the dataset's DID as
//! subject. The `Hash of Data` claim ties it to the dataset content.

mod registry;
mod schema;
mod verify;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::did::{Did, KeyPurpose};
use crate::fingerprint::{self, DataSource, DatasetFingerprint, FingerprintError, FingerprintForm};
use crate::keys::KeyPair;
use crate::proof::{default_verification_method, sign_serializable, Proof, ProofError};
use crate::time::Timestamp;

pub use registry::{RevocationRegistry, RevokeError, REGISTRY_STATUS_TYPE};
pub use schema::{
    Attribute, AttributeKind, CredentialSchema, DATASET_PROVENANCE_V1, DATA_ETHICALLY_SOURCED, HASH_OF_DATA,
};
pub use verify::{verify_credential, verify_credential_value, VerificationReport, VerifyOptions};

pub const CREDENTIALS_CONTEXT: &str = "https://www.w3.org/2018/credentials/v1";
pub const VERIFIABLE_CREDENTIAL: &str = "VerifiableCredential";
pub const DATASET_CREDENTIAL: &str = "DatasetCredential";

#[derive(Debug, Error)]
pub enum IssueError {
    #[error("claims do not match schema: {0}")]
    SchemaMismatch(String),
    #[error("bad dates: {0}")]
    BadDates(String),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

#[derive(Debug, Error)]
pub enum BindingError {
    #[error("credential has no {HASH_OF_DATA:?} claim")]
    NoHashClaim,
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialSubject {
    pub id: Did,
    #[serde(flatten)]
    pub claims: BTreeMap<String, String>,
}

/// Pointer to the issuer's revocation registry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CredentialStatus {
    /// Registry URL.
    pub id: String,
    #[serde(rename = "type")]
    pub status_type: String,
    pub status_id: String,
}

impl CredentialStatus {
    pub fn new(registry_url: impl Into<String>, status_id: impl Into<String>) -> Self {
        Self {
            id: registry_url.into(),
            status_type: REGISTRY_STATUS_TYPE.into(),
            status_id: status_id.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifiableCredential {
    #[serde(rename = "@context")]
    pub context: Vec<String>,
    pub id: String,
    #[serde(rename = "type")]
    pub types: Vec<String>,
    pub issuer: Did,
    pub issuance_date: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expiration_date: Option<Timestamp>,
    pub credential_subject: CredentialSubject,
    pub credential_schema: CredentialSchema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub credential_status: Option<CredentialStatus>,
    pub proof: Proof,
    /// Members this crate does not model. Kept so they stay covered by the
    /// signature on re-serialization.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl VerifiableCredential {
    pub fn claim(&self, name: &str) -> Option<&str> {
        self.credential_subject.claims.get(name).map(String::as_str)
    }

    pub fn subject(&self) -> &Did {
        &self.credential_subject.id
    }

    pub fn covers(&self, attributes: &[impl AsRef<str>]) -> bool {
        attributes.iter().all(|a| self.credential_subject.claims.contains_key(a.as_ref()))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("credential serializes")
    }
}

#[derive(Debug, Clone, Default)]
pub struct IssueOptions {
    pub expiration_date: Option<Timestamp>,
    pub status: Option<CredentialStatus>,
    /// Defaults to now.
    pub issuance_date: Option<Timestamp>,
    /// Defaults to a fresh `urn:uuid:`.
    pub id: Option<String>,
    /// Defaults to [`default_verification_method`] for the issuer.
    pub verification_method: Option<String>,
}

/// Build and sign a credential. The caller asserts that `issuer_key` is
/// the key published in `issuer_did`'s document.
pub fn issue_credential(
    issuer_key: &KeyPair,
    issuer_did: &Did,
    subject_did: &Did,
    schema: &CredentialSchema,
    claims: BTreeMap<String, String>,
    options: IssueOptions,
) -> Result<VerifiableCredential, IssueError> {
    schema.check_claims(&claims).map_err(IssueError::SchemaMismatch)?;
    let issued = options.issuance_date.unwrap_or_else(Timestamp::now);
    if let Some(exp) = options.expiration_date {
        if exp <= issued {
            return Err(IssueError::BadDates(format!("expiration {exp} is not after issuance {issued}")));
        }
    }
    let method = options.verification_method.unwrap_or_else(|| default_verification_method(issuer_did));
    let mut vc = VerifiableCredential {
        context: vec![CREDENTIALS_CONTEXT.into()],
        id: options.id.unwrap_or_else(|| format!("urn:uuid:{}", uuid::Uuid::new_v4())),
        types: vec![VERIFIABLE_CREDENTIAL.into(), DATASET_CREDENTIAL.into()],
        issuer: issuer_did.clone(),
        issuance_date: issued,
        expiration_date: options.expiration_date,
        credential_subject: CredentialSubject { id: subject_did.clone(), claims },
        credential_schema: schema.clone(),
        credential_status: options.status,
        proof: Proof::new(method, KeyPurpose::AssertionMethod, issued),
        extra: Map::new(),
    };
    vc.proof.signature_value = sign_serializable(&vc, "proof", issuer_key)?;
    Ok(vc)
}

/// Compare the credential's `Hash of Data` claim with the data at hand.
///
/// A directory is compared by its tree digest, anything else by file
/// digest. The claim carries no manifest, so per-file detail is absent.
pub fn check_binding_claim(
    vc: &VerifiableCredential,
    data: DataSource<'_>,
) -> Result<fingerprint::BindingReport, BindingError> {
    let claim = vc.claim(HASH_OF_DATA).ok_or(BindingError::NoHashClaim)?;
    let form = match data {
        DataSource::Path(p) if p.is_dir() => FingerprintForm::Tree,
        _ => FingerprintForm::File,
    };
    let fp = DatasetFingerprint {
        algorithm: fingerprint::SHA256.into(),
        digest: fingerprint::normalize_digest(claim),
        form,
        manifest: None,
    };
    Ok(fingerprint::check_binding(&fp, data)?)
}
