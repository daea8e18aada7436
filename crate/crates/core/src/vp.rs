//! Holder-signed presentations bound to a verifier challenge.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::did::{Did, KeyPurpose, Resolver};
use crate::keys::KeyPair;
use crate::proof::{default_verification_method, sign_serializable, verify_embedded, Proof, ProofError};
use crate::report::{verdict, Check, CheckStatus, Reason, Verdict};
use crate::time::Timestamp;
use crate::vc::{verify_credential_value, VerifiableCredential, VerificationReport, VerifyOptions, CREDENTIALS_CONTEXT};

pub const VERIFIABLE_PRESENTATION: &str = "VerifiablePresentation";

#[derive(Debug, Error)]
pub enum PresentError {
    #[error("presentation needs at least one credential")]
    EmptyCredentials,
    #[error("presentation needs a non-empty challenge")]
    EmptyChallenge,
    #[error(transparent)]
    Proof(#[from] ProofError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerifiablePresentation {
    #[serde(rename = "@context")]
    pub context: Vec<String>,
    #[serde(rename = "type")]
    pub types: Vec<String>,
    pub holder: Did,
    pub verifiable_credential: Vec<Value>,
    pub proof: Proof,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl VerifiablePresentation {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("presentation serializes")
    }

    pub fn challenge(&self) -> Option<&str> {
        self.proof.challenge.as_deref()
    }
}

/// 16 random bytes as 32 lowercase hex characters.
pub fn new_challenge() -> String {
    let mut bytes = [0u8; 16];
    rand::rngs::OsRng.fill_bytes(&mut bytes);
    hex::encode(bytes)
}

pub fn create_presentation(
    holder_key: &KeyPair,
    holder_did: &Did,
    credentials: &[VerifiableCredential],
    challenge: &str,
) -> Result<VerifiablePresentation, PresentError> {
    if credentials.is_empty() {
        return Err(PresentError::EmptyCredentials);
    }
    if challenge.is_empty() {
        return Err(PresentError::EmptyChallenge);
    }
    let proof = Proof::new(default_verification_method(holder_did), KeyPurpose::Authentication, Timestamp::now())
        .with_challenge(challenge);
    let mut vp = VerifiablePresentation {
        context: vec![CREDENTIALS_CONTEXT.into()],
        types: vec![VERIFIABLE_PRESENTATION.into()],
        holder: holder_did.clone(),
        verifiable_credential: credentials.iter().map(VerifiableCredential::to_value).collect(),
        proof,
        extra: Map::new(),
    };
    vp.proof.signature_value = sign_serializable(&vp, "proof", holder_key)?;
    Ok(vp)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PresentationReport {
    pub holder: Option<Did>,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub credentials: Vec<VerificationReport>,
    /// Issuers of the embedded credentials, in order. The verifier decides
    /// whether to trust them.
    pub issuers: Vec<Did>,
}

impl PresentationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn check(&self, name: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|c| c.check == name).map(|c| &c.status)
    }

    pub fn reasons(&self) -> Vec<Reason> {
        self.checks.iter().filter_map(|c| c.status.reason()).collect()
    }
}

pub async fn verify_presentation(
    vp: &VerifiablePresentation,
    expected_challenge: &str,
    resolver: &Resolver,
    at: Timestamp,
) -> PresentationReport {
    verify_presentation_value(&vp.to_value(), expected_challenge, resolver, at).await
}

/// Verify a presentation exactly as received.
pub async fn verify_presentation_value(
    raw: &Value,
    expected_challenge: &str,
    resolver: &Resolver,
    at: Timestamp,
) -> PresentationReport {
    let vp: VerifiablePresentation = match serde_json::from_value(raw.clone()) {
        Ok(vp) => vp,
        Err(e) => {
            return PresentationReport {
                holder: None,
                verdict: Verdict::Invalid,
                checks: vec![Check::new("format", CheckStatus::fail(Reason::MalformedProof, e.to_string()))],
                credentials: vec![],
                issuers: vec![],
            }
        }
    };
    let mut checks = Vec::with_capacity(4);

    let format = if !vp.types.iter().any(|t| t == VERIFIABLE_PRESENTATION) {
        CheckStatus::fail(Reason::MalformedProof, "type does not include VerifiablePresentation")
    } else if vp.verifiable_credential.is_empty() {
        CheckStatus::fail(Reason::EmptyCredentials, "no credentials presented")
    } else {
        CheckStatus::Pass
    };
    checks.push(Check::new("format", format));

    let sig = verify_embedded(raw, "proof", &vp.holder, KeyPurpose::Authentication, resolver).await;
    checks.push(Check::new("signature", sig.status));

    let challenge = match vp.challenge() {
        Some(c) if !c.is_empty() && c.as_bytes() == expected_challenge.as_bytes() => CheckStatus::Pass,
        Some(c) if !c.is_empty() => CheckStatus::fail(Reason::ChallengeMismatch, format!("challenge {c:?} was not issued for this request")),
        _ => CheckStatus::fail(Reason::ChallengeMismatch, "presentation carries no challenge"),
    };
    checks.push(Check::new("challenge", challenge));

    let mut reports = Vec::with_capacity(vp.verifiable_credential.len());
    for raw_vc in &vp.verifiable_credential {
        reports.push(verify_credential_value(raw_vc, resolver, at, VerifyOptions::default()).await);
    }

    let strangers: Vec<String> = reports
        .iter()
        .filter(|r| r.subject.as_ref() != Some(&vp.holder))
        .map(|r| r.credential_id.clone().unwrap_or_else(|| "<unparsed>".into()))
        .collect();
    let binding = if strangers.is_empty() {
        CheckStatus::Pass
    } else {
        CheckStatus::fail(
            Reason::HolderNotSubject,
            format!("holder {} is not the subject of {}", vp.holder, strangers.join(", ")),
        )
    };
    checks.push(Check::new("holderBinding", binding));

    let credentials = match verdict(reports.iter().flat_map(|r| r.checks.iter())) {
        Verdict::Valid => CheckStatus::Pass,
        Verdict::Indeterminate => CheckStatus::indeterminate("a credential could not be fully checked"),
        Verdict::Invalid => {
            let bad: Vec<String> = reports
                .iter()
                .filter(|r| r.verdict == Verdict::Invalid)
                .map(|r| {
                    let why: Vec<String> = r.reasons().iter().map(ToString::to_string).collect();
                    format!("{} ({})", r.credential_id.as_deref().unwrap_or("<unparsed>"), why.join(", "))
                })
                .collect();
            CheckStatus::fail(Reason::CredentialInvalid, bad.join("; "))
        }
    };
    checks.push(Check::new("credentials", credentials));

    PresentationReport {
        holder: Some(vp.holder.clone()),
        verdict: verdict(&checks),
        issuers: reports.iter().filter_map(|r| r.issuer.clone()).collect(),
        checks,
        credentials: reports,
    }
}
