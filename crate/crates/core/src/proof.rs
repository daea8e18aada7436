//! Embedded Ed25519 proofs over canonical JSON.
//!
//! The signature covers the whole document, proof block included, with
//! only `signatureValue` removed. Credentials, presentations, revocation
//! registries and agent envelopes all use this rule.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::canonical::{canonicalize, CanonicalError};
use crate::did::{split_did_url, Did, KeyPurpose, Resolver};
use crate::keys::{self, KeyPair, Signature};
use crate::report::{CheckStatus, Reason};
use crate::time::Timestamp;

pub const PROOF_TYPE: &str = "Ed25519Signature2018";

#[derive(Debug, Error)]
pub enum ProofError {
    #[error("document is not a JSON object")]
    NotAnObject,
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Proof {
    #[serde(rename = "type")]
    pub proof_type: String,
    pub created: Timestamp,
    pub verification_method: String,
    pub proof_purpose: KeyPurpose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub challenge: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub signature_value: String,
}

impl Proof {
    /// An unsigned proof block.
    pub fn new(verification_method: impl Into<String>, purpose: KeyPurpose, created: Timestamp) -> Self {
        Self {
            proof_type: PROOF_TYPE.into(),
            created,
            verification_method: verification_method.into(),
            proof_purpose: purpose,
            challenge: None,
            signature_value: String::new(),
        }
    }

    pub fn with_challenge(mut self, challenge: impl Into<String>) -> Self {
        self.challenge = Some(challenge.into());
        self
    }
}

/// Default verification method id for a signer DID: the `did:key`
/// fragment form, or the bare DID (the shape published for `did:web`).
pub fn default_verification_method(did: &Did) -> String {
    if did.method() == "key" {
        format!("{did}#{}", did.method_specific_id())
    } else {
        did.text()
    }
}

/// Canonical bytes that the signature in `doc[field]` covers.
pub fn signing_input(doc: &Value, field: &str) -> Result<Vec<u8>, ProofError> {
    let mut doc = doc.clone();
    let obj = doc.as_object_mut().ok_or(ProofError::NotAnObject)?;
    if let Some(Value::Object(proof)) = obj.get_mut(field) {
        proof.remove("signatureValue");
    }
    Ok(canonicalize(&doc)?)
}

/// Sign `doc` in place: `doc[field]` must already hold the unsigned proof.
pub fn sign_in_place(doc: &mut Value, field: &str, key: &KeyPair) -> Result<Signature, ProofError> {
    let input = signing_input(doc, field)?;
    let sig = key.sign(&input);
    let proof = doc
        .get_mut(field)
        .and_then(Value::as_object_mut)
        .ok_or(ProofError::NotAnObject)?;
    proof.insert("signatureValue".into(), Value::String(sig.to_base58()));
    Ok(sig)
}

/// Serialize `doc`, sign it, and return the signature value.
pub(crate) fn sign_serializable<T: Serialize>(
    doc: &T,
    field: &str,
    key: &KeyPair,
) -> Result<String, ProofError> {
    let mut value = serde_json::to_value(doc).expect("document serializes");
    Ok(sign_in_place(&mut value, field, key)?.to_base58())
}

/// Result of checking one embedded proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofCheck {
    pub status: CheckStatus,
    /// Set when an `authentication` key was accepted for an assertion.
    pub lenient_key: bool,
}

impl ProofCheck {
    fn fail(reason: Reason, detail: impl Into<String>) -> Self {
        Self { status: CheckStatus::fail(reason, detail), lenient_key: false }
    }
}

/// Verify the proof at `doc[field]`, which must be made by `signer` for
/// `purpose`.
///
/// Network failures while resolving the signer yield Indeterminate; every
/// other problem is a failure.
pub async fn verify_embedded(
    doc: &Value,
    field: &str,
    signer: &Did,
    purpose: KeyPurpose,
    resolver: &Resolver,
) -> ProofCheck {
    let Some(raw) = doc.get(field) else {
        return ProofCheck::fail(Reason::MalformedProof, format!("missing {field}"));
    };
    let proof: Proof = match serde_json::from_value(raw.clone()) {
        Ok(p) => p,
        Err(e) => return ProofCheck::fail(Reason::MalformedProof, e.to_string()),
    };
    if proof.proof_type != PROOF_TYPE {
        return ProofCheck::fail(Reason::MalformedProof, format!("unsupported proof type {}", proof.proof_type));
    }
    if proof.proof_purpose != purpose {
        return ProofCheck::fail(Reason::MalformedProof, format!("proof purpose must be {purpose:?}"));
    }
    let sig = match Signature::from_base58(&proof.signature_value) {
        Ok(s) => s,
        Err(e) => return ProofCheck::fail(Reason::MalformedProof, e.to_string()),
    };
    let method_did = match split_did_url(&proof.verification_method) {
        Ok((did, _)) => did,
        Err(e) => return ProofCheck::fail(Reason::MalformedProof, e.to_string()),
    };
    if &method_did != signer {
        return ProofCheck::fail(
            Reason::SignerMismatch,
            format!("verification method belongs to {method_did}, expected {signer}"),
        );
    }
    let doc_for_signer = match resolver.resolve(signer).await {
        Ok(d) => d,
        Err(e) if e.is_transient() => {
            return ProofCheck { status: CheckStatus::indeterminate(e.to_string()), lenient_key: false }
        }
        Err(e) => return ProofCheck::fail(Reason::IssuerUnresolvable, e.to_string()),
    };
    let Some(found) = doc_for_signer.find_key(&proof.verification_method, purpose) else {
        return ProofCheck::fail(
            Reason::KeyNotFound,
            format!("{} not in {signer} document", proof.verification_method),
        );
    };
    let input = match signing_input(doc, field) {
        Ok(i) => i,
        Err(e) => return ProofCheck::fail(Reason::MalformedProof, e.to_string()),
    };
    if keys::verify(&found.key, &input, &sig) {
        ProofCheck { status: CheckStatus::Pass, lenient_key: found.lenient }
    } else {
        ProofCheck::fail(Reason::SignatureInvalid, "signature does not verify")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::did::key::did_key_for;
    use serde_json::json;
    use std::sync::Arc;

    fn resolver() -> Resolver {
        Resolver::builder().backend(Arc::new(crate::did::KeyBackend)).build()
    }

    #[tokio::test]
    async fn sign_and_verify_generic_document() {
        let kp = KeyPair::random();
        let did = did_key_for(&kp.public_key());
        let proof = Proof::new(default_verification_method(&did), KeyPurpose::Authentication, Timestamp::now());
        let mut doc = json!({"hello": "world", "proof": proof});
        sign_in_place(&mut doc, "proof", &kp).unwrap();
        let r = resolver();
        let ok = verify_embedded(&doc, "proof", &did, KeyPurpose::Authentication, &r).await;
        assert_eq!(ok.status, CheckStatus::Pass);

        let mut tampered = doc.clone();
        tampered["hello"] = json!("World");
        let bad = verify_embedded(&tampered, "proof", &did, KeyPurpose::Authentication, &r).await;
        assert_eq!(bad.status.reason(), Some(Reason::SignatureInvalid));

        let wrong_purpose = verify_embedded(&doc, "proof", &did, KeyPurpose::AssertionMethod, &r).await;
        assert_eq!(wrong_purpose.status.reason(), Some(Reason::MalformedProof));
    }

    #[tokio::test]
    async fn signer_must_match() {
        let kp = KeyPair::random();
        let did = did_key_for(&kp.public_key());
        let other = did_key_for(&KeyPair::random().public_key());
        let proof = Proof::new(default_verification_method(&did), KeyPurpose::Authentication, Timestamp::now());
        let mut doc = json!({"proof": proof});
        sign_in_place(&mut doc, "proof", &kp).unwrap();
        let res = verify_embedded(&doc, "proof", &other, KeyPurpose::Authentication, &resolver()).await;
        assert_eq!(res.status.reason(), Some(Reason::SignerMismatch));
    }

    #[test]
    fn signing_input_excludes_only_signature_value() {
        let doc = json!({"b": 1, "proof": {"type": "t", "signatureValue": "sig"}});
        assert_eq!(signing_input(&doc, "proof").unwrap(), br#"{"b":1,"proof":{"type":"t"}}"#);
    }
}
