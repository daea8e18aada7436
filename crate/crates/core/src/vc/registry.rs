use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::did::{Did, KeyPurpose, Resolver};
use crate::keys::{self, KeyPair, Signature};
use crate::proof::{default_verification_method, sign_serializable, signing_input, verify_embedded, Proof, ProofCheck, ProofError};
use crate::time::Timestamp;

pub const REGISTRY_STATUS_TYPE: &str = "DataCredRevocationRegistry";

#[derive(Debug, Error)]
pub enum RevokeError {
    #[error("key does not match the registry issuer")]
    WrongIssuerKey,
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// Issuer-signed list of revoked status ids. The list only grows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevocationRegistry {
    pub issuer: Did,
    pub revoked: Vec<String>,
    pub updated: Timestamp,
    pub proof: Proof,
}

impl RevocationRegistry {
    /// An empty registry signed by `key` on behalf of `issuer`.
    pub fn new(issuer: &Did, key: &KeyPair, verification_method: Option<String>) -> Result<Self, ProofError> {
        let now = Timestamp::now();
        let vm = verification_method.unwrap_or_else(|| default_verification_method(issuer));
        let mut reg = Self {
            issuer: issuer.clone(),
            revoked: Vec::new(),
            updated: now,
            proof: Proof::new(vm, KeyPurpose::AssertionMethod, now),
        };
        reg.sign(key)?;
        Ok(reg)
    }

    fn sign(&mut self, key: &KeyPair) -> Result<(), ProofError> {
        self.proof.signature_value = String::new();
        self.proof.signature_value = sign_serializable(self, "proof", key)?;
        Ok(())
    }

    /// True when `key` produced the current signature.
    pub fn signed_by(&self, key: &keys::PublicKey) -> bool {
        let value = serde_json::to_value(self).expect("registry serializes");
        match (signing_input(&value, "proof"), Signature::from_base58(&self.proof.signature_value)) {
            (Ok(input), Ok(sig)) => keys::verify(key, &input, &sig),
            _ => false,
        }
    }

    pub fn is_revoked(&self, status_id: &str) -> bool {
        self.revoked.iter().any(|s| s == status_id)
    }

    /// Add `status_id` and re-sign. Already-revoked ids leave the registry
    /// unchanged.
    pub fn revoke(&self, status_id: &str, key: &KeyPair) -> Result<Self, RevokeError> {
        if !self.signed_by(&key.public_key()) {
            return Err(RevokeError::WrongIssuerKey);
        }
        if self.is_revoked(status_id) {
            return Ok(self.clone());
        }
        let mut next = self.clone();
        next.revoked.push(status_id.to_string());
        next.updated = Timestamp::now().max(self.updated.plus_secs(1));
        next.proof.created = next.updated;
        next.sign(key)?;
        Ok(next)
    }

    /// Check the issuer's signature against its resolved DID document.
    pub async fn verify(&self, resolver: &Resolver) -> ProofCheck {
        let value = serde_json::to_value(self).expect("registry serializes");
        verify_embedded(&value, "proof", &self.issuer, KeyPurpose::AssertionMethod, resolver).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::did::key::did_key_for;
    use crate::did::KeyBackend;
    use crate::report::CheckStatus;
    use std::sync::Arc;

    #[tokio::test]
    async fn revoke_is_idempotent_and_signed() {
        let kp = KeyPair::random();
        let did = did_key_for(&kp.public_key());
        let reg = RevocationRegistry::new(&did, &kp, None).unwrap();
        let once = reg.revoke("s1", &kp).unwrap();
        let twice = once.revoke("s1", &kp).unwrap();
        assert_eq!(once.revoked, vec!["s1"]);
        assert_eq!(twice.revoked, once.revoked);
        assert!(once.updated > reg.updated);

        let resolver = Resolver::builder().backend(Arc::new(KeyBackend)).build();
        assert_eq!(once.verify(&resolver).await.status, CheckStatus::Pass);
        let mut forged = once.clone();
        forged.revoked.clear();
        assert!(!forged.verify(&resolver).await.status.is_pass());
    }

    #[test]
    fn wrong_key_rejected() {
        let kp = KeyPair::random();
        let did = did_key_for(&kp.public_key());
        let reg = RevocationRegistry::new(&did, &kp, None).unwrap();
        assert!(matches!(reg.revoke("s1", &KeyPair::random()), Err(RevokeError::WrongIssuerKey)));
    }

    #[test]
    fn json_layout() {
        let kp = KeyPair::random();
        let did = did_key_for(&kp.public_key());
        let v = serde_json::to_value(RevocationRegistry::new(&did, &kp, None).unwrap()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["issuer", "proof", "revoked", "updated"]);
    }
}
