//! `did:key` for Ed25519: `did:key:z` + base58(0xed 0x01 ‖ public key).

use super::{Did, DidDocument, DidError, VerificationMethod};
use crate::did::document::Context;
use crate::did::DID_CONTEXT;
use crate::keys::PublicKey;

const ED25519_MULTICODEC: [u8; 2] = [0xed, 0x01];

pub fn did_key_for(key: &PublicKey) -> Did {
    let mut bytes = ED25519_MULTICODEC.to_vec();
    bytes.extend_from_slice(key.as_bytes());
    let id = format!("z{}", bs58::encode(bytes).into_string());
    Did::parse(&format!("did:key:{id}")).expect("did:key syntax")
}

/// Recover the public key from a `did:key` identifier.
pub fn public_key_of(did: &Did) -> Result<PublicKey, DidError> {
    if did.method() != "key" {
        return Err(DidError::WrongMethod(did.text(), "key"));
    }
    let encoded = did
        .method_specific_id()
        .strip_prefix('z')
        .ok_or_else(|| DidError::BadKey("expected base58btc multibase".into()))?;
    let bytes = bs58::decode(encoded).into_vec().map_err(|e| DidError::BadKey(e.to_string()))?;
    let raw = bytes
        .strip_prefix(&ED25519_MULTICODEC[..])
        .ok_or_else(|| DidError::BadKey("not an Ed25519 multicodec key".into()))?;
    PublicKey::from_bytes(raw).map_err(|e| DidError::BadKey(e.to_string()))
}

/// Identifier and document for a key. The document lists the key under
/// both `authentication` and `assertionMethod`.
pub fn generate_did_key(key: &PublicKey) -> (Did, DidDocument) {
    let did = did_key_for(key);
    let doc = document_for(&did, key);
    (did, doc)
}

pub(crate) fn document_for(did: &Did, key: &PublicKey) -> DidDocument {
    let vm = VerificationMethod::ed25519(format!("{did}#{}", did.method_specific_id()), did, key);
    DidDocument {
        context: Context::One(DID_CONTEXT.into()),
        id: did.clone(),
        authentication: vec![vm.clone()],
        assertion_method: Some(vec![vm]),
        service: None,
    }
}

/// Bytes-level entry point.
pub fn generate_did_key_from_bytes(key: &[u8]) -> Result<(Did, DidDocument), DidError> {
    let key = PublicKey::from_bytes(key).map_err(|e| DidError::BadKey(e.to_string()))?;
    Ok(generate_did_key(&key))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keys::KeyPair;

    // Frozen from an independent base58 + multicodec encoder (Python).
    const ZERO_SEED_DID: &str = "did:key:z6MkiTBz1ymuepAQ4HEHYSF1H8quG5GLVVQR3djdX3mDooWp";
    const RFC8032_1_DID: &str = "did:key:z6MktwupdmLXVVqTzCw4i46r4uGyosGXRnR3XjN4Zq7oMMsw";

    #[test]
    fn frozen_vectors() {
        let kp = KeyPair::generate(Some(&[0u8; 32])).unwrap();
        assert_eq!(did_key_for(&kp.public_key()).text(), ZERO_SEED_DID);
        let rfc = hex::decode("d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a").unwrap();
        assert_eq!(generate_did_key_from_bytes(&rfc).unwrap().0.text(), RFC8032_1_DID);
    }

    #[test]
    fn distinct_keys_distinct_dids() {
        let a = did_key_for(&KeyPair::random().public_key());
        let b = did_key_for(&KeyPair::random().public_key());
        assert_ne!(a, b);
    }

    #[test]
    fn key_recovered() {
        let pk = KeyPair::random().public_key();
        let (did, doc) = generate_did_key(&pk);
        assert_eq!(public_key_of(&did).unwrap(), pk);
        doc.validate().unwrap();
    }

    #[test]
    fn bad_key() {
        assert!(matches!(generate_did_key_from_bytes(&[0u8; 5]), Err(DidError::BadKey(_))));
        let did = Did::parse("did:key:zabc").unwrap();
        assert!(public_key_of(&did).is_err());
    }
}
