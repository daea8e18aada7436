//! Ed25519 key pairs and signatures.
//!
//! Keys and signatures embedded in documents use base58 (Bitcoin alphabet).

use std::fmt;

use ed25519_dalek::{Signer as _, SigningKey, VerifyingKey};
use rand::rngs::OsRng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;
use zeroize::Zeroize;

pub const PUBLIC_KEY_LEN: usize = 32;
pub const SEED_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("seed must be {SEED_LEN} bytes, got {0}")]
    BadSeedLength(usize),
    #[error("malformed public key: {0}")]
    MalformedKey(String),
    #[error("malformed signature: {0}")]
    MalformedSignature(String),
}

/// 32-byte Ed25519 public key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PublicKey([u8; PUBLIC_KEY_LEN]);

impl PublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KeyError> {
        let arr: [u8; PUBLIC_KEY_LEN] = bytes
            .try_into()
            .map_err(|_| KeyError::MalformedKey(format!("expected 32 bytes, got {}", bytes.len())))?;
        VerifyingKey::from_bytes(&arr).map_err(|e| KeyError::MalformedKey(e.to_string()))?;
        Ok(Self(arr))
    }

    pub fn from_base58(s: &str) -> Result<Self, KeyError> {
        let bytes = bs58::decode(s)
            .into_vec()
            .map_err(|e| KeyError::MalformedKey(e.to_string()))?;
        Self::from_bytes(&bytes)
    }

    pub fn as_bytes(&self) -> &[u8; PUBLIC_KEY_LEN] {
        &self.0
    }

    pub fn to_base58(&self) -> String {
        bs58::encode(self.0).into_string()
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", self.to_base58())
    }
}

impl fmt::Display for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_base58())
    }
}

/// 64-byte Ed25519 signature.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Signature([u8; SIGNATURE_LEN]);

impl Signature {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, KeyError> {
        let arr: [u8; SIGNATURE_LEN] = bytes.try_into().map_err(|_| {
            KeyError::MalformedSignature(format!("expected 64 bytes, got {}", bytes.len()))
        })?;
        Ok(Self(arr))
    }

    pub fn from_base58(s: &str) -> Result<Self, KeyError> {
        let bytes = bs58::decode(s)
            .into_vec()
            .map_err(|e| KeyError::MalformedSignature(e.to_string()))?;
        Self::from_bytes(&bytes)
    }

    pub fn as_bytes(&self) -> &[u8; SIGNATURE_LEN] {
        &self.0
    }

    pub fn to_base58(&self) -> String {
        bs58::encode(self.0).into_string()
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", self.to_base58())
    }
}

/// An Ed25519 key pair. The private half is the 32-byte seed.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
}

impl KeyPair {
    /// Deterministic when `seed` is given, random otherwise.
    pub fn generate(seed: Option<&[u8]>) -> Result<Self, KeyError> {
        match seed {
            Some(seed) => {
                let mut arr: [u8; SEED_LEN] = seed
                    .try_into()
                    .map_err(|_| KeyError::BadSeedLength(seed.len()))?;
                let signing = SigningKey::from_bytes(&arr);
                arr.zeroize();
                Ok(Self { signing })
            }
            None => Ok(Self { signing: SigningKey::generate(&mut OsRng) }),
        }
    }

    pub fn random() -> Self {
        Self { signing: SigningKey::generate(&mut OsRng) }
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey(self.signing.verifying_key().to_bytes())
    }

    /// The 32-byte seed. Handle with care.
    pub fn seed(&self) -> [u8; SEED_LEN] {
        self.signing.to_bytes()
    }

    pub fn sign(&self, message: &[u8]) -> Signature {
        Signature(self.signing.sign(message).to_bytes())
    }
}

impl PartialEq for KeyPair {
    fn eq(&self, other: &Self) -> bool {
        self.signing.to_bytes() == other.signing.to_bytes()
    }
}

impl Eq for KeyPair {}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair").field("public", &self.public_key()).finish_non_exhaustive()
    }
}

/// Accepts iff `sig` is a valid signature of `message` under `public_key`.
///
/// Malformed inputs are errors, distinct from a clean rejection (`Ok(false)`).
pub fn verify_signature(public_key: &[u8], message: &[u8], sig: &[u8]) -> Result<bool, KeyError> {
    let key = PublicKey::from_bytes(public_key)?;
    let sig = Signature::from_bytes(sig)?;
    Ok(verify(&key, message, &sig))
}

pub fn verify(key: &PublicKey, message: &[u8], sig: &Signature) -> bool {
    let Ok(vk) = VerifyingKey::from_bytes(&key.0) else {
        return false;
    };
    vk.verify_strict(message, &ed25519_dalek::Signature::from_bytes(&sig.0)).is_ok()
}

impl Serialize for PublicKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_base58())
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        PublicKey::from_base58(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unhex(s: &str) -> Vec<u8> {
        hex::decode(s).unwrap()
    }

    // Public key for the all-zero seed, computed with an independent
    // Ed25519 implementation (Python `cryptography`).
    const ZERO_SEED_PUBLIC: &str = "3b6a27bcceb6a42d62a3a8d02a6f0d73653215771de243a63ac048a18b59da29";

    #[test]
    fn zero_seed_public_key() {
        let kp = KeyPair::generate(Some(&[0u8; 32])).unwrap();
        assert_eq!(hex::encode(kp.public_key().as_bytes()), ZERO_SEED_PUBLIC);
    }

    #[test]
    fn random_keys_differ() {
        let a = KeyPair::generate(None).unwrap();
        let b = KeyPair::generate(None).unwrap();
        assert_ne!(a.public_key(), b.public_key());
    }

    #[test]
    fn short_seed_rejected() {
        assert_eq!(KeyPair::generate(Some(&[0u8; 31])).unwrap_err(), KeyError::BadSeedLength(31));
    }

    #[test]
    fn rfc8032_test_1() {
        let kp = KeyPair::generate(Some(&unhex(
            "9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
        )))
        .unwrap();
        assert_eq!(
            hex::encode(kp.public_key().as_bytes()),
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a"
        );
        let sig = kp.sign(b"");
        assert_eq!(
            hex::encode(sig.as_bytes()),
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065\
             224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b"
        );
        assert!(verify_signature(kp.public_key().as_bytes(), b"", sig.as_bytes()).unwrap());
    }

    #[test]
    fn malformed_inputs_are_errors() {
        assert!(matches!(
            verify_signature(&[1u8; 31], b"m", &[0u8; 64]),
            Err(KeyError::MalformedKey(_))
        ));
        let kp = KeyPair::random();
        assert!(matches!(
            verify_signature(kp.public_key().as_bytes(), b"m", &[0u8; 63]),
            Err(KeyError::MalformedSignature(_))
        ));
    }

    #[test]
    fn base58_round_trip() {
        let kp = KeyPair::random();
        let pk = kp.public_key();
        assert_eq!(PublicKey::from_base58(&pk.to_base58()).unwrap(), pk);
        let sig = kp.sign(b"abc");
        assert_eq!(Signature::from_base58(&sig.to_base58()).unwrap(), sig);
    }

    proptest! {
        #[test]
        fn sign_verify(seed in any::<[u8; 32]>(), msg in prop::collection::vec(any::<u8>(), 0..64)) {
            let kp = KeyPair::generate(Some(&seed)).unwrap();
            let sig = kp.sign(&msg);
            prop_assert_eq!(sig, kp.sign(&msg));
            prop_assert!(verify(&kp.public_key(), &msg, &sig));
        }

        #[test]
        fn bit_flip_rejected(seed in any::<[u8; 32]>(), msg in prop::collection::vec(any::<u8>(), 1..64), bit in any::<prop::sample::Index>()) {
            let kp = KeyPair::generate(Some(&seed)).unwrap();
            let sig = kp.sign(&msg);
            let mut tampered = msg.clone();
            let i = bit.index(msg.len() * 8);
            tampered[i / 8] ^= 1 << (i % 8);
            prop_assert!(!verify(&kp.public_key(), &tampered, &sig));
        }
    }
}
