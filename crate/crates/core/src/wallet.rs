//! Passphrase-encrypted wallet holding key pairs and received credentials.
//!
//! On disk the wallet is a single JSON envelope:
//!
//! ```json
//! {"version":1,"walletId":"...","kdf":{"algorithm":"argon2id",...},
//!  "salt":"<hex>","nonce":"<hex>","keyCheck":"<hex>","ciphertext":"<hex>"}
//! ```
//!
//! The symmetric key comes from Argon2id over the passphrase and a per-file
//! random salt. Entries are canonical JSON sealed with XChaCha20-Poly1305;
//! the header fields are bound as associated data. `keyCheck` lets a wrong
//! passphrase be told apart from a damaged file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use argon2::{Algorithm, Argon2, Params, Version};
use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{XChaCha20Poly1305, XNonce};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;
use zeroize::Zeroizing;

use crate::canonical::canonicalize;
use crate::keys::{KeyPair, PublicKey};
use crate::vc::VerifiableCredential;

const WALLET_VERSION: u32 = 1;
const SALT_LEN: usize = 16;
const NONCE_LEN: usize = 24;

#[derive(Debug, Error)]
pub enum WalletError {
    #[error("wrong passphrase")]
    WrongPassphrase,
    #[error("corrupt wallet: {0}")]
    CorruptWallet(String),
    #[error("no such entry: {0}")]
    NoSuchEntry(String),
    #[error("entry {0} is not a {1}")]
    WrongEntryType(String, &'static str),
    #[error("wallet i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KdfParams {
    pub algorithm: KdfAlgorithm,
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KdfAlgorithm {
    Argon2id,
}

impl Default for KdfParams {
    fn default() -> Self {
        Self {
            algorithm: KdfAlgorithm::Argon2id,
            memory_kib: Params::DEFAULT_M_COST,
            iterations: Params::DEFAULT_T_COST,
            parallelism: Params::DEFAULT_P_COST,
        }
    }
}

impl KdfParams {
    fn derive(&self, passphrase: &str, salt: &[u8]) -> Result<Zeroizing<[u8; 32]>, WalletError> {
        let params = Params::new(self.memory_kib, self.iterations, self.parallelism, Some(32))
            .map_err(|e| WalletError::CorruptWallet(format!("kdf params: {e}")))?;
        let argon = Argon2::new(Algorithm::Argon2id, Version::V0x13, params);
        let mut key = Zeroizing::new([0u8; 32]);
        argon
            .hash_password_into(passphrase.as_bytes(), salt, key.as_mut())
            .map_err(|e| WalletError::CorruptWallet(format!("kdf: {e}")))?;
        Ok(key)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Envelope {
    version: u32,
    wallet_id: String,
    kdf: KdfParams,
    salt: String,
    nonce: String,
    key_check: String,
    ciphertext: String,
}

/// Something stored under a wallet label.
#[derive(Debug, Clone, PartialEq)]
pub enum WalletEntry {
    KeyPair(KeyPair),
    Credential(Box<VerifiableCredential>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
enum StoredEntry {
    #[serde(rename_all = "camelCase")]
    KeyPair { public_key_base58: String, private_key_base58: String },
    #[serde(rename_all = "camelCase")]
    Credential { credential: serde_json::Value },
}

/// An opened wallet. Cloning yields an independent snapshot.
#[derive(Clone)]
pub struct Wallet {
    path: PathBuf,
    wallet_id: String,
    kdf: KdfParams,
    salt: [u8; SALT_LEN],
    key: Zeroizing<[u8; 32]>,
    entries: BTreeMap<String, WalletEntry>,
}

impl std::fmt::Debug for Wallet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wallet")
            .field("path", &self.path)
            .field("wallet_id", &self.wallet_id)
            .field("labels", &self.entries.keys().collect::<Vec<_>>())
            .finish_non_exhaustive()
    }
}

impl Wallet {
    /// Open the wallet at `path`, creating an empty one if the file does not exist.
    pub fn open(path: impl AsRef<Path>, passphrase: &str) -> Result<Self, WalletError> {
        Self::open_with(path, passphrase, KdfParams::default())
    }

    /// Like [`Wallet::open`]; `kdf` applies only when a new wallet is created.
    pub fn open_with(
        path: impl AsRef<Path>,
        passphrase: &str,
        kdf: KdfParams,
    ) -> Result<Self, WalletError> {
        let path = path.as_ref().to_path_buf();
        match fs::read(&path) {
            Ok(bytes) => Self::decrypt(path, &bytes, passphrase),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                let mut salt = [0u8; SALT_LEN];
                rand::thread_rng().fill_bytes(&mut salt);
                let key = kdf.derive(passphrase, &salt)?;
                Ok(Self {
                    path,
                    wallet_id: uuid::Uuid::new_v4().to_string(),
                    kdf,
                    salt,
                    key,
                    entries: BTreeMap::new(),
                })
            }
            Err(source) => Err(WalletError::Io { path, source }),
        }
    }

    fn decrypt(path: PathBuf, bytes: &[u8], passphrase: &str) -> Result<Self, WalletError> {
        let corrupt = |m: &str| WalletError::CorruptWallet(m.to_string());
        let env: Envelope =
            serde_json::from_slice(bytes).map_err(|e| WalletError::CorruptWallet(e.to_string()))?;
        if env.version != WALLET_VERSION {
            return Err(WalletError::CorruptWallet(format!("unsupported version {}", env.version)));
        }
        let salt: [u8; SALT_LEN] = hex::decode(&env.salt)
            .ok()
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| corrupt("bad salt"))?;
        let nonce: [u8; NONCE_LEN] = hex::decode(&env.nonce)
            .ok()
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| corrupt("bad nonce"))?;
        let ciphertext = hex::decode(&env.ciphertext).map_err(|_| corrupt("bad ciphertext"))?;
        let key = env.kdf.derive(passphrase, &salt)?;
        if hex::encode(key_check(&key)) != env.key_check {
            return Err(WalletError::WrongPassphrase);
        }
        let aad = header_aad(&env.wallet_id, &env.kdf, &salt);
        let plaintext = Zeroizing::new(
            XChaCha20Poly1305::new(key.as_ref().into())
                .decrypt(XNonce::from_slice(&nonce), Payload { msg: &ciphertext, aad: &aad })
                .map_err(|_| corrupt("authentication failed"))?,
        );
        let stored: BTreeMap<String, StoredEntry> = serde_json::from_slice(&plaintext)
            .map_err(|e| WalletError::CorruptWallet(format!("entries: {e}")))?;
        let mut entries = BTreeMap::new();
        for (label, entry) in stored {
            entries.insert(label.clone(), decode_entry(&label, entry)?);
        }
        Ok(Self { path, wallet_id: env.wallet_id, kdf: env.kdf, salt, key, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn wallet_id(&self) -> &str {
        &self.wallet_id
    }

    pub fn put(&mut self, label: impl Into<String>, entry: WalletEntry) {
        self.entries.insert(label.into(), entry);
    }

    pub fn put_keypair(&mut self, label: impl Into<String>, kp: KeyPair) {
        self.put(label, WalletEntry::KeyPair(kp));
    }

    pub fn put_credential(&mut self, label: impl Into<String>, vc: VerifiableCredential) {
        self.put(label, WalletEntry::Credential(Box::new(vc)));
    }

    pub fn get(&self, label: &str) -> Result<&WalletEntry, WalletError> {
        self.entries.get(label).ok_or_else(|| WalletError::NoSuchEntry(label.to_string()))
    }

    pub fn get_keypair(&self, label: &str) -> Result<&KeyPair, WalletError> {
        match self.get(label)? {
            WalletEntry::KeyPair(kp) => Ok(kp),
            WalletEntry::Credential(_) => Err(WalletError::WrongEntryType(label.into(), "key pair")),
        }
    }

    pub fn get_credential(&self, label: &str) -> Result<&VerifiableCredential, WalletError> {
        match self.get(label)? {
            WalletEntry::Credential(vc) => Ok(vc),
            WalletEntry::KeyPair(_) => Err(WalletError::WrongEntryType(label.into(), "credential")),
        }
    }

    pub fn remove(&mut self, label: &str) -> Result<WalletEntry, WalletError> {
        self.entries.remove(label).ok_or_else(|| WalletError::NoSuchEntry(label.to_string()))
    }

    /// Labels in sorted order.
    pub fn list(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Stored credentials with their labels, in label order.
    pub fn credentials(&self) -> impl Iterator<Item = (&str, &VerifiableCredential)> {
        self.entries.iter().filter_map(|(l, e)| match e {
            WalletEntry::Credential(vc) => Some((l.as_str(), vc.as_ref())),
            WalletEntry::KeyPair(_) => None,
        })
    }

    /// Encrypt and atomically replace the wallet file.
    pub fn save(&self) -> Result<(), WalletError> {
        let stored: BTreeMap<&str, StoredEntry> =
            self.entries.iter().map(|(l, e)| (l.as_str(), encode_entry(e))).collect();
        let value = serde_json::to_value(&stored).expect("entries serialize");
        let plaintext = Zeroizing::new(
            canonicalize(&value).map_err(|e| WalletError::CorruptWallet(e.to_string()))?,
        );
        let mut nonce = [0u8; NONCE_LEN];
        rand::thread_rng().fill_bytes(&mut nonce);
        let aad = header_aad(&self.wallet_id, &self.kdf, &self.salt);
        let ciphertext = XChaCha20Poly1305::new(self.key.as_ref().into())
            .encrypt(XNonce::from_slice(&nonce), Payload { msg: &plaintext, aad: &aad })
            .map_err(|_| WalletError::CorruptWallet("encryption failed".into()))?;
        let env = Envelope {
            version: WALLET_VERSION,
            wallet_id: self.wallet_id.clone(),
            kdf: self.kdf,
            salt: hex::encode(self.salt),
            nonce: hex::encode(nonce),
            key_check: hex::encode(key_check(&self.key)),
            ciphertext: hex::encode(ciphertext),
        };
        let bytes = serde_json::to_vec_pretty(&env).expect("envelope serializes");
        write_atomic(&self.path, &bytes)
    }
}

/// Write `bytes` to a sibling temp file, sync it, then rename over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), WalletError> {
    let io = |source| WalletError::Io { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io)
}

fn key_check(key: &[u8; 32]) -> [u8; 16] {
    let digest = Sha256::new().chain_update(b"datacred-wallet-key-check").chain_update(key).finalize();
    digest[..16].try_into().expect("16 bytes")
}

fn header_aad(wallet_id: &str, kdf: &KdfParams, salt: &[u8]) -> Vec<u8> {
    let header = json!({
        "version": WALLET_VERSION,
        "walletId": wallet_id,
        "kdf": kdf,
        "salt": hex::encode(salt),
    });
    canonicalize(&header).expect("header is canonicalizable")
}

fn encode_entry(entry: &WalletEntry) -> StoredEntry {
    match entry {
        WalletEntry::KeyPair(kp) => StoredEntry::KeyPair {
            public_key_base58: kp.public_key().to_base58(),
            private_key_base58: bs58::encode(kp.seed()).into_string(),
        },
        WalletEntry::Credential(vc) => StoredEntry::Credential {
            credential: serde_json::to_value(vc.as_ref()).expect("credential serializes"),
        },
    }
}

fn decode_entry(label: &str, entry: StoredEntry) -> Result<WalletEntry, WalletError> {
    let bad = |m: String| WalletError::CorruptWallet(format!("entry {label}: {m}"));
    match entry {
        StoredEntry::KeyPair { public_key_base58, private_key_base58 } => {
            let seed = Zeroizing::new(
                bs58::decode(&private_key_base58).into_vec().map_err(|e| bad(e.to_string()))?,
            );
            let kp = KeyPair::generate(Some(&seed)).map_err(|e| bad(e.to_string()))?;
            let expected = PublicKey::from_base58(&public_key_base58).map_err(|e| bad(e.to_string()))?;
            if kp.public_key() != expected {
                return Err(bad("public key does not match private key".into()));
            }
            Ok(WalletEntry::KeyPair(kp))
        }
        StoredEntry::Credential { credential } => {
            let vc = serde_json::from_value(credential).map_err(|e| bad(e.to_string()))?;
            Ok(WalletEntry::Credential(Box::new(vc)))
        }
    }
}
