#![allow(dead_code)]

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;

use datacred::agent::{provision, AgentConfig, DidConfig, RunningAgent, Role};
use datacred::vc::{DATA_ETHICALLY_SOURCED, HASH_OF_DATA};
use datacred::wallet::{KdfAlgorithm, KdfParams};

pub const PASS: &str = "correct horse battery staple";

/// Cheap KDF so tests do not spend their time in Argon2.
pub fn fast_kdf() -> KdfParams {
    KdfParams { algorithm: KdfAlgorithm::Argon2id, memory_kib: 1024, iterations: 1, parallelism: 1 }
}

pub fn config(dir: &Path, name: &str, role: Role, listen: SocketAddr) -> AgentConfig {
    let mut c = AgentConfig::new(role, dir.join(format!("{name}.wallet")), listen);
    c.wallet.passphrase = Some(PASS.into());
    c.wallet.kdf = Some(fast_kdf());
    c.resolver.allow_insecure_loopback = true;
    c
}

pub fn loopback() -> SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}

pub struct Trio {
    pub publisher: RunningAgent,
    pub dataset: RunningAgent,
    pub user: RunningAgent,
}

/// Publisher on did:web (self-hosted on loopback), dataset and user on did:key.
pub async fn trio(dir: &Path) -> Trio {
    let mut pc = config(dir, "publisher", Role::Publisher, loopback());
    pc.did = DidConfig::Web { domain: None, path: vec![] };
    Trio {
        publisher: provision(pc).await.unwrap(),
        dataset: provision(config(dir, "dataset", Role::Dataset, loopback())).await.unwrap(),
        user: provision(config(dir, "user", Role::User, loopback())).await.unwrap(),
    }
}

pub fn listing_claims(digest: &str) -> BTreeMap<String, String> {
    BTreeMap::from([
        (HASH_OF_DATA.to_string(), digest.to_string()),
        (DATA_ETHICALLY_SOURCED.to_string(), "YES".to_string()),
    ])
}

pub fn both_attributes() -> Vec<String> {
    vec![HASH_OF_DATA.to_string(), DATA_ETHICALLY_SOURCED.to_string()]
}
