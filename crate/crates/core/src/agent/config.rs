use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::wallet::KdfParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Publisher,
    Dataset,
    User,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Publisher => "publisher",
            Role::Dataset => "dataset",
            Role::User => "user",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WalletConfig {
    pub path: PathBuf,
    /// Name of the environment variable holding the passphrase.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passphrase_env: Option<String>,
    /// Literal passphrase. Meant for tests and throwaway agents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passphrase: Option<String>,
    /// KDF cost for a newly created wallet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kdf: Option<KdfParams>,
    #[serde(default = "default_key_label")]
    pub key_label: String,
}

fn default_key_label() -> String {
    "agent".into()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum DidConfig {
    #[default]
    Key,
    Web {
        /// Host, with optional `:port`. Defaults to the public URL's authority.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        domain: Option<String>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        path: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolverConfig {
    #[serde(default)]
    pub allow_insecure_loopback: bool,
    #[serde(default = "default_cache_ttl")]
    pub cache_ttl_secs: u64,
}

fn default_cache_ttl() -> u64 {
    300
}

impl Default for ResolverConfig {
    fn default() -> Self {
        Self { allow_insecure_loopback: false, cache_ttl_secs: default_cache_ttl() }
    }
}

/// Which stored credentials may be presented: `"all"` or a list of ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum Sharable {
    #[default]
    All,
    Ids(Vec<String>),
}

impl Sharable {
    pub fn allows(&self, credential_id: &str) -> bool {
        match self {
            Sharable::All => true,
            Sharable::Ids(ids) => ids.iter().any(|i| i == credential_id),
        }
    }
}

impl Serialize for Sharable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Sharable::All => s.serialize_str("all"),
            Sharable::Ids(ids) => ids.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Sharable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Word(String),
            Ids(Vec<String>),
        }
        match Repr::deserialize(d)? {
            Repr::Word(w) if w == "all" => Ok(Sharable::All),
            Repr::Word(w) => Err(serde::de::Error::custom(format!("expected \"all\" or a list, got {w:?}"))),
            Repr::Ids(ids) => Ok(Sharable::Ids(ids)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PolicyConfig {
    #[serde(default = "yes")]
    pub auto_accept_connections: bool,
    #[serde(default)]
    pub sharable_credential_ids: Sharable,
    #[serde(default = "default_challenge_ttl")]
    pub challenge_ttl_secs: u64,
}

fn yes() -> bool {
    true
}

fn default_challenge_ttl() -> u64 {
    120
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            auto_accept_connections: true,
            sharable_credential_ids: Sharable::All,
            challenge_ttl_secs: default_challenge_ttl(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentConfig {
    pub role: Role,
    pub wallet: WalletConfig,
    pub listen: SocketAddr,
    /// Base URL peers use to reach this agent. Defaults to `http://<bound address>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub public_url: Option<String>,
    #[serde(default)]
    pub did: DidConfig,
    #[serde(default)]
    pub resolver: ResolverConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    /// Where connection state lives. Defaults to the wallet's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state_dir: Option<PathBuf>,
    /// Publisher only. Defaults to `<public url>/registry.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry_url: Option<String>,
}

impl AgentConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(role: Role, wallet_path: impl Into<PathBuf>, listen: SocketAddr) -> Self {
        Self {
            role,
            wallet: WalletConfig {
                path: wallet_path.into(),
                passphrase_env: None,
                passphrase: None,
                kdf: None,
                key_label: default_key_label(),
            },
            listen,
            public_url: None,
            did: DidConfig::Key,
            resolver: ResolverConfig::default(),
            policy: PolicyConfig::default(),
            state_dir: None,
            registry_url: None,
        }
    }

    /// Read a JSON config. Relative paths are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let bytes = std::fs::read(path).map_err(|e| AgentError::BadConfig(format!("{}: {e}", path.display())))?;
        let mut config: Self = serde_json::from_slice(&bytes)
            .map_err(|e| AgentError::BadConfig(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.wallet.path.is_relative() {
            config.wallet.path = base.join(&config.wallet.path);
        }
        if let Some(dir) = config.state_dir.as_mut().filter(|d| d.is_relative()) {
            *dir = base.join(&*dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::BadConfig(m.into()));
        match (&self.wallet.passphrase_env, &self.wallet.passphrase) {
            (Some(_), Some(_)) => return bad("give wallet.passphraseEnv or wallet.passphrase, not both"),
            (None, None) => return bad("wallet.passphraseEnv is required"),
            _ => {}
        }
        if self.registry_url.is_some() && self.role != Role::Publisher {
            return bad("registryUrl applies to publisher agents only");
        }
        if self.policy.challenge_ttl_secs == 0 {
            return bad("policy.challengeTtlSecs must be positive");
        }
        if let Some(u) = &self.public_url {
            url::Url::parse(u).map_err(|e| AgentError::BadConfig(format!("publicUrl: {e}")))?;
        }
        Ok(())
    }

    pub fn passphrase(&self) -> Result<String, AgentError> {
        if let Some(p) = &self.wallet.passphrase {
            return Ok(p.clone());
        }
        let var = self.wallet.passphrase_env.as_deref().unwrap_or_default();
        std::env::var(var).map_err(|_| AgentError::BadConfig(format!("environment variable {var} is not set")))
    }

    pub fn state_dir(&self) -> PathBuf {
        self.state_dir.clone().unwrap_or_else(|| {
            self.wallet.path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf()
        })
    }
}
