use serde::{Deserialize, Serialize};

use super::Did;
use crate::keys::PublicKey;

pub const DID_CONTEXT: &str = "https://w3id.org/did/v1";
pub const ED25519_KEY_TYPE: &str = "Ed25519VerificationKey2018";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationMethod {
    pub id: String,
    #[serde(rename = "type")]
    pub key_type: String,
    pub controller: Did,
    pub public_key_base58: String,
}

impl VerificationMethod {
    pub fn ed25519(id: impl Into<String>, controller: &Did, key: &PublicKey) -> Self {
        Self {
            id: id.into(),
            key_type: ED25519_KEY_TYPE.into(),
            controller: controller.clone(),
            public_key_base58: key.to_base58(),
        }
    }

    pub fn public_key(&self) -> Option<PublicKey> {
        (self.key_type == ED25519_KEY_TYPE)
            .then(|| PublicKey::from_base58(&self.public_key_base58).ok())
            .flatten()
    }
}

/// Where an agent for the DID subject accepts messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Service {
    pub id: String,
    #[serde(rename = "type")]
    pub service_type: String,
    pub service_endpoint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Context {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DidDocument {
    #[serde(rename = "@context")]
    pub context: Context,
    pub id: Did,
    pub authentication: Vec<VerificationMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assertion_method: Option<Vec<VerificationMethod>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service: Option<Vec<Service>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum KeyPurpose {
    AssertionMethod,
    Authentication,
}

/// A key located in a document for a given purpose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedKey {
    pub key: PublicKey,
    /// The key was listed under `authentication` but used for assertions.
    pub lenient: bool,
}

impl DidDocument {
    /// A document with one Ed25519 key usable for both proof purposes,
    /// identified by the DID itself.
    pub fn new_ed25519(id: &Did, key: &PublicKey) -> Self {
        Self {
            context: Context::One(DID_CONTEXT.into()),
            id: id.clone(),
            authentication: vec![VerificationMethod::ed25519(id.text(), id, key)],
            assertion_method: None,
            service: None,
        }
    }

    pub fn with_service(mut self, endpoint: impl Into<String>) -> Self {
        self.service = Some(vec![Service {
            id: format!("{}#agent", self.id),
            service_type: "DataCredAgent".into(),
            service_endpoint: endpoint.into(),
        }]);
        self
    }

    pub fn agent_endpoint(&self) -> Option<&str> {
        self.service.as_ref()?.first().map(|s| s.service_endpoint.as_str())
    }

    fn methods(&self) -> impl Iterator<Item = &VerificationMethod> {
        self.authentication.iter().chain(self.assertion_method.iter().flatten())
    }

    /// Structural checks applied before a resolved document is trusted.
    pub fn validate(&self) -> Result<(), String> {
        let mut usable = 0;
        for vm in self.methods() {
            if vm.controller != self.id {
                return Err(format!("verification method {} has foreign controller {}", vm.id, vm.controller));
            }
            if vm.key_type == ED25519_KEY_TYPE {
                let bytes = bs58::decode(&vm.public_key_base58)
                    .into_vec()
                    .map_err(|e| format!("key {}: {e}", vm.id))?;
                if bytes.len() != 32 {
                    return Err(format!("key {} decodes to {} bytes", vm.id, bytes.len()));
                }
                PublicKey::from_bytes(&bytes).map_err(|e| format!("key {}: {e}", vm.id))?;
                usable += 1;
            }
        }
        if usable == 0 {
            return Err("no usable Ed25519 key".into());
        }
        Ok(())
    }

    /// Find the key named by `method_ref` (a DID URL) for `purpose`.
    ///
    /// Keys listed only under `authentication` are accepted for assertions
    /// too, with [`ResolvedKey::lenient`] set.
    pub fn find_key(&self, method_ref: &str, purpose: KeyPurpose) -> Option<ResolvedKey> {
        let matches = |vm: &&VerificationMethod| same_method(&self.id, &vm.id, method_ref);
        let primary: &[VerificationMethod] = match purpose {
            KeyPurpose::Authentication => &self.authentication,
            KeyPurpose::AssertionMethod => self.assertion_method.as_deref().unwrap_or(&[]),
        };
        if let Some(key) = primary.iter().find(matches).and_then(VerificationMethod::public_key) {
            return Some(ResolvedKey { key, lenient: false });
        }
        if purpose == KeyPurpose::AssertionMethod {
            if let Some(key) = self.authentication.iter().find(matches).and_then(VerificationMethod::public_key) {
                return Some(ResolvedKey { key, lenient: true });
            }
        }
        None
    }
}

/// Compare verification method ids, expanding relative `#frag` forms.
fn same_method(doc_id: &Did, vm_id: &str, wanted: &str) -> bool {
    let expand = |s: &str| {
        if s.starts_with('#') { format!("{doc_id}{s}") } else { s.to_string() }
    };
    expand(vm_id) == expand(wanted)
}
