//! Agent state persisted next to the wallet.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AgentError;
use crate::did::Did;
use crate::time::Timestamp;
use crate::wallet::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionState {
    Invited,
    Requested,
    Active,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Connection {
    pub connection_id: String,
    pub my_did: Did,
    pub their_did: Did,
    pub their_endpoint: String,
    pub state: ConnectionState,
    pub created_at: Timestamp,
}

impl Connection {
    /// Move forward along invited → requested → active. Staying put is allowed.
    pub fn advance(&mut self, to: ConnectionState) -> Result<(), AgentError> {
        if to < self.state {
            return Err(AgentError::Protocol(format!(
                "connection {} cannot go from {:?} back to {:?}",
                self.connection_id, self.state, to
            )));
        }
        self.state = to;
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.state == ConnectionState::Active
    }
}

/// A challenge this agent issued and is waiting on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NonceEntry {
    pub challenge: String,
    pub target: Did,
    pub requested_attributes: Vec<String>,
    pub expires_at: Timestamp,
    pub consumed: bool,
}

/// A credential this publisher issued.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IssuedRecord {
    pub credential_id: String,
    pub status_id: String,
    pub subject: Did,
    pub issued_at: Timestamp,
    pub revoked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RejectedConnection {
    pub their_did: Did,
    pub at: Timestamp,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub did: Option<Did>,
    #[serde(default)]
    pub connections: Vec<Connection>,
    /// Keyed by the id of the proof-request message.
    #[serde(default)]
    pub nonces: BTreeMap<String, NonceEntry>,
    #[serde(default)]
    pub issued: Vec<IssuedRecord>,
    #[serde(default)]
    pub rejected: Vec<RejectedConnection>,
}

impl AgentState {
    pub fn load(path: &Path) -> Result<Self, AgentError> {
        match std::fs::read(path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| AgentError::BadConfig(format!("state file {}: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(AgentError::Io(format!("{}: {e}", path.display()))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let bytes = serde_json::to_vec_pretty(self).expect("state serializes");
        write_atomic(path, &bytes).map_err(|e| AgentError::Io(e.to_string()))
    }

    pub fn connection(&self, id: &str) -> Option<&Connection> {
        self.connections.iter().find(|c| c.connection_id == id)
    }

    pub fn connection_mut(&mut self, id: &str) -> Option<&mut Connection> {
        self.connections.iter_mut().find(|c| c.connection_id == id)
    }

    /// The most advanced connection with `did`.
    pub fn connection_with(&self, did: &Did) -> Option<&Connection> {
        self.connections.iter().filter(|c| &c.their_did == did).max_by_key(|c| c.state)
    }

    /// Drop consumed or expired challenges older than `now`.
    pub fn prune_nonces(&mut self, now: Timestamp) {
        self.nonces.retain(|_, n| n.expires_at > now);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::did::key::did_key_for;
    use crate::keys::KeyPair;

    fn conn() -> Connection {
        Connection {
            connection_id: "c1".into(),
            my_did: did_key_for(&KeyPair::random().public_key()),
            their_did: did_key_for(&KeyPair::random().public_key()),
            their_endpoint: "http://127.0.0.1:1/inbox".into(),
            state: ConnectionState::Invited,
            created_at: Timestamp::now(),
        }
    }

    #[test]
    fn state_only_moves_forward() {
        let mut c = conn();
        c.advance(ConnectionState::Requested).unwrap();
        c.advance(ConnectionState::Active).unwrap();
        c.advance(ConnectionState::Active).unwrap();
        assert!(c.advance(ConnectionState::Invited).is_err());
        assert!(c.is_active());
    }

    #[test]
    fn persists() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        assert_eq!(AgentState::load(&path).unwrap(), AgentState::default());
        let mut s = AgentState::default();
        s.connections.push(conn());
        s.save(&path).unwrap();
        let back = AgentState::load(&path).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_value(&back).unwrap()["connections"][0]["state"], "invited");
    }
}
