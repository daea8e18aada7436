//! Decentralized identifiers, DID documents and resolution.
//!
//! Two methods are built in: `did:web`, which fetches the document from the
//! controller's web site, and `did:key`, which derives it from the key
//! itself without touching the network.

mod document;
pub mod key;
mod resolver;
pub mod web;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use document::{DidDocument, KeyPurpose, ResolvedKey, Service, VerificationMethod, DID_CONTEXT, ED25519_KEY_TYPE};
pub use resolver::{
    DidBackend, DirectoryBackend, FetchError, Fetcher, HttpFetcher, KeyBackend, MemoryBackend,
    ResolveError, Resolver, ResolverBuilder, StaticFetcher, WebBackend, DEFAULT_CACHE_TTL,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DidError {
    #[error("malformed DID {0:?}: {1}")]
    MalformedDid(String, &'static str),
    #[error("DID {0} does not use method {1}")]
    WrongMethod(String, &'static str),
    #[error("bad key: {0}")]
    BadKey(String),
}

/// A parsed `did:<method>:<method-specific-id>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Did {
    method: String,
    method_specific_id: String,
}

impl Did {
    pub fn parse(text: &str) -> Result<Self, DidError> {
        let bad = |why| DidError::MalformedDid(text.to_string(), why);
        let rest = text.strip_prefix("did:").ok_or_else(|| bad("missing did: prefix"))?;
        let (method, id) = rest.split_once(':').ok_or_else(|| bad("missing method-specific id"))?;
        if method.is_empty() {
            return Err(bad("empty method"));
        }
        if !method.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()) {
            return Err(bad("method must be lowercase letters and digits"));
        }
        if id.is_empty() || id.ends_with(':') {
            return Err(bad("empty method-specific id"));
        }
        let bytes = id.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'.' | b'-' | b'_' | b':' => i += 1,
                b'%' if bytes.get(i + 1).is_some_and(u8::is_ascii_hexdigit)
                    && bytes.get(i + 2).is_some_and(u8::is_ascii_hexdigit) =>
                {
                    i += 3
                }
                _ => return Err(bad("illegal character in method-specific id")),
            }
        }
        Ok(Self { method: method.to_string(), method_specific_id: id.to_string() })
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn method_specific_id(&self) -> &str {
        &self.method_specific_id
    }

    pub fn text(&self) -> String {
        self.to_string()
    }
}

/// Split a DID URL such as `did:key:z6Mk...#z6Mk...` into its DID and
/// optional fragment.
pub fn split_did_url(url: &str) -> Result<(Did, Option<&str>), DidError> {
    match url.split_once('#') {
        Some((did, frag)) => Ok((Did::parse(did)?, Some(frag))),
        None => Ok((Did::parse(url)?, None)),
    }
}

impl fmt::Display for Did {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "did:{}:{}", self.method, self.method_specific_id)
    }
}

impl FromStr for Did {
    type Err = DidError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Did::parse(s)
    }
}

impl Serialize for Did {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Did {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Did::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_listing_did() {
        let did = Did::parse("did:web:uniofscience.com").unwrap();
        assert_eq!(did.method(), "web");
        assert_eq!(did.method_specific_id(), "uniofscience.com");
        assert_eq!(did.text(), "did:web:uniofscience.com");
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["did:web:", "urn:web:x", "did::x", "did:Web:x", "did:web", "did:web:a b", "did:web:a:", "did:web:%zz"] {
            assert!(matches!(Did::parse(bad), Err(DidError::MalformedDid(..))), "{bad}");
        }
    }

    #[test]
    fn percent_encoded_port() {
        let did = Did::parse("did:web:localhost%3A8443:a").unwrap();
        assert_eq!(did.method_specific_id(), "localhost%3A8443:a");
    }

    #[test]
    fn did_url_fragment() {
        let (did, frag) = split_did_url("did:key:z6Mkabc#z6Mkabc").unwrap();
        assert_eq!(did.text(), "did:key:z6Mkabc");
        assert_eq!(frag, Some("z6Mkabc"));
    }

    proptest! {
        #[test]
        fn parse_round_trip(method in "[a-z0-9]{1,6}", segs in prop::collection::vec("[A-Za-z0-9._-]{1,8}", 1..4)) {
            let did = Did::parse(&format!("did:{method}:{}", segs.join(":"))).unwrap();
            prop_assert_eq!(Did::parse(&did.text()).unwrap(), did);
        }
    }
}
