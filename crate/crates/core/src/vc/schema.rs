use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::fingerprint::{is_hex_digest, normalize_digest};

pub const HASH_OF_DATA: &str = "Hash of Data";
pub const DATA_ETHICALLY_SOURCED: &str = "Data Ethically Sourced";
pub const DATASET_PROVENANCE_V1: &str = "dataset-provenance-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttributeKind {
    String,
    HexDigest,
    YesNo,
    Date,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

/// Vocabulary for the claims a credential makes. Embedded whole in each
/// credential so conformance can be checked offline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredentialSchema {
    pub id: String,
    #[serde(rename = "type")]
    pub schema_type: String,
    pub name: String,
    pub attributes: Vec<Attribute>,
}

impl CredentialSchema {
    pub fn new(id: impl Into<String>, name: impl Into<String>, attributes: Vec<Attribute>) -> Result<Self, String> {
        let schema = Self {
            id: id.into(),
            schema_type: "DatasetAttributeSchema".into(),
            name: name.into(),
            attributes,
        };
        schema.validate()?;
        Ok(schema)
    }

    /// `Hash of Data` (hex digest) and `Data Ethically Sourced` (YES/NO).
    pub fn dataset_provenance_v1() -> Self {
        Self::new(
            format!("urn:datacred:schema:{DATASET_PROVENANCE_V1}"),
            DATASET_PROVENANCE_V1,
            vec![
                Attribute { name: HASH_OF_DATA.into(), kind: AttributeKind::HexDigest },
                Attribute { name: DATA_ETHICALLY_SOURCED.into(), kind: AttributeKind::YesNo },
            ],
        )
        .expect("built-in schema is valid")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.attributes.is_empty() {
            return Err("schema has no attributes".into());
        }
        let mut seen = BTreeSet::new();
        for a in &self.attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(format!("duplicate attribute {:?}", a.name));
            }
        }
        Ok(())
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Every schema attribute present, no unknown attributes, each value
    /// of the declared kind.
    pub fn check_claims(&self, claims: &BTreeMap<String, String>) -> Result<(), String> {
        self.validate()?;
        for name in claims.keys() {
            if self.attribute(name).is_none() {
                return Err(format!("unknown attribute {name:?}"));
            }
        }
        for attr in &self.attributes {
            let value = claims.get(&attr.name).ok_or_else(|| format!("missing attribute {:?}", attr.name))?;
            check_kind(attr.kind, value).map_err(|why| format!("{:?}: {why}", attr.name))?;
        }
        Ok(())
    }

    /// Input cleanup: strip `0x` from and lowercase hex digests, uppercase yes/no.
    pub fn normalize_claims(&self, claims: &mut BTreeMap<String, String>) {
        for (name, value) in claims.iter_mut() {
            match self.attribute(name).map(|a| a.kind) {
                Some(AttributeKind::HexDigest) => *value = normalize_digest(value),
                Some(AttributeKind::YesNo) => *value = value.trim().to_ascii_uppercase(),
                _ => {}
            }
        }
    }
}

fn check_kind(kind: AttributeKind, value: &str) -> Result<(), String> {
    match kind {
        AttributeKind::String => Ok(()),
        AttributeKind::HexDigest if is_hex_digest(value) => Ok(()),
        AttributeKind::HexDigest => Err(format!("{value:?} is not 64 lowercase hex characters")),
        AttributeKind::YesNo if value == "YES" || value == "NO" => Ok(()),
        AttributeKind::YesNo => Err(format!("{value:?} is not YES or NO")),
        AttributeKind::Date => NaiveDate::parse_from_str(value, "%Y-%m-%d")
            .map(|_| ())
            .map_err(|_| format!("{value:?} is not a YYYY-MM-DD date")),
    }
}
