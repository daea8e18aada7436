//! Verification outcomes shared by credentials and presentations.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Why a check failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reason {
    SignatureInvalid,
    MalformedProof,
    SignerMismatch,
    KeyNotFound,
    IssuerUnresolvable,
    SchemaMismatch,
    BadDates,
    Expired,
    NotYetValid,
    Revoked,
    ChallengeMismatch,
    HolderNotSubject,
    EmptyCredentials,
    CredentialInvalid,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum CheckStatus {
    Pass,
    Fail { reason: Reason, detail: String },
    Indeterminate { detail: String },
    NotApplicable,
}

impl CheckStatus {
    pub fn fail(reason: Reason, detail: impl Into<String>) -> Self {
        CheckStatus::Fail { reason, detail: detail.into() }
    }

    pub fn indeterminate(detail: impl Into<String>) -> Self {
        CheckStatus::Indeterminate { detail: detail.into() }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, CheckStatus::Pass)
    }

    pub fn reason(&self) -> Option<Reason> {
        match self {
            CheckStatus::Fail { reason, .. } => Some(*reason),
            _ => None,
        }
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStatus::Pass => f.write_str("pass"),
            CheckStatus::Fail { reason, detail } => write!(f, "FAIL {reason}: {detail}"),
            CheckStatus::Indeterminate { detail } => write!(f, "indeterminate: {detail}"),
            CheckStatus::NotApplicable => f.write_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    #[serde(flatten)]
    pub status: CheckStatus,
}

impl Check {
    pub fn new(check: &str, status: CheckStatus) -> Self {
        Self { check: check.to_string(), status }
    }
}

/// Overall verdict over a set of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Valid,
    Invalid,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Any failure makes the result Invalid; otherwise any indeterminate
/// check makes it Indeterminate.
pub fn verdict<'a>(checks: impl IntoIterator<Item = &'a Check>) -> Verdict {
    let mut out = Verdict::Valid;
    for c in checks {
        match c.status {
            CheckStatus::Fail { .. } => return Verdict::Invalid,
            CheckStatus::Indeterminate { .. } => out = Verdict::Indeterminate,
            CheckStatus::Pass | CheckStatus::NotApplicable => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(status: CheckStatus) -> Check {
        Check { check: "x".into(), status }
    }

    #[test]
    fn verdict_precedence() {
        assert_eq!(verdict(&[c(CheckStatus::Pass), c(CheckStatus::NotApplicable)]), Verdict::Valid);
        assert_eq!(
            verdict(&[c(CheckStatus::indeterminate("net")), c(CheckStatus::Pass)]),
            Verdict::Indeterminate
        );
        assert_eq!(
            verdict(&[c(CheckStatus::indeterminate("net")), c(CheckStatus::fail(Reason::Revoked, ""))]),
            Verdict::Invalid
        );
    }

    #[test]
    fn check_json_shape() {
        let v = serde_json::to_value(c(CheckStatus::fail(Reason::Expired, "at t"))).unwrap();
        assert_eq!(v, serde_json::json!({"check": "x", "status": "fail", "reason": "Expired", "detail": "at t"}));
    }
}
