use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{RevocationRegistry, VerifiableCredential, VERIFIABLE_CREDENTIAL};
use crate::did::{Did, KeyPurpose, Resolver};
use crate::proof::verify_embedded;
use crate::report::{verdict, Check, CheckStatus, Reason, Verdict};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Tolerance applied to both ends of the validity window.
    pub clock_skew_secs: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerificationReport {
    pub credential_id: Option<String>,
    pub issuer: Option<Did>,
    pub subject: Option<Did>,
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.verdict == Verdict::Valid
    }

    pub fn check(&self, name: &str) -> Option<&CheckStatus> {
        self.checks.iter().find(|c| c.check == name).map(|c| &c.status)
    }

    /// Failure reasons across all checks.
    pub fn reasons(&self) -> Vec<Reason> {
        self.checks.iter().filter_map(|c| c.status.reason()).collect()
    }

    fn finish(mut self) -> Self {
        self.verdict = verdict(&self.checks);
        self
    }
}

/// Verify a typed credential.
pub async fn verify_credential(
    vc: &VerifiableCredential,
    resolver: &Resolver,
    at: Timestamp,
    options: VerifyOptions,
) -> VerificationReport {
    verify_parsed(&vc.to_value(), vc, resolver, at, options).await
}

/// Verify a credential exactly as received. The signature is checked over
/// `raw` itself, not a re-serialization.
pub async fn verify_credential_value(
    raw: &Value,
    resolver: &Resolver,
    at: Timestamp,
    options: VerifyOptions,
) -> VerificationReport {
    match serde_json::from_value::<VerifiableCredential>(raw.clone()) {
        Ok(vc) => verify_parsed(raw, &vc, resolver, at, options).await,
        Err(e) => VerificationReport {
            credential_id: raw.get("id").and_then(Value::as_str).map(str::to_string),
            issuer: None,
            subject: None,
            verdict: Verdict::Invalid,
            checks: vec![Check::new("format", CheckStatus::fail(Reason::MalformedProof, e.to_string()))],
            notes: vec![],
        },
    }
}

async fn verify_parsed(
    raw: &Value,
    vc: &VerifiableCredential,
    resolver: &Resolver,
    at: Timestamp,
    options: VerifyOptions,
) -> VerificationReport {
    let mut report = VerificationReport {
        credential_id: Some(vc.id.clone()),
        issuer: Some(vc.issuer.clone()),
        subject: Some(vc.subject().clone()),
        verdict: Verdict::Indeterminate,
        checks: Vec::with_capacity(4),
        notes: vec![],
    };

    let sig = verify_embedded(raw, "proof", &vc.issuer, KeyPurpose::AssertionMethod, resolver).await;
    if sig.lenient_key {
        report.notes.push(format!(
            "issuer key {} is listed under authentication only; accepted for assertion",
            vc.proof.verification_method
        ));
    }
    report.checks.push(Check::new("signature", sig.status));

    let schema = if !vc.types.iter().any(|t| t == VERIFIABLE_CREDENTIAL) {
        CheckStatus::fail(Reason::SchemaMismatch, "type does not include VerifiableCredential")
    } else {
        match vc.credential_schema.check_claims(&vc.credential_subject.claims) {
            Ok(()) => CheckStatus::Pass,
            Err(e) => CheckStatus::fail(Reason::SchemaMismatch, e),
        }
    };
    report.checks.push(Check::new("schema", schema));

    report.checks.push(Check::new("temporal", temporal(vc, at, options.clock_skew_secs)));
    report.checks.push(Check::new("revocation", revocation(vc, resolver).await));
    report.finish()
}

fn temporal(vc: &VerifiableCredential, at: Timestamp, skew: i64) -> CheckStatus {
    if let Some(exp) = vc.expiration_date {
        if exp <= vc.issuance_date {
            return CheckStatus::fail(Reason::BadDates, format!("expiration {exp} not after issuance"));
        }
        if at >= exp.plus_secs(skew) {
            return CheckStatus::fail(Reason::Expired, format!("expired at {exp}"));
        }
    }
    if at < vc.issuance_date.plus_secs(-skew) {
        return CheckStatus::fail(Reason::NotYetValid, format!("not valid before {}", vc.issuance_date));
    }
    CheckStatus::Pass
}

async fn revocation(vc: &VerifiableCredential, resolver: &Resolver) -> CheckStatus {
    let Some(status) = &vc.credential_status else {
        return CheckStatus::NotApplicable;
    };
    let raw = match resolver.fetch_json(&status.id).await {
        Ok(v) => v,
        Err(e) => return CheckStatus::indeterminate(format!("registry unavailable: {e}")),
    };
    let registry: RevocationRegistry = match serde_json::from_value(raw) {
        Ok(r) => r,
        Err(e) => return CheckStatus::indeterminate(format!("registry malformed: {e}")),
    };
    if registry.issuer != vc.issuer {
        return CheckStatus::indeterminate(format!(
            "registry issuer {} is not credential issuer {}",
            registry.issuer, vc.issuer
        ));
    }
    let check = registry.verify(resolver).await;
    if !check.status.is_pass() {
        return CheckStatus::indeterminate(format!("registry not trusted: {}", check.status));
    }
    if registry.is_revoked(&status.status_id) {
        CheckStatus::fail(Reason::Revoked, format!("status {} revoked as of {}", status.status_id, registry.updated))
    } else {
        CheckStatus::Pass
    }
}
