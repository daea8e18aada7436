//! Verifiable credentials for datasets.
//!
//! A publisher signs claims about a dataset, binds them to its content by
//! SHA-256 fingerprint, and hands the credential to the dataset's own
//! agent. Anyone can later check the credential offline, or ask the agent
//! for a fresh challenge-bound presentation.

pub mod agent;
pub mod bundle;
pub mod canonical;
pub mod cli;
pub mod did;
pub mod fingerprint;
pub mod keys;
pub mod proof;
pub mod report;
pub mod time;
pub mod vc;
pub mod vp;
pub mod wallet;

pub use did::{Did, DidDocument, Resolver};
pub use keys::{KeyPair, PublicKey, Signature};
pub use report::{CheckStatus, Reason, Verdict};
pub use time::Timestamp;
pub use vc::{issue_credential, verify_credential, VerifiableCredential};
pub use vp::{create_presentation, verify_presentation, VerifiablePresentation};
pub use wallet::Wallet;
