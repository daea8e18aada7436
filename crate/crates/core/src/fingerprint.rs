//! Content fingerprints that bind a credential to the exact dataset bytes.
//!
//! A single file hashes to `SHA-256(bytes)`. A directory hashes to the
//! SHA-256 of the canonical JSON manifest
//! `[{"digest": <hex>, "path": <relative/path>}, ...]`, sorted by path.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::canonical::canonicalize_serialize;

pub const SHA256: &str = "sha256";

#[derive(Debug, Error)]
pub enum FingerprintError {
    #[error("unreadable path {path}: {source}")]
    UnreadablePath {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("symbolic link {0} points outside the dataset root")]
    SymlinkEscape(PathBuf),
    #[error("unsupported digest algorithm {0:?}")]
    AlgorithmUnsupported(String),
    #[error("malformed digest {0:?}")]
    MalformedDigest(String),
    #[error("path {0} is not valid UTF-8")]
    NonUtf8Path(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FingerprintForm {
    File,
    Tree,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFingerprint {
    pub algorithm: String,
    pub digest: String,
    pub form: FingerprintForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<Vec<ManifestEntry>>,
}

impl DatasetFingerprint {
    /// Check the structural invariants: known algorithm, well-formed digest,
    /// manifest present iff tree form and consistent with the digest.
    pub fn validate(&self) -> Result<(), FingerprintError> {
        if self.algorithm != SHA256 {
            return Err(FingerprintError::AlgorithmUnsupported(self.algorithm.clone()));
        }
        if !is_hex_digest(&self.digest) {
            return Err(FingerprintError::MalformedDigest(self.digest.clone()));
        }
        match (&self.form, &self.manifest) {
            (FingerprintForm::File, None) => Ok(()),
            (FingerprintForm::Tree, Some(m)) => {
                if manifest_digest(m) != self.digest {
                    return Err(FingerprintError::MalformedDigest(format!(
                        "{} does not match manifest",
                        self.digest
                    )));
                }
                Ok(())
            }
            _ => Err(FingerprintError::MalformedDigest("manifest presence does not match form".into())),
        }
    }
}

/// True for 64 lowercase hex characters.
pub fn is_hex_digest(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// Strip an optional `0x` prefix and lowercase. Does not validate.
pub fn normalize_digest(input: &str) -> String {
    let s = input.trim();
    let s = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    s.to_ascii_lowercase()
}

fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub fn fingerprint_bytes(data: &[u8]) -> DatasetFingerprint {
    DatasetFingerprint {
        algorithm: SHA256.into(),
        digest: sha256_hex(data),
        form: FingerprintForm::File,
        manifest: None,
    }
}

pub fn fingerprint_file(path: &Path) -> Result<DatasetFingerprint, FingerprintError> {
    let data = fs::read(path)
        .map_err(|source| FingerprintError::UnreadablePath { path: path.into(), source })?;
    Ok(fingerprint_bytes(&data))
}

/// Top-level digest for a manifest. Entries are sorted first.
pub fn manifest_digest(entries: &[ManifestEntry]) -> String {
    let mut sorted = entries.to_vec();
    sorted.sort();
    let bytes = canonicalize_serialize(&sorted).expect("manifest holds only strings");
    sha256_hex(&bytes)
}

/// Build a tree fingerprint from `(relative path, file bytes)` pairs. The
/// order of `files` does not matter.
pub fn fingerprint_entries<'a>(
    files: impl IntoIterator<Item = (&'a str, &'a [u8])>,
) -> DatasetFingerprint {
    let mut manifest: Vec<ManifestEntry> = files
        .into_iter()
        .map(|(path, data)| ManifestEntry { path: path.to_string(), digest: sha256_hex(data) })
        .collect();
    manifest.sort();
    DatasetFingerprint {
        algorithm: SHA256.into(),
        digest: manifest_digest(&manifest),
        form: FingerprintForm::Tree,
        manifest: Some(manifest),
    }
}

pub fn fingerprint_tree(root: &Path) -> Result<DatasetFingerprint, FingerprintError> {
    let files = collect_tree(root)?;
    let mut manifest = Vec::with_capacity(files.len());
    for (rel, abs) in files {
        let data = fs::read(&abs)
            .map_err(|source| FingerprintError::UnreadablePath { path: abs.clone(), source })?;
        manifest.push(ManifestEntry { path: rel, digest: sha256_hex(&data) });
    }
    manifest.sort();
    Ok(DatasetFingerprint {
        algorithm: SHA256.into(),
        digest: manifest_digest(&manifest),
        form: FingerprintForm::Tree,
        manifest: Some(manifest),
    })
}

/// File fingerprint for a regular file, tree fingerprint for a directory.
pub fn fingerprint_path(path: &Path) -> Result<DatasetFingerprint, FingerprintError> {
    let meta = fs::metadata(path)
        .map_err(|source| FingerprintError::UnreadablePath { path: path.into(), source })?;
    if meta.is_dir() { fingerprint_tree(path) } else { fingerprint_file(path) }
}

/// Regular files under `root` keyed by `/`-separated relative path.
/// Symlinks are followed only when their target stays inside `root`.
fn collect_tree(root: &Path) -> Result<BTreeMap<String, PathBuf>, FingerprintError> {
    let canon_root = root
        .canonicalize()
        .map_err(|source| FingerprintError::UnreadablePath { path: root.into(), source })?;
    let mut out = BTreeMap::new();
    let mut stack = vec![(canon_root.clone(), String::new())];
    while let Some((dir, prefix)) = stack.pop() {
        let read = fs::read_dir(&dir)
            .map_err(|source| FingerprintError::UnreadablePath { path: dir.clone(), source })?;
        for entry in read {
            let entry = entry
                .map_err(|source| FingerprintError::UnreadablePath { path: dir.clone(), source })?;
            let path = entry.path();
            let name = entry
                .file_name()
                .into_string()
                .map_err(|_| FingerprintError::NonUtf8Path(path.clone()))?;
            let rel = if prefix.is_empty() { name } else { format!("{prefix}/{name}") };
            let ft = entry
                .file_type()
                .map_err(|source| FingerprintError::UnreadablePath { path: path.clone(), source })?;
            let target = if ft.is_symlink() {
                let resolved = path
                    .canonicalize()
                    .map_err(|source| FingerprintError::UnreadablePath { path: path.clone(), source })?;
                if !resolved.starts_with(&canon_root) {
                    return Err(FingerprintError::SymlinkEscape(path));
                }
                resolved
            } else {
                path
            };
            let meta = fs::metadata(&target)
                .map_err(|source| FingerprintError::UnreadablePath { path: target.clone(), source })?;
            if meta.is_dir() {
                if ft.is_symlink() {
                    // A link to a directory inside the root would be hashed
                    // twice and may loop; record nothing for it.
                    continue;
                }
                stack.push((target, rel));
            } else if meta.is_file() {
                out.insert(rel, target);
            }
        }
    }
    Ok(out)
}

/// What is being checked against a fingerprint.
#[derive(Debug, Clone, Copy)]
pub enum DataSource<'a> {
    Bytes(&'a [u8]),
    Path(&'a Path),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BindingReport {
    pub matches: bool,
    pub expected_digest: String,
    pub actual_digest: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mismatched: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl fmt::Display for BindingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.matches {
            return write!(f, "hash match ({})", self.actual_digest);
        }
        write!(f, "hash mismatch: expected {}, got {}", self.expected_digest, self.actual_digest)?;
        for (label, list) in [("changed", &self.mismatched), ("missing", &self.missing), ("extra", &self.extra)] {
            if !list.is_empty() {
                write!(f, "; {label}: {}", list.join(", "))?;
            }
        }
        if let Some(note) = &self.note {
            write!(f, "; {note}")?;
        }
        Ok(())
    }
}

/// Recompute the fingerprint of `data` and compare it with `fp`.
///
/// A file fingerprint checked against a directory (or the reverse) is a
/// mismatch. Tree fingerprints without a manifest can still be compared
/// by top-level digest, but per-file detail is only available with one.
pub fn check_binding(
    fp: &DatasetFingerprint,
    data: DataSource<'_>,
) -> Result<BindingReport, FingerprintError> {
    if fp.algorithm != SHA256 {
        return Err(FingerprintError::AlgorithmUnsupported(fp.algorithm.clone()));
    }
    let expected = normalize_digest(&fp.digest);
    let actual = match data {
        DataSource::Bytes(b) => fingerprint_bytes(b),
        DataSource::Path(p) => fingerprint_path(p)?,
    };
    let mut report = BindingReport {
        matches: false,
        expected_digest: expected.clone(),
        actual_digest: actual.digest.clone(),
        mismatched: vec![],
        missing: vec![],
        extra: vec![],
        note: None,
    };
    match (fp.form, actual.form) {
        (FingerprintForm::File, FingerprintForm::File) | (FingerprintForm::Tree, FingerprintForm::Tree) => {
            report.matches = expected == actual.digest;
        }
        (FingerprintForm::File, FingerprintForm::Tree) => {
            report.note = Some("expected a single file, found a directory".into());
        }
        (FingerprintForm::Tree, FingerprintForm::File) => {
            report.note = Some("expected a directory, found a single file".into());
        }
    }
    if let (Some(want), Some(have)) = (&fp.manifest, &actual.manifest) {
        let want: BTreeMap<&str, &str> = want.iter().map(|e| (e.path.as_str(), e.digest.as_str())).collect();
        let have: BTreeMap<&str, &str> = have.iter().map(|e| (e.path.as_str(), e.digest.as_str())).collect();
        for (path, digest) in &want {
            match have.get(path) {
                None => report.missing.push(path.to_string()),
                Some(d) if d != digest => report.mismatched.push(path.to_string()),
                Some(_) => {}
            }
        }
        report.extra = have.keys().filter(|p| !want.contains_key(*p)).map(|p| p.to_string()).collect();
    }
    Ok(report)
}
