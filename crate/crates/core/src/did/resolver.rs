use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde_json::Value;
use thiserror::Error;
use url::Url;

use super::key::{document_for, public_key_of};
use super::web::{did_web_url, is_loopback};
use super::{Did, DidDocument};

pub const DEFAULT_CACHE_TTL: Duration = Duration::from_secs(300);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FetchError {
    #[error("not found: {0}")]
    NotFound(String),
    #[error("fetch failed: {0}")]
    Failed(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolveError {
    #[error("no resolver backend for method {0:?}")]
    UnsupportedMethod(String),
    #[error("fetch failed for {did}: {reason}")]
    FetchFailed { did: String, reason: String },
    #[error("invalid DID document for {did}: {reason}")]
    DocumentInvalid { did: String, reason: String },
    #[error("DID not found: {0}")]
    NotFound(String),
}

impl ResolveError {
    /// True when the failure says nothing about the document itself.
    pub fn is_transient(&self) -> bool {
        matches!(self, ResolveError::FetchFailed { .. })
    }
}

/// Retrieves bytes for a URL.
#[async_trait]
pub trait Fetcher: Send + Sync {
    async fn get(&self, url: &Url) -> Result<Vec<u8>, FetchError>;

    /// Whether calls leave the process. Counted by [`Resolver`].
    fn is_network(&self) -> bool {
        true
    }
}

/// HTTPS client. Plain HTTP is allowed only to loopback hosts, and only
/// when `allow_insecure_loopback` is set.
#[derive(Debug, Clone)]
pub struct HttpFetcher {
    client: reqwest::Client,
    allow_insecure_loopback: bool,
}

impl HttpFetcher {
    pub fn new(allow_insecure_loopback: bool) -> Self {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_secs(10))
            .build()
            .expect("http client");
        Self { client, allow_insecure_loopback }
    }

    /// The URL actually requested: loopback `https` becomes `http` in test mode.
    pub fn effective_url(&self, url: &Url) -> Result<Url, FetchError> {
        match url.scheme() {
            "https" if self.allow_insecure_loopback && is_loopback(url) => {
                let mut u = url.clone();
                u.set_scheme("http").expect("http scheme");
                Ok(u)
            }
            "https" => Ok(url.clone()),
            "http" if self.allow_insecure_loopback && is_loopback(url) => Ok(url.clone()),
            _ => Err(FetchError::Failed(format!("refusing insecure URL {url}"))),
        }
    }
}

#[async_trait]
impl Fetcher for HttpFetcher {
    async fn get(&self, url: &Url) -> Result<Vec<u8>, FetchError> {
        let target = self.effective_url(url)?;
        let resp = self
            .client
            .get(target.clone())
            .send()
            .await
            .map_err(|e| FetchError::Failed(format!("{target}: {e}")))?;
        let status = resp.status();
        if status == reqwest::StatusCode::NOT_FOUND {
            return Err(FetchError::NotFound(target.to_string()));
        }
        if !status.is_success() {
            return Err(FetchError::Failed(format!("{target}: HTTP {status}")));
        }
        resp.bytes()
            .await
            .map(|b| b.to_vec())
            .map_err(|e| FetchError::Failed(format!("{target}: {e}")))
    }
}

/// In-memory URL → bytes map. Not counted as network.
#[derive(Debug, Default)]
pub struct StaticFetcher {
    docs: RwLock<HashMap<String, Vec<u8>>>,
    fallback: Option<Vec<u8>>,
}

impl StaticFetcher {
    pub fn new() -> Self {
        Self::default()
    }

    /// Serve `bytes` for every URL not explicitly inserted.
    pub fn with_fallback(bytes: Vec<u8>) -> Self {
        Self { docs: RwLock::default(), fallback: Some(bytes) }
    }

    pub fn insert(&self, url: impl Into<String>, bytes: Vec<u8>) {
        self.docs.write().expect("lock").insert(url.into(), bytes);
    }
}

#[async_trait]
impl Fetcher for StaticFetcher {
    async fn get(&self, url: &Url) -> Result<Vec<u8>, FetchError> {
        if let Some(b) = self.docs.read().expect("lock").get(url.as_str()) {
            return Ok(b.clone());
        }
        self.fallback.clone().ok_or_else(|| FetchError::NotFound(url.to_string()))
    }

    fn is_network(&self) -> bool {
        false
    }
}

/// Produces raw DID document JSON for the DIDs it supports.
#[async_trait]
pub trait DidBackend: Send + Sync {
    fn supports(&self, did: &Did) -> bool;

    async fn fetch(&self, did: &Did) -> Result<Value, ResolveError>;

    fn is_network(&self) -> bool {
        false
    }
}

/// `did:web` over a [`Fetcher`].
pub struct WebBackend {
    fetcher: Arc<dyn Fetcher>,
}

impl WebBackend {
    pub fn new(fetcher: Arc<dyn Fetcher>) -> Self {
        Self { fetcher }
    }
}

#[async_trait]
impl DidBackend for WebBackend {
    fn supports(&self, did: &Did) -> bool {
        did.method() == "web"
    }

    async fn fetch(&self, did: &Did) -> Result<Value, ResolveError> {
        let url = did_web_url(did).map_err(|e| ResolveError::DocumentInvalid {
            did: did.text(),
            reason: e.to_string(),
        })?;
        let bytes = self.fetcher.get(&url).await.map_err(|e| match e {
            FetchError::NotFound(_) => ResolveError::NotFound(did.text()),
            FetchError::Failed(reason) => ResolveError::FetchFailed { did: did.text(), reason },
        })?;
        serde_json::from_slice(&bytes).map_err(|e| ResolveError::DocumentInvalid {
            did: did.text(),
            reason: format!("not JSON: {e}"),
        })
    }

    fn is_network(&self) -> bool {
        self.fetcher.is_network()
    }
}

/// `did:key`, derived locally.
#[derive(Debug, Default, Clone, Copy)]
pub struct KeyBackend;

#[async_trait]
impl DidBackend for KeyBackend {
    fn supports(&self, did: &Did) -> bool {
        did.method() == "key"
    }

    async fn fetch(&self, did: &Did) -> Result<Value, ResolveError> {
        let key = public_key_of(did).map_err(|e| ResolveError::DocumentInvalid {
            did: did.text(),
            reason: e.to_string(),
        })?;
        Ok(serde_json::to_value(document_for(did, &key)).expect("document serializes"))
    }
}

/// Fixed map of DID → document JSON, any method.
#[derive(Default)]
pub struct MemoryBackend {
    docs: RwLock<HashMap<String, Value>>,
}

impl MemoryBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, did: &Did, doc: Value) {
        self.docs.write().expect("lock").insert(did.text(), doc);
    }

    pub fn insert_document(&self, doc: &DidDocument) {
        self.insert(&doc.id, serde_json::to_value(doc).expect("document serializes"));
    }
}

#[async_trait]
impl DidBackend for MemoryBackend {
    fn supports(&self, did: &Did) -> bool {
        self.docs.read().expect("lock").contains_key(&did.text())
    }

    async fn fetch(&self, did: &Did) -> Result<Value, ResolveError> {
        self.docs
            .read()
            .expect("lock")
            .get(&did.text())
            .cloned()
            .ok_or_else(|| ResolveError::NotFound(did.text()))
    }
}

/// DID documents read from a directory: `did.json` plus every `*.json`
/// under `dids/`, each keyed by its own `id` field.
pub struct DirectoryBackend {
    inner: MemoryBackend,
}

impl DirectoryBackend {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        let inner = MemoryBackend::new();
        let mut files = vec![dir.join("did.json")];
        if let Ok(rd) = fs::read_dir(dir.join("dids")) {
            for e in rd.flatten() {
                if e.path().extension().is_some_and(|x| x == "json") {
                    files.push(e.path());
                }
            }
        }
        for f in files {
            let bytes = match fs::read(&f) {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => continue,
                Err(e) => return Err(e),
            };
            let value: Value = serde_json::from_slice(&bytes)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", f.display())))?;
            let did = value
                .get("id")
                .and_then(Value::as_str)
                .and_then(|s| Did::parse(s).ok())
                .ok_or_else(|| {
                    std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: missing DID id", f.display()))
                })?;
            inner.insert(&did, value);
        }
        Ok(Self { inner })
    }
}

#[async_trait]
impl DidBackend for DirectoryBackend {
    fn supports(&self, did: &Did) -> bool {
        self.inner.supports(did)
    }

    async fn fetch(&self, did: &Did) -> Result<Value, ResolveError> {
        self.inner.fetch(did).await
    }
}

/// Resolves DIDs through an ordered list of backends, with a TTL cache,
/// and fetches auxiliary documents (revocation registries).
pub struct Resolver {
    backends: Vec<Arc<dyn DidBackend>>,
    documents: Option<Arc<dyn Fetcher>>,
    cache: Mutex<HashMap<Did, (DidDocument, Instant)>>,
    cache_ttl: Duration,
    fetches: AtomicUsize,
    network_fetches: AtomicUsize,
}

impl std::fmt::Debug for Resolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Resolver")
            .field("backends", &self.backends.len())
            .field("cache_ttl", &self.cache_ttl)
            .field("fetches", &self.fetch_count())
            .field("network_fetches", &self.network_fetch_count())
            .finish()
    }
}

#[derive(Default)]
pub struct ResolverBuilder {
    backends: Vec<Arc<dyn DidBackend>>,
    documents: Option<Arc<dyn Fetcher>>,
    cache_ttl: Option<Duration>,
}

impl ResolverBuilder {
    pub fn backend(mut self, backend: Arc<dyn DidBackend>) -> Self {
        self.backends.push(backend);
        self
    }

    /// Fetcher for non-DID documents such as revocation registries.
    pub fn document_fetcher(mut self, fetcher: Arc<dyn Fetcher>) -> Self {
        self.documents = Some(fetcher);
        self
    }

    pub fn cache_ttl(mut self, ttl: Duration) -> Self {
        self.cache_ttl = Some(ttl);
        self
    }

    pub fn build(self) -> Resolver {
        Resolver {
            backends: self.backends,
            documents: self.documents,
            cache: Mutex::default(),
            cache_ttl: self.cache_ttl.unwrap_or(DEFAULT_CACHE_TTL),
            fetches: AtomicUsize::new(0),
            network_fetches: AtomicUsize::new(0),
        }
    }
}

impl Resolver {
    pub fn builder() -> ResolverBuilder {
        ResolverBuilder::default()
    }

    /// `did:key` locally and `did:web` plus registries over HTTPS.
    pub fn standard(allow_insecure_loopback: bool) -> Self {
        let http: Arc<dyn Fetcher> = Arc::new(HttpFetcher::new(allow_insecure_loopback));
        Self::builder()
            .backend(Arc::new(KeyBackend))
            .backend(Arc::new(WebBackend::new(http.clone())))
            .document_fetcher(http)
            .build()
    }

    /// Total backend and document fetches performed.
    pub fn fetch_count(&self) -> usize {
        self.fetches.load(Ordering::SeqCst)
    }

    /// Fetches by backends or fetchers that report `is_network`.
    pub fn network_fetch_count(&self) -> usize {
        self.network_fetches.load(Ordering::SeqCst)
    }

    pub fn clear_cache(&self) {
        self.cache.lock().expect("lock").clear();
    }

    pub async fn resolve(&self, did: &Did) -> Result<DidDocument, ResolveError> {
        if let Some((doc, at)) = self.cache.lock().expect("lock").get(did) {
            if at.elapsed() < self.cache_ttl {
                return Ok(doc.clone());
            }
        }
        let backend = self
            .backends
            .iter()
            .find(|b| b.supports(did))
            .ok_or_else(|| ResolveError::UnsupportedMethod(did.method().to_string()))?;
        self.count(backend.is_network());
        let raw = backend.fetch(did).await?;
        let invalid = |reason: String| ResolveError::DocumentInvalid { did: did.text(), reason };
        let doc: DidDocument = serde_json::from_value(raw).map_err(|e| invalid(e.to_string()))?;
        if &doc.id != did {
            return Err(invalid(format!("document id {} does not match", doc.id)));
        }
        doc.validate().map_err(invalid)?;
        if !self.cache_ttl.is_zero() {
            self.cache.lock().expect("lock").insert(did.clone(), (doc.clone(), Instant::now()));
        }
        Ok(doc)
    }

    /// Fetch and parse a JSON document that is not a DID document.
    pub async fn fetch_json(&self, url: &str) -> Result<Value, FetchError> {
        let fetcher = self
            .documents
            .as_ref()
            .ok_or_else(|| FetchError::Failed(format!("no document fetcher configured for {url}")))?;
        let url = Url::parse(url).map_err(|e| FetchError::Failed(format!("{url}: {e}")))?;
        self.count(fetcher.is_network());
        let bytes = fetcher.get(&url).await?;
        serde_json::from_slice(&bytes).map_err(|e| FetchError::Failed(format!("{url}: not JSON: {e}")))
    }

    fn count(&self, network: bool) {
        self.fetches.fetch_add(1, Ordering::SeqCst);
        if network {
            self.network_fetches.fetch_add(1, Ordering::SeqCst);
        }
    }
}
