//! The `datacred` command line.
//!
//! Exit status: 0 on success, 1 when a well-formed document fails
//! verification (or cannot be fully verified), 2 on usage or I/O errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::agent::{self, AdminClient, AgentConfig, Invitation, IssueRequest, RevokeRequest};
use crate::bundle::{self, Bundle};
use crate::canonical::parse_strict;
use crate::did::key::{did_key_for, generate_did_key};
use crate::did::web::did_web_for;
use crate::did::{Did, DidDocument, Resolver};
use crate::fingerprint::{fingerprint_path, BindingReport, DataSource};
use crate::keys::KeyPair;
use crate::report::{Check, CheckStatus, Verdict};
use crate::time::Timestamp;
use crate::vc::{
    check_binding_claim, issue_credential, CredentialSchema, CredentialStatus, IssueOptions, RevocationRegistry,
    VerifiableCredential, VerificationReport, VerifyOptions, DATASET_PROVENANCE_V1,
};
use crate::vp::{create_presentation, new_challenge, verify_presentation_value, PresentationReport};
use crate::wallet::{write_atomic, Wallet};

pub const PASSPHRASE_ENV: &str = "DATACRED_PASSPHRASE";

#[derive(Debug, Parser)]
#[command(name = "datacred", version, about = "Verifiable credentials for datasets")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct WalletArgs {
    /// Encrypted wallet file; created if missing. Passphrase comes from $DATACRED_PASSPHRASE.
    #[arg(long)]
    wallet: PathBuf,
    /// Key label inside the wallet.
    #[arg(long, default_value = "default")]
    label: String,
}

#[derive(Debug, Args)]
struct NetArgs {
    /// Allow plain HTTP to loopback hosts when resolving (test setups only).
    #[arg(long)]
    insecure_loopback: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a key pair and store it in a wallet.
    Keygen {
        #[command(flatten)]
        wallet: WalletArgs,
        /// 32-byte seed as hex, for reproducible keys.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Create and resolve DIDs.
    #[command(subcommand)]
    Did(DidCommand),
    /// Fingerprint a file or directory.
    Hash { path: PathBuf },
    /// Print a fresh 128-bit challenge.
    Challenge,
    /// Issue a signed credential.
    Issue {
        #[command(flatten)]
        wallet: WalletArgs,
        #[arg(long)]
        issuer: Did,
        #[arg(long)]
        subject: Did,
        /// Built-in schema name or path to a schema JSON file.
        #[arg(long, default_value = DATASET_PROVENANCE_V1)]
        schema: String,
        /// Claim as `name=value`; repeatable.
        #[arg(long = "claim", value_name = "NAME=VALUE", required = true)]
        claims: Vec<String>,
        /// Fill the `Hash of Data` claim from this file or directory.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        expires: Option<Timestamp>,
        /// Revocation registry URL to reference.
        #[arg(long, requires = "status_id")]
        registry_url: Option<String>,
        #[arg(long, requires = "registry_url")]
        status_id: Option<String>,
        /// Verification method id, when it is not the issuer's default.
        #[arg(long)]
        verification_method: Option<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Verify a credential.
    Verify {
        /// Credential file. Defaults to the bundle's credential.json.
        credential: Option<PathBuf>,
        /// Also check the credential's hash claim against this data.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Resolve only from this bundle directory; no network access.
        #[arg(long)]
        offline_bundle: Option<PathBuf>,
        /// Verify as of this time instead of now.
        #[arg(long)]
        at: Option<Timestamp>,
        #[arg(long, default_value_t = 0)]
        clock_skew: i64,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Wrap credentials in a presentation bound to a challenge.
    Present {
        #[command(flatten)]
        wallet: WalletArgs,
        /// Holder DID. Defaults to the wallet key's did:key.
        #[arg(long)]
        holder: Option<Did>,
        #[arg(long = "credential", required = true)]
        credentials: Vec<PathBuf>,
        #[arg(long)]
        challenge: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Verify a presentation against the challenge you issued.
    VerifyPresentation {
        presentation: PathBuf,
        #[arg(long)]
        challenge: String,
        #[arg(long)]
        offline_bundle: Option<PathBuf>,
        #[arg(long)]
        at: Option<Timestamp>,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Add a status id to a revocation registry file, creating it if needed.
    Revoke {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        status_id: String,
        #[command(flatten)]
        wallet: WalletArgs,
        /// Registry issuer; required when creating a registry.
        #[arg(long)]
        issuer: Option<Did>,
    },
    /// Write an offline verification bundle.
    Bundle {
        #[arg(long)]
        credential: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Issuer DID document; resolved online when omitted.
        #[arg(long)]
        issuer_doc: Option<PathBuf>,
        /// Further DID documents to include.
        #[arg(long = "did-doc")]
        did_docs: Vec<PathBuf>,
        /// Revocation registry; fetched from the credential's status URL when omitted.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[command(flatten)]
        net: NetArgs,
    },
    /// Run and control agents.
    #[command(subcommand)]
    Agent(AgentCommand),
}

#[derive(Debug, Subcommand)]
enum DidCommand {
    /// Print a did:web document for hosting at the domain's well-known path.
    CreateWeb {
        /// Host, optionally with `:port`.
        #[arg(long)]
        domain: String,
        /// Extra path segments.
        #[arg(long = "path")]
        path: Vec<String>,
        #[command(flatten)]
        wallet: WalletArgs,
        /// Agent endpoint to advertise.
        #[arg(long)]
        service: Option<String>,
    },
    /// Print the did:key document for a wallet key.
    Key {
        #[command(flatten)]
        wallet: WalletArgs,
    },
    /// Resolve a DID and print its document.
    Resolve {
        did: Did,
        #[command(flatten)]
        net: NetArgs,
    },
}

#[derive(Debug, Args)]
struct AdminArgs {
    /// Admin base URL, e.g. http://127.0.0.1:7001.
    #[arg(long, conflicts_with = "config")]
    admin: Option<String>,
    /// Agent config; the admin URL is taken from its listen address.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum AgentCommand {
    /// Start an agent and serve until interrupted.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    Status {
        #[command(flatten)]
        admin: AdminArgs,
    },
    Connections {
        #[command(flatten)]
        admin: AdminArgs,
    },
    Credentials {
        #[command(flatten)]
        admin: AdminArgs,
    },
    /// Connect to another agent.
    Connect {
        #[command(flatten)]
        admin: AdminArgs,
        #[arg(long)]
        did: Did,
        /// The peer's inbox URL.
        #[arg(long)]
        endpoint: String,
    },
    /// Issue a credential over a connection (publisher).
    Issue {
        #[command(flatten)]
        admin: AdminArgs,
        #[arg(long)]
        subject: Did,
        #[arg(long = "claim", value_name = "NAME=VALUE", required = true)]
        claims: Vec<String>,
        #[arg(long)]
        expires: Option<Timestamp>,
    },
    /// Ask a dataset agent to prove attributes.
    RequestProof {
        #[command(flatten)]
        admin: AdminArgs,
        #[arg(long)]
        target: Did,
        #[arg(long, value_delimiter = ',', required = true)]
        attrs: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Revoke an issued credential (publisher).
    Revoke {
        #[command(flatten)]
        admin: AdminArgs,
        #[arg(long, conflicts_with = "status_id")]
        credential_id: Option<String>,
        #[arg(long)]
        status_id: Option<String>,
    },
}

/// Operational failure: exit 2.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn fail<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(msg.into()))
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_env("DATACRED_LOG").unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    run(cli)
}

pub fn run(cli: Cli) -> ExitCode {
    let rt = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match rt.block_on(dispatch(cli.command)) {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

async fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Keygen { wallet, seed } => keygen(&wallet, seed.as_deref()),
        Command::Did(cmd) => did(cmd).await,
        Command::Hash { path } => {
            let fp = fingerprint_path(&path)?;
            print_json(&fp);
            Ok(ExitCode::SUCCESS)
        }
        Command::Challenge => {
            println!("{}", new_challenge());
            Ok(ExitCode::SUCCESS)
        }
        Command::Issue {
            wallet,
            issuer,
            subject,
            schema,
            claims,
            data,
            expires,
            registry_url,
            status_id,
            verification_method,
            out,
        } => {
            let key = wallet_key(&wallet)?;
            let schema = load_schema(&schema)?;
            let mut claims = parse_claims(&claims)?;
            if let Some(data) = data {
                claims.insert(crate::vc::HASH_OF_DATA.into(), fingerprint_path(&data)?.digest);
            }
            schema.normalize_claims(&mut claims);
            let options = IssueOptions {
                expiration_date: expires,
                status: registry_url.zip(status_id).map(|(u, s)| CredentialStatus::new(u, s)),
                verification_method,
                ..Default::default()
            };
            let vc = issue_credential(&key, &issuer, &subject, &schema, claims, options)?;
            emit(&vc, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { credential, data, offline_bundle, at, clock_skew, json, net } => {
            verify(credential, data, offline_bundle, at, clock_skew, json, net).await
        }
        Command::Present { wallet, holder, credentials, challenge, out } => {
            let key = wallet_key(&wallet)?;
            let holder = holder.unwrap_or_else(|| did_key_for(&key.public_key()));
            let vcs = credentials
                .iter()
                .map(|p| read_as::<VerifiableCredential>(p))
                .collect::<Result<Vec<_>, _>>()?;
            let vp = create_presentation(&key, &holder, &vcs, &challenge)?;
            emit(&vp, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyPresentation { presentation, challenge, offline_bundle, at, json, net } => {
            let raw = read_json(&presentation)?;
            let resolver = resolver_for(offline_bundle.as_deref(), &net)?;
            let report =
                verify_presentation_value(&raw, &challenge, &resolver, at.unwrap_or_else(Timestamp::now)).await;
            if json {
                print_json(&report);
            } else {
                print_presentation_report(&report);
            }
            Ok(exit_for(report.verdict))
        }
        Command::Revoke { registry, status_id, wallet, issuer } => revoke(&registry, &status_id, &wallet, issuer),
        Command::Bundle { credential, out, issuer_doc, did_docs, registry, net } => {
            make_bundle(&credential, &out, issuer_doc.as_deref(), &did_docs, registry.as_deref(), &net).await
        }
        Command::Agent(cmd) => agent_command(cmd).await,
    }
}

// ---- helpers ----

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

/// Write JSON to `out`, or stdout.
fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut bytes = serde_json::to_vec_pretty(value).expect("output serializes");
            bytes.push(b'\n');
            write_atomic(path, &bytes)?;
            Ok(())
        }
        None => {
            print_json(value);
            Ok(())
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    parse_strict(&bytes).map_err(|e| {
        Failure(format!("{}: malformed JSON at line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })
}

fn read_as<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_value(read_json(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn passphrase() -> Result<String, Failure> {
    std::env::var(PASSPHRASE_ENV).map_err(|_| Failure(format!("set {PASSPHRASE_ENV} to the wallet passphrase")))
}

fn wallet_key(args: &WalletArgs) -> Result<KeyPair, Failure> {
    let wallet = Wallet::open(&args.wallet, &passphrase()?)?;
    Ok(wallet.get_keypair(&args.label)?.clone())
}

fn parse_claims(raw: &[String]) -> Result<BTreeMap<String, String>, Failure> {
    let mut claims = BTreeMap::new();
    for c in raw {
        let (k, v) = c.split_once('=').ok_or_else(|| Failure(format!("claim {c:?} is not NAME=VALUE")))?;
        if claims.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return fail(format!("claim {k:?} given twice"));
        }
    }
    Ok(claims)
}

fn load_schema(name: &str) -> Result<CredentialSchema, Failure> {
    if name == DATASET_PROVENANCE_V1 {
        return Ok(CredentialSchema::dataset_provenance_v1());
    }
    let schema: CredentialSchema = read_as(Path::new(name))?;
    schema.validate().map_err(Failure)?;
    Ok(schema)
}

fn resolver_for(bundle_dir: Option<&Path>, net: &NetArgs) -> Result<Resolver, Failure> {
    match bundle_dir {
        Some(dir) => Ok(bundle::offline_resolver(dir)?),
        None => Ok(Resolver::standard(net.insecure_loopback)),
    }
}

fn exit_for(verdict: Verdict) -> ExitCode {
    match verdict {
        Verdict::Valid => ExitCode::SUCCESS,
        Verdict::Invalid | Verdict::Indeterminate => ExitCode::from(1),
    }
}

fn check_line(c: &Check) -> String {
    let mark = match &c.status {
        CheckStatus::Pass => "ok  ",
        CheckStatus::Fail { .. } => "FAIL",
        CheckStatus::Indeterminate { .. } => "??  ",
        CheckStatus::NotApplicable => "n/a ",
    };
    format!("  {mark} {:<14} {}", c.check, c.status)
}

fn print_credential_report(r: &VerificationReport) {
    println!("credential {}: {}", r.credential_id.as_deref().unwrap_or("<unreadable>"), r.verdict);
    if let Some(i) = &r.issuer {
        println!("  issuer  {i}");
    }
    if let Some(s) = &r.subject {
        println!("  subject {s}");
    }
    for c in &r.checks {
        println!("{}", check_line(c));
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn print_presentation_report(r: &PresentationReport) {
    println!(
        "presentation by {}: {}",
        r.holder.as_ref().map(Did::text).unwrap_or_else(|| "<unreadable>".into()),
        r.verdict
    );
    for c in &r.checks {
        println!("{}", check_line(c));
    }
    for cr in &r.credentials {
        print_credential_report(cr);
    }
}

// ---- commands ----

fn keygen(args: &WalletArgs, seed: Option<&str>) -> Outcome {
    let mut wallet = Wallet::open(&args.wallet, &passphrase()?)?;
    if wallet.get(&args.label).is_ok() {
        return fail(format!("label {:?} already exists in {}", args.label, args.wallet.display()));
    }
    let kp = match seed {
        Some(hex_seed) => KeyPair::generate(Some(&hex::decode(hex_seed)?))?,
        None => KeyPair::random(),
    };
    let public = kp.public_key();
    wallet.put_keypair(args.label.clone(), kp);
    wallet.save()?;
    print_json(&json!({
        "label": args.label,
        "publicKeyBase58": public.to_base58(),
        "didKey": did_key_for(&public),
    }));
    Ok(ExitCode::SUCCESS)
}

async fn did(cmd: DidCommand) -> Outcome {
    match cmd {
        DidCommand::CreateWeb { domain, path, wallet, service } => {
            let key = wallet_key(&wallet)?;
            let segments: Vec<&str> = path.iter().map(String::as_str).collect();
            let did = did_web_for(&domain, &segments)?;
            let mut doc = DidDocument::new_ed25519(&did, &key.public_key());
            if let Some(s) = service {
                doc = doc.with_service(s);
            }
            eprintln!("host this at {}", crate::did::web::did_web_url(&did)?);
            print_json(&doc);
            Ok(ExitCode::SUCCESS)
        }
        DidCommand::Key { wallet } => {
            let key = wallet_key(&wallet)?;
            print_json(&generate_did_key(&key.public_key()).1);
            Ok(ExitCode::SUCCESS)
        }
        DidCommand::Resolve { did, net } => {
            let doc = Resolver::standard(net.insecure_loopback).resolve(&did).await?;
            print_json(&doc);
            Ok(ExitCode::SUCCESS)
        }
    }
}

async fn verify(
    credential: Option<PathBuf>,
    data: Option<PathBuf>,
    offline_bundle: Option<PathBuf>,
    at: Option<Timestamp>,
    clock_skew: i64,
    json_out: bool,
    net: NetArgs,
) -> Outcome {
    let path = match (&credential, &offline_bundle) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => dir.join(bundle::CREDENTIAL_FILE),
        (None, None) => return fail("give a credential file or --offline-bundle"),
    };
    let raw = read_json(&path)?;
    let resolver = resolver_for(offline_bundle.as_deref(), &net)?;
    let options = VerifyOptions { clock_skew_secs: clock_skew };
    let report = crate::vc::verify_credential_value(&raw, &resolver, at.unwrap_or_else(Timestamp::now), options).await;

    let binding: Option<BindingReport> = match &data {
        Some(data) => {
            let vc: VerifiableCredential =
                serde_json::from_value(raw.clone()).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            Some(check_binding_claim(&vc, DataSource::Path(data))?)
        }
        None => None,
    };
    let bound = binding.as_ref().map_or(true, |b| b.matches);
    if json_out {
        let mut out = json!({ "credential": report });
        if let Some(b) = &binding {
            out["binding"] = serde_json::to_value(b).expect("binding serializes");
        }
        if offline_bundle.is_some() {
            out["networkFetches"] = resolver.network_fetch_count().into();
        }
        out["verdict"] = json!(if bound { report.verdict } else { Verdict::Invalid });
        print_json(&out);
    } else {
        print_credential_report(&report);
        if let Some(b) = &binding {
            println!("  {} {:<14} {b}", if b.matches { "ok  " } else { "FAIL" }, "binding");
        }
        if offline_bundle.is_some() {
            println!(
                "  offline: {} lookups, {} network",
                resolver.fetch_count(),
                resolver.network_fetch_count()
            );
        }
    }
    Ok(if bound { exit_for(report.verdict) } else { ExitCode::from(1) })
}

fn revoke(path: &Path, status_id: &str, wallet: &WalletArgs, issuer: Option<Did>) -> Outcome {
    let key = wallet_key(wallet)?;
    let registry = if path.exists() {
        let reg: RevocationRegistry = read_as(path)?;
        if let Some(i) = &issuer {
            if i != &reg.issuer {
                return fail(format!("registry belongs to {}, not {i}", reg.issuer));
            }
        }
        reg
    } else {
        let issuer = issuer.ok_or_else(|| Failure("--issuer is needed to create a new registry".into()))?;
        RevocationRegistry::new(&issuer, &key, None)?
    };
    let next = registry.revoke(status_id, &key)?;
    emit(&next, Some(path))?;
    eprintln!("{} ids revoked in {}", next.revoked.len(), path.display());
    Ok(ExitCode::SUCCESS)
}

async fn make_bundle(
    credential: &Path,
    out: &Path,
    issuer_doc: Option<&Path>,
    did_docs: &[PathBuf],
    registry: Option<&Path>,
    net: &NetArgs,
) -> Outcome {
    let vc: VerifiableCredential = read_as(credential)?;
    let resolver = Resolver::standard(net.insecure_loopback);
    let issuer_document = match issuer_doc {
        Some(p) => read_as::<DidDocument>(p)?,
        None => resolver.resolve(&vc.issuer).await?,
    };
    let extra = did_docs.iter().map(|p| read_as::<DidDocument>(p)).collect::<Result<Vec<_>, _>>()?;
    let registry: Option<RevocationRegistry> = match (registry, &vc.credential_status) {
        (Some(p), _) => Some(read_as(p)?),
        (None, Some(status)) => Some(serde_json::from_value(resolver.fetch_json(&status.id).await?)?),
        (None, None) => None,
    };
    bundle::write_bundle(out, &vc, &issuer_document, &extra, registry.as_ref())?;
    let check = Bundle::load(out)?.verify(Timestamp::now(), VerifyOptions::default()).await;
    eprintln!("wrote {} ({})", out.display(), check.verdict);
    Ok(ExitCode::SUCCESS)
}

fn admin_client(args: &AdminArgs) -> Result<AdminClient, Failure> {
    match (&args.admin, &args.config) {
        (Some(url), _) => Ok(AdminClient::new(url.clone())),
        (None, Some(path)) => {
            let config = AgentConfig::load(path)?;
            Ok(AdminClient::new(format!("http://{}", config.listen)))
        }
        (None, None) => fail("give --admin URL or --config FILE"),
    }
}

async fn agent_command(cmd: AgentCommand) -> Outcome {
    match cmd {
        AgentCommand::Serve { config } => {
            let config = AgentConfig::load(&config)?;
            let running = agent::provision(config).await?;
            eprintln!("{} agent {} listening on {}", running.role(), running.did(), running.local_addr());
            running
                .serve_until(async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await?;
            Ok(ExitCode::SUCCESS)
        }
        AgentCommand::Status { admin } => {
            print_json(&admin_client(&admin)?.status().await?);
            Ok(ExitCode::SUCCESS)
        }
        AgentCommand::Connections { admin } => {
            print_json(&admin_client(&admin)?.connections().await?);
            Ok(ExitCode::SUCCESS)
        }
        AgentCommand::Credentials { admin } => {
            print_json(&admin_client(&admin)?.credentials().await?);
            Ok(ExitCode::SUCCESS)
        }
        AgentCommand::Connect { admin, did, endpoint } => {
            print_json(&admin_client(&admin)?.connect(&Invitation { did, endpoint }).await?);
            Ok(ExitCode::SUCCESS)
        }
        AgentCommand::Issue { admin, subject, claims, expires } => {
            let request = IssueRequest {
                subject: Some(subject),
                claims: parse_claims(&claims)?,
                expiration_date: expires,
                ..Default::default()
            };
            print_json(&admin_client(&admin)?.issue(&request).await?);
            Ok(ExitCode::SUCCESS)
        }
        AgentCommand::RequestProof { admin, target, attrs, json } => {
            let report = admin_client(&admin)?.request_proof(&target, &attrs).await?;
            if json {
                print_json(&report);
            } else {
                print_presentation_report(&report);
            }
            Ok(exit_for(report.verdict))
        }
        AgentCommand::Revoke { admin, credential_id, status_id } => {
            print_json(&admin_client(&admin)?.revoke(&RevokeRequest { credential_id, status_id }).await?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
