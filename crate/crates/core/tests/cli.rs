mod common;

use std::path::Path;
use std::process::{Child, Command, Output, Stdio};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use common::*;
use datacred::fingerprint::fingerprint_bytes;
use datacred::vc::VerifiableCredential;
use datacred::vp::VerifiablePresentation;

fn datacred(dir: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_datacred"));
    c.current_dir(dir).env("DATACRED_PASSPHRASE", PASS).env_remove("DATACRED_LOG");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    datacred(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Fresh wallet key; returns its did:key.
fn keygen(dir: &Path, wallet: &str, label: &str) -> String {
    let o = run(dir, &["keygen", "--wallet", wallet, "--label", label]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    v["didKey"].as_str().unwrap().to_string()
}

fn issue(dir: &Path, issuer: &str, subject: &str, out: &str, extra: &[&str]) {
    let mut args = vec![
        "issue", "--wallet", "w.json", "--label", "uni", "--issuer", issuer, "--subject", subject,
        "--claim", "Data Ethically Sourced=YES", "--data", "data.csv", "-o", out,
    ];
    args.extend_from_slice(extra);
    let o = run(dir, &args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn setup() -> (tempfile::TempDir, String, String) {
    let tmp = tempfile::tempdir().unwrap();
    let issuer = keygen(tmp.path(), "w.json", "uni");
    let holder = keygen(tmp.path(), "w.json", "dataset");
    std::fs::write(tmp.path().join("data.csv"), "id,label\n1,cat\n2,dog\n").unwrap();
    (tmp, issuer, holder)
}

#[test]
fn hash_of_empty_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("empty"), b"").unwrap();
    let o = run(tmp.path(), &["hash", "empty"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"));
}

#[test]
fn keygen_with_seed_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let seed = "9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60";
    let a = run(tmp.path(), &["keygen", "--wallet", "a.json", "--seed", seed]);
    let b = run(tmp.path(), &["keygen", "--wallet", "b.json", "--seed", seed]);
    assert_eq!(stdout(&a), stdout(&b));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    let pk = bs58::decode(v["publicKeyBase58"].as_str().unwrap()).into_vec().unwrap();
    assert_eq!(hex::encode(pk), "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
}

#[test]
fn wrong_passphrase_is_a_failure() {
    let (tmp, ..) = setup();
    let o = datacred(tmp.path())
        .env("DATACRED_PASSPHRASE", "nope")
        .args(["did", "key", "--wallet", "w.json", "--label", "uni"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn issue_then_verify_with_data() {
    let (tmp, issuer, holder) = setup();
    let dir = tmp.path();
    issue(dir, &issuer, &holder, "vc.json", &[]);

    let vc: VerifiableCredential =
        serde_json::from_slice(&std::fs::read(dir.join("vc.json")).unwrap()).unwrap();
    let expected = fingerprint_bytes(&std::fs::read(dir.join("data.csv")).unwrap()).digest;
    assert_eq!(vc.claim("Hash of Data"), Some(expected.as_str()));
    assert_eq!(vc.issuer.text(), issuer);

    let o = run(dir, &["verify", "vc.json", "--data", "data.csv"]);
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("hash match"));

    std::fs::write(dir.join("data.csv"), "id,label\n1,cat\n2,cow\n").unwrap();
    let o = run(dir, &["verify", "vc.json", "--data", "data.csv"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("hash mismatch"), "{}", stdout(&o));

    let o = run(dir, &["verify", "vc.json", "--data", "data.csv", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["binding"]["matches"], false);
    assert_eq!(v["credential"]["verdict"], "Valid");
    assert_eq!(v["verdict"], "Invalid");
}

#[test]
fn tampered_credential_exits_one() {
    let (tmp, issuer, holder) = setup();
    let dir = tmp.path();
    issue(dir, &issuer, &holder, "vc.json", &[]);
    let mut v: Value = serde_json::from_slice(&std::fs::read(dir.join("vc.json")).unwrap()).unwrap();
    v["credentialSubject"]["Data Ethically Sourced"] = json!("NO");
    std::fs::write(dir.join("forged.json"), v.to_string()).unwrap();
    let o = run(dir, &["verify", "forged.json", "--json"]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sig = report["credential"]["checks"].as_array().unwrap().iter().find(|c| c["check"] == "signature").unwrap();
    assert_eq!(sig["reason"], "SignatureInvalid");
}

#[test]
fn expired_credential() {
    let (tmp, issuer, holder) = setup();
    let dir = tmp.path();
    issue(dir, &issuer, &holder, "vc.json", &["--expires", "2031-01-01T00:00:00Z"]);
    assert_eq!(code(&run(dir, &["verify", "vc.json", "--at", "2030-12-31T23:59:59Z"])), 0);
    let o = run(dir, &["verify", "vc.json", "--at", "2031-01-01T00:00:00Z"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("Expired"), "{}", stdout(&o));
    assert_eq!(code(&run(dir, &["verify", "vc.json", "--at", "2031-01-01T00:00:30Z", "--clock-skew", "60"])), 0);
}

#[test]
fn malformed_json_reports_position() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.json"), "{\n  \"id\": \"x\",\n  oops\n}").unwrap();
    let o = run(tmp.path(), &["verify", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3, column"), "{}", stderr(&o));

    std::fs::write(tmp.path().join("dup.json"), r#"{"id":"a","id":"b"}"#).unwrap();
    let o = run(tmp.path(), &["verify", "dup.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("duplicate"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_failure() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(tmp.path(), &["verify", "nothing.json"])), 2);
    assert_eq!(code(&run(tmp.path(), &["hash", "nothing"])), 2);
}

#[test]
fn present_and_verify_presentation() {
    let (tmp, issuer, holder) = setup();
    let dir = tmp.path();
    issue(dir, &issuer, &holder, "vc.json", &[]);
    let challenge = stdout(&run(dir, &["challenge"])).trim().to_string();
    assert_eq!(challenge.len(), 32);
    assert!(challenge.chars().all(|c| c.is_ascii_hexdigit()));

    let o = run(dir, &["present", "--wallet", "w.json", "--label", "dataset", "--credential", "vc.json", "--challenge", &challenge, "-o", "vp.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let vp: VerifiablePresentation = serde_json::from_slice(&std::fs::read(dir.join("vp.json")).unwrap()).unwrap();
    assert_eq!(vp.holder.text(), holder);
    assert_eq!(vp.challenge(), Some(challenge.as_str()));

    let o = run(dir, &["verify-presentation", "vp.json", "--challenge", &challenge, "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "Valid");

    let other = stdout(&run(dir, &["challenge"])).trim().to_string();
    let o = run(dir, &["verify-presentation", "vp.json", "--challenge", &other]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("ChallengeMismatch"), "{}", stdout(&o));

    // The issuer's key presenting a credential about someone else.
    let o = run(dir, &["present", "--wallet", "w.json", "--label", "uni", "--credential", "vc.json", "--challenge", &other, "-o", "stolen.json"]);
    assert_eq!(code(&o), 0);
    let o = run(dir, &["verify-presentation", "stolen.json", "--challenge", &other]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("HolderNotSubject"), "{}", stdout(&o));
}

#[test]
fn revoke_and_bundle() {
    let (tmp, issuer, holder) = setup();
    let dir = tmp.path();
    issue(dir, &issuer, &holder, "vc.json", &["--registry-url", "https://uni.example/registry.json", "--status-id", "s1"]);
    let o = run(dir, &["revoke", "--registry", "registry.json", "--status-id", "other", "--wallet", "w.json", "--label", "uni", "--issuer", &issuer]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = run(dir, &["bundle", "--credential", "vc.json", "--registry", "registry.json", "-o", "b1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(dir, &["verify", "--offline-bundle", "b1", "--data", "data.csv", "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["networkFetches"], 0);
    assert_eq!(v["verdict"], "Valid");

    let o = run(dir, &["revoke", "--registry", "registry.json", "--status-id", "s1", "--wallet", "w.json", "--label", "uni"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let registry: Value = serde_json::from_slice(&std::fs::read(dir.join("registry.json")).unwrap()).unwrap();
    assert!(registry.to_string().contains("\"s1\""));

    assert_eq!(code(&run(dir, &["bundle", "--credential", "vc.json", "--registry", "registry.json", "-o", "b2"])), 0);
    let o = run(dir, &["verify", "--offline-bundle", "b2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("Revoked"), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 network"), "{}", stdout(&o));

    // Registry signed by someone else.
    keygen(dir, "w.json", "mallory");
    let o = run(dir, &["revoke", "--registry", "fake.json", "--status-id", "x", "--wallet", "w.json", "--label", "mallory", "--issuer", &issuer]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(dir, &["bundle", "--credential", "vc.json", "--registry", "fake.json", "-o", "b3"])), 0);
    let o = run(dir, &["verify", "--offline-bundle", "b3"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("Indeterminate"), "{}", stdout(&o));
}

#[test]
fn did_create_web_and_key() {
    let (tmp, issuer, _) = setup();
    let dir = tmp.path();
    let o = run(dir, &["did", "create-web", "--domain", "uniofscience.com", "--wallet", "w.json", "--label", "uni"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["id"], "did:web:uniofscience.com");
    assert_eq!(doc["authentication"][0]["type"], "Ed25519VerificationKey2018");
    assert!(stderr(&o).contains("https://uniofscience.com/.well-known/did.json"));

    let o = run(dir, &["did", "key", "--wallet", "w.json", "--label", "uni"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["id"], issuer);

    let o = run(dir, &["did", "resolve", &issuer]);
    assert_eq!(code(&o), 0);
    let resolved: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(resolved["id"], issuer);
}

struct Serving(Child);

impl Drop for Serving {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

fn write_config(dir: &Path, name: &str, role: &str, port: u16) -> String {
    let config = json!({
        "role": role,
        "wallet": { "path": format!("{name}.wallet"), "passphraseEnv": "DATACRED_PASSPHRASE", "kdf": fast_kdf() },
        "listen": format!("127.0.0.1:{port}"),
        "resolver": { "allowInsecureLoopback": true }
    });
    let file = format!("{name}.config.json");
    std::fs::write(dir.join(&file), serde_json::to_vec_pretty(&config).unwrap()).unwrap();
    file
}

fn serve(dir: &Path, config: &str) -> Serving {
    let child = datacred(dir).args(["agent", "serve", "--config", config]).stdout(Stdio::null()).stderr(Stdio::null()).spawn().unwrap();
    let started = Instant::now();
    while run(dir, &["agent", "status", "--config", config]).status.code() != Some(0) {
        assert!(started.elapsed() < Duration::from_secs(10), "agent did not come up");
        std::thread::sleep(Duration::from_millis(50));
    }
    Serving(child)
}

fn admin_json(dir: &Path, args: &[&str]) -> Value {
    let o = run(dir, args);
    assert_eq!(code(&o), 0, "{:?}: {}{}", args, stdout(&o), stderr(&o));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn agents_driven_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let names = [("publisher", "publisher"), ("dataset", "dataset"), ("user", "user")];
    let configs: Vec<String> = names.iter().map(|(n, r)| write_config(dir, n, r, free_port())).collect();
    let _servers: Vec<Serving> = configs.iter().map(|c| serve(dir, c)).collect();
    let [p, d, u] = [&configs[0], &configs[1], &configs[2]];

    let publisher = admin_json(dir, &["agent", "status", "--config", p]);
    let dataset = admin_json(dir, &["agent", "status", "--config", d]);
    assert_eq!(dataset["role"], "dataset");
    let (dataset_did, dataset_inbox) = (dataset["did"].as_str().unwrap(), dataset["endpoint"].as_str().unwrap());

    let conn = admin_json(dir, &["agent", "connect", "--config", p, "--did", dataset_did, "--endpoint", dataset_inbox]);
    assert_eq!(conn["state"], "active");
    let digest = fingerprint_bytes(b"cli-driven dataset").digest;
    let vc = admin_json(dir, &[
        "agent", "issue", "--config", p, "--subject", dataset_did,
        "--claim", &format!("Hash of Data={digest}"), "--claim", "Data Ethically Sourced=YES",
    ]);
    assert_eq!(vc["issuer"], publisher["did"]);
    let held = admin_json(dir, &["agent", "credentials", "--config", d]);
    assert_eq!(held.as_array().unwrap().len(), 1);

    admin_json(dir, &["agent", "connect", "--config", u, "--did", dataset_did, "--endpoint", dataset_inbox]);
    let report = admin_json(dir, &[
        "agent", "request-proof", "--config", u, "--target", dataset_did,
        "--attrs", "Hash of Data,Data Ethically Sourced", "--json",
    ]);
    assert_eq!(report["verdict"], "Valid");
    assert_eq!(report["issuers"][0], publisher["did"]);

    admin_json(dir, &["agent", "revoke", "--config", p, "--credential-id", vc["id"].as_str().unwrap()]);
    let o = run(dir, &["agent", "request-proof", "--config", u, "--target", dataset_did, "--attrs", "Hash of Data"]);
    assert_eq!(code(&o), 1, "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("Revoked"), "{}", stdout(&o));

    let conns = admin_json(dir, &["agent", "connections", "--config", d]);
    assert_eq!(conns.as_array().unwrap().len(), 2);
}
