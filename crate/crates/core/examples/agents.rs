//! Publisher, dataset and user agents on loopback: connect, issue,
//! request a proof, then revoke and ask again.

use datacred::agent::{provision, AgentConfig, IssueRequest, RevokeRequest, Role};
use datacred::fingerprint::fingerprint_bytes;
use datacred::vc::{DATA_ETHICALLY_SOURCED, HASH_OF_DATA};
use datacred::wallet::{KdfAlgorithm, KdfParams};

fn config(dir: &std::path::Path, name: &str, role: Role) -> AgentConfig {
    let mut c = AgentConfig::new(role, dir.join(format!("{name}.wallet")), "127.0.0.1:0".parse().unwrap());
    c.wallet.passphrase = Some(format!("{name} passphrase"));
    c.wallet.kdf = Some(KdfParams { algorithm: KdfAlgorithm::Argon2id, memory_kib: 8192, iterations: 1, parallelism: 1 });
    // Everything runs over plain HTTP on 127.0.0.1.
    c.resolver.allow_insecure_loopback = true;
    c
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let publisher = provision(config(tmp.path(), "publisher", Role::Publisher)).await?;
    let dataset = provision(config(tmp.path(), "dataset", Role::Dataset)).await?;
    let user = provision(config(tmp.path(), "user", Role::User)).await?;
    for a in [&publisher, &dataset, &user] {
        println!("{:<9} {} at {}", a.role().to_string(), a.did(), a.inbox());
    }

    let conn = publisher.connect(&dataset.invitation()).await?;
    let claims = [
        (HASH_OF_DATA.to_string(), fingerprint_bytes(b"survey responses").digest),
        (DATA_ETHICALLY_SOURCED.to_string(), "YES".to_string()),
    ]
    .into();
    let vc = publisher.issue(IssueRequest { connection_id: Some(conn.connection_id), claims, ..Default::default() }).await?;
    println!("issued {}", vc.id);

    user.connect(&dataset.invitation()).await?;
    let attrs = vec![HASH_OF_DATA.to_string(), DATA_ETHICALLY_SOURCED.to_string()];
    let outcome = user.request_proof(dataset.did(), &attrs).await?;
    println!("proof: {} (issuer {})", outcome.report.verdict, outcome.issuer);

    publisher.revoke(&RevokeRequest { credential_id: Some(vc.id), status_id: None }).await?;
    match user.request_proof(dataset.did(), &attrs).await {
        Ok(o) => println!("after revocation: {}", o.report.verdict),
        Err(e) => println!("after revocation: {e}"),
    }

    for a in [publisher, dataset, user] {
        a.shutdown().await;
    }
    Ok(())
}
