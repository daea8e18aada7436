//! Host a did:web document on a loopback server and resolve it.

use axum::routing::get;
use axum::Router;
use datacred::did::web::{did_web_for, did_web_url};
use datacred::{DidDocument, KeyPair, Resolver};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    let did = did_web_for(&addr.to_string(), &[])?;
    let key = KeyPair::random();
    let doc = DidDocument::new_ed25519(&did, &key.public_key());
    let body = serde_json::to_string(&doc)?;
    let app = Router::new().route("/.well-known/did.json", get(move || async move { body }));
    tokio::spawn(async move { axum::serve(listener, app).await });

    println!("{did} -> {}", did_web_url(&did)?);
    let resolver = Resolver::standard(true);
    let resolved = resolver.resolve(&did).await?;
    println!("{}", serde_json::to_string_pretty(&resolved)?);

    // Second lookup comes from the cache.
    resolver.resolve(&did).await?;
    println!("network fetches: {}", resolver.network_fetch_count());
    Ok(())
}
