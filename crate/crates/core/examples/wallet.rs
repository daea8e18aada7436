//! Keep signing keys in an encrypted wallet file.

use datacred::wallet::{KdfParams, Wallet};
use datacred::KeyPair;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let path = tmp.path().join("uni.wallet");
    let passphrase = "correct horse battery staple";

    let mut wallet = Wallet::open_with(&path, passphrase, KdfParams::default())?;
    let key = KeyPair::random();
    wallet.put_keypair("signing", key.clone());
    wallet.save()?;

    let text = std::fs::read_to_string(&path)?;
    println!("{} bytes on disk, key material hidden: {}", text.len(), !text.contains(&hex::encode(key.seed())));

    let reopened = Wallet::open(&path, passphrase)?;
    let restored = reopened.get_keypair("signing")?;
    println!("same public key after reopening: {}", restored.public_key() == key.public_key());

    match Wallet::open(&path, "wrong") {
        Err(e) => println!("wrong passphrase: {e}"),
        Ok(_) => println!("wrong passphrase accepted?"),
    }
    Ok(())
}
