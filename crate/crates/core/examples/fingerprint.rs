//! Fingerprint a file or directory and check it again after a change.
//!
//! cargo run --example fingerprint -- [path]

use std::path::PathBuf;

use datacred::fingerprint::{check_binding, fingerprint_path, DataSource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let root = tmp.path().join("faces");
            std::fs::create_dir_all(root.join("train"))?;
            std::fs::write(root.join("train/0001.txt"), "smiling")?;
            std::fs::write(root.join("labels.csv"), "id,label\n0001,smiling\n")?;
            root
        }
    };

    let fp = fingerprint_path(&path)?;
    println!("{} ({:?}): {}", path.display(), fp.form, fp.digest);
    if let Some(manifest) = &fp.manifest {
        for entry in manifest {
            println!("  {}  {}", entry.digest, entry.path);
        }
    }
    println!("unchanged: {}", check_binding(&fp, DataSource::Path(&path))?);

    if path.starts_with(tmp.path()) {
        std::fs::write(path.join("labels.csv"), "id,label\n0001,frowning\n")?;
        println!("after edit: {}", check_binding(&fp, DataSource::Path(&path))?);
    }
    Ok(())
}
