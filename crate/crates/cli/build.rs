//! Hashes the library and CLI sources into `PERFECTST_CODE_DIGEST`, which
//! every manifest records.

use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

fn collect(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = fs::read_dir(dir) else { return };
    for entry in entries.flatten() {
        let path = entry.path();
        if path.is_dir() {
            collect(&path, out);
        } else if path.extension().is_some_and(|e| e == "rs" || e == "toml") {
            out.push(path);
        }
    }
}

fn main() {
    let root = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let dirs = [root.join("src"), root.join("../core/src")];
    let mut files = vec![root.join("Cargo.toml"), root.join("../core/Cargo.toml")];
    for d in &dirs {
        collect(d, &mut files);
        println!("cargo:rerun-if-changed={}", d.display());
    }
    files.sort();
    let mut hasher = Sha256::new();
    for f in &files {
        println!("cargo:rerun-if-changed={}", f.display());
        let rel = f.strip_prefix(&root).unwrap_or(f);
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update(fs::read(f).unwrap_or_default());
    }
    println!("cargo:rustc-env=PERFECTST_CODE_DIGEST={}", hex::encode(hasher.finalize()));
}
