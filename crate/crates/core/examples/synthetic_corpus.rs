//! Write a seeded synthetic training corpus plus its target manifest.
//!
//! Usage: cargo run --example synthetic_corpus -- [out_dir] [count] [seed]

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;

use autocash::data::CsvOptions;
use autocash::synthetic;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/corpus"));
    let count: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2024);

    std::fs::create_dir_all(&out)?;
    let mut manifest = BTreeMap::new();
    for d in synthetic::corpus(count, seed) {
        let file = format!("{}.csv", d.name());
        d.write_csv(File::create(out.join(&file))?, &CsvOptions::default())?;
        println!("{file:<14} {:>4} rows  {} attributes  {} classes", d.n_rows(), d.attributes().len() - 1, d.n_classes());
        manifest.insert(file, d.target().name.clone());
    }
    std::fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    println!("wrote {} datasets to {}", manifest.len(), out.display());
    Ok(())
}
