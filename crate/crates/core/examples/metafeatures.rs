//! Print the meta-feature catalogue of a CSV file.
//!
//! Usage: cargo run --example metafeatures -- [csv] [target]

use std::path::PathBuf;

use autocash::data::{load_csv, CsvOptions, TargetColumn};
use autocash::metafeatures::{compute_all, meta_feature_type, META_FEATURE_NAMES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/small/weather.csv"));
    let target = args.next().as_deref().map(TargetColumn::from).unwrap_or(TargetColumn::Last);

    let d = load_csv(&path, &target, &CsvOptions::default())?;
    println!("{}: {} rows, target `{}`", d.name(), d.n_rows(), d.target().name);
    for (i, v) in compute_all(&d).values().iter().enumerate() {
        println!("mf{i:<3} {:<36} {:<12} {v:.6}", META_FEATURE_NAMES[i], format!("{:?}", meta_feature_type(i)));
    }
    Ok(())
}
