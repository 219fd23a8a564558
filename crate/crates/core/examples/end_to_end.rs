//! Train the full model on the bundled synthetic corpus, save it, reload it
//! and recommend a tuned algorithm for iris.
//!
//! Usage: cargo run --release --example end_to_end -- [seed]

use std::path::Path;
use std::time::Instant;

use autocash::data::{load_csv, CsvOptions, TargetColumn};
use autocash::ga::GaParams;
use autocash::pipeline::{recommend, train_pipeline, ModelArtifact, TrainParams};
use autocash::portfolio::Portfolio;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let portfolio = Portfolio::standard();
    let options = CsvOptions::default();

    let start = Instant::now();
    let params = TrainParams { seed, ..TrainParams::default() };
    let artifact = train_pipeline(&root.join("corpus"), &options, &portfolio, &params)?;
    println!("trained in {:.1?}", start.elapsed());
    println!("selected meta-features: {:?}", artifact.m_list.indices());
    for (dataset, label) in &artifact.provenance.labels {
        println!("  {dataset:<10} -> {label}");
    }

    let path = std::env::temp_dir().join("autocash-end-to-end.json");
    artifact.save(&path)?;
    let artifact = ModelArtifact::load(&path)?;

    let iris = load_csv(root.join("small/iris.csv"), &TargetColumn::Last, &options)?;
    let ga = GaParams { seed, ..GaParams::default() };
    let rec = recommend(&artifact, &iris, &ga, &portfolio)?;
    println!("recommended {} for {}", rec.algorithm, rec.dataset);
    println!(
        "default f_score {:.4}  tuned f_score {:.4}  after {} generations",
        rec.tuning.default_outcome.f_score, rec.tuning.outcome.f_score, rec.tuning.generations
    );
    println!("config: {}", serde_json::to_string(&rec.tuning.config)?);
    println!("total {:.1?}", start.elapsed());
    Ok(())
}
