//! Tune one algorithm on one dataset with the genetic optimiser and print
//! the per-generation history.
//!
//! Usage: cargo run --release --example tune_hyperparameters -- [algorithm] [csv]

use std::path::PathBuf;

use autocash::data::{load_csv, CsvOptions, TargetColumn};
use autocash::ga::{optimize, GaParams};
use autocash::pipeline::prepare;
use autocash::portfolio::{AlgorithmId, Portfolio};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let id: AlgorithmId = args.next().as_deref().unwrap_or("decision-tree").parse()?;
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/small/wine.csv"));

    let d = prepare(&load_csv(&path, &TargetColumn::Last, &CsvOptions::default())?, 0)?;
    let portfolio = Portfolio::standard();
    let result = optimize(portfolio.get(id)?, &d, &GaParams { seed: 11, ..GaParams::default() })?;

    println!("{id} on {}", d.name());
    for g in &result.history {
        println!("gen {:>2}  best {:.4}  mean {:.4}  failures {}", g.generation, g.best, g.mean, g.failures);
    }
    println!(
        "default {:.4} -> tuned {:.4} ({} evaluations)",
        result.default_outcome.f_score, result.outcome.f_score, result.evaluations
    );
    println!("{}", serde_json::to_string_pretty(&result.config)?);
    Ok(())
}
