//! Decide which random-forest hyperparameters are worth tuning on the
//! bundled small datasets.

use std::path::Path;

use autocash::data::CsvOptions;
use autocash::ga::{screen_hyperparameters, GaParams};
use autocash::pipeline::{load_corpus, prepare};
use autocash::portfolio::{AlgorithmId, Portfolio};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/small");
    let datasets = load_corpus(&dir, &CsvOptions::default())?
        .iter()
        .map(|d| prepare(d, 0))
        .collect::<Result<Vec<_>, _>>()?;
    let portfolio = Portfolio::standard();
    let params = GaParams { population: 10, generations: 10, seed: 3, ..GaParams::default() };
    for id in [AlgorithmId::KNearestNeighbors, AlgorithmId::DecisionTree] {
        let report = screen_hyperparameters(portfolio.get(id)?, &datasets, 0.02, &params)?;
        println!("{id}");
        for p in &report.improvements {
            println!("  {:<12} mean gain {:+.4}  tunable: {}", p.name, p.improvement, p.tunable);
        }
    }
    Ok(())
}
