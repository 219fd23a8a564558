//! Score every portfolio algorithm at its default configuration on the
//! bundled small datasets and show which one each dataset would be labelled with.

use std::path::Path;

use autocash::data::CsvOptions;
use autocash::pipeline::{load_corpus, prepare};
use autocash::portfolio::Portfolio;
use autocash::rewards::label_optimal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/small");
    let portfolio = Portfolio::standard();
    let datasets = load_corpus(&dir, &CsvOptions::default())?
        .iter()
        .map(|d| prepare(d, 1))
        .collect::<Result<Vec<_>, _>>()?;

    print!("{:<15}", "dataset");
    for id in portfolio.ids() {
        print!("{:>22}", id.as_str());
    }
    println!("   label");
    for l in label_optimal(&datasets, &portfolio, 1)? {
        print!("{:<15}", l.dataset);
        for id in portfolio.ids() {
            match l.scores[&id] {
                Some(s) => print!("{s:>22.4}"),
                None => print!("{:>22}", "failed"),
            }
        }
        println!("   {}", l.label);
    }
    Ok(())
}
