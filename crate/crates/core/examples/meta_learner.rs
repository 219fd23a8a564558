//! Fit the random-forest meta-learner on a small hand-built meta-dataset
//! and query it.

use autocash::meta_learner::{cross_validated_accuracy, train_rf, MetaForestParams};
use autocash::metafeatures::{MetaFeatureList, MetaFeatureVector, N_META_FEATURES};
use autocash::portfolio::AlgorithmId;
use autocash::rewards::{MetaDataset, MetaRow};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // meta-feature 3 alone decides the label
    let rows = (0..60)
        .map(|i| {
            let mut v = [0.0; N_META_FEATURES];
            v[3] = i as f64;
            v[5] = (i * 13 % 7) as f64;
            let label = match i {
                0..=19 => AlgorithmId::KNearestNeighbors,
                20..=39 => AlgorithmId::GaussianNaiveBayes,
                _ => AlgorithmId::RandomForest,
            };
            MetaRow::new(format!("d{i}"), MetaFeatureVector::new(v), label)
        })
        .collect();
    let md = MetaDataset::new(rows)?;
    let params = MetaForestParams { seed: 1, ..MetaForestParams::default() };
    println!("5-fold accuracy on [3, 5]: {:.3}", cross_validated_accuracy(&md, &[3, 5], 5, &params)?);
    println!("5-fold accuracy on [5]:    {:.3}", cross_validated_accuracy(&md, &[5], 5, &params)?);

    let forest = train_rf(&md, &MetaFeatureList::new(vec![3, 5])?, &params)?;
    for x in [4.0, 31.0, 58.0] {
        println!("mf3 = {x:>4} -> {}", forest.predict(&[x, 0.0])?);
    }
    Ok(())
}
