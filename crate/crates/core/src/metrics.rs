//! Accuracy, rank-based AUC, multi-class binarisation and the composite
//! score `accuracy * AUC` used as fitness throughout the engine.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::portfolio::{fit, AlgorithmSpec, Config};
use crate::seeds::derive_seed;

/// Fraction of training rows in the evaluation split.
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationOutcome {
    pub accuracy: f64,
    pub auc: f64,
    pub f_score: f64,
}

impl EvaluationOutcome {
    pub fn new(accuracy: f64, auc: f64) -> Result<Self> {
        Ok(EvaluationOutcome {
            accuracy,
            auc,
            f_score: f_score(accuracy, auc)?,
        })
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument(format!("length mismatch: {a} vs {b}")));
    }
    Ok(())
}

pub fn accuracy<T: PartialEq>(truth: &[T], predicted: &[T]) -> Result<f64> {
    check_lengths(truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty sample".into()));
    }
    let hits = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Mann-Whitney AUC: P(positive scores above negative) + P(tie) / 2.
/// `true` marks the positive class.
pub fn auc_binary(labels: &[bool], scores: &[f64]) -> Result<f64> {
    check_lengths(labels.len(), scores.len())?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::AucUndefined);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // sum of positive midranks (1-based)
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += midrank * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Per-row correctness labels: `false` (0) when the prediction is right,
/// `true` (1) when it is wrong.
pub fn binarize_multiclass<T: PartialEq>(truth: &[T], predicted: &[T]) -> Result<Vec<bool>> {
    check_lengths(truth.len(), predicted.len())?;
    Ok(truth.iter().zip(predicted).map(|(t, p)| t != p).collect())
}

pub fn f_score(accuracy: f64, auc: f64) -> Result<f64> {
    for (name, v) in [("accuracy", accuracy), ("auc", auc)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok(accuracy * auc)
}

/// AUC that falls back to 0.5 when only one class is present.
fn auc_or_half(labels: &[bool], scores: &[f64]) -> Result<f64> {
    match auc_binary(labels, scores) {
        Err(Error::AucUndefined) => Ok(0.5),
        other => other,
    }
}

/// Score `config` on a stratified 80/20 split of `d` drawn with `seed`.
///
/// Binary targets rank test rows by the probability of class 1. Larger
/// vocabularies are reduced to right/wrong labels ranked by
/// `1 - p(predicted class)`, with "wrong" as the positive class.
pub fn evaluate(spec: &AlgorithmSpec, config: &Config, d: &Dataset, seed: u64) -> Result<EvaluationOutcome> {
    let (train, test) = d.split_stratified(TRAIN_FRACTION, seed)?;
    if test.n_rows() == 0 {
        return Err(Error::InvalidDataset(format!("`{}` leaves an empty test split", d.name())));
    }
    let model = fit(spec, config, &train, derive_seed(seed, "fit"))?;
    let predictions = model.predict_dataset(&test)?;
    let truth = test.labels();
    let acc = accuracy(&truth, &predictions.labels)?;
    let auc = if d.n_classes() == 2 {
        let labels: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        let scores: Vec<f64> = predictions.probabilities.iter().map(|p| p[1]).collect();
        auc_or_half(&labels, &scores)?
    } else {
        let wrong = binarize_multiclass(&truth, &predictions.labels)?;
        let scores: Vec<f64> = predictions
            .probabilities
            .iter()
            .zip(&predictions.labels)
            .map(|(p, &l)| 1.0 - p[l])
            .collect();
        auc_or_half(&wrong, &scores)?
    };
    EvaluationOutcome::new(acc, auc.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert!((accuracy(&["a", "b", "a"], &["a", "b", "b"]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(accuracy(&[1, 2], &[1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert!(accuracy::<u8>(&[], &[]).is_err());
        assert!(accuracy(&[1], &[1, 2]).is_err());
    }

    /// Count over all positive/negative pairs.
    fn pairwise_auc(labels: &[bool], scores: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    pairs += 1.0;
                    total += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        total / pairs
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_binary(&[true, true, false, false], &[0.9, 0.8, 0.2, 0.1]).unwrap(), 1.0);
        assert_eq!(auc_binary(&[true, false], &[0.3, 0.3]).unwrap(), 0.5);
        let labels = [true, false, true, false];
        let scores = [0.8, 0.7, 0.6, 0.5];
        assert_eq!(pairwise_auc(&labels, &scores), 0.75);
        assert_eq!(auc_binary(&labels, &scores).unwrap(), 0.75);
        assert!(matches!(auc_binary(&[true, true], &[0.1, 0.2]), Err(Error::AucUndefined)));
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_multiclass(&["a", "b"], &["a", "b"]).unwrap(), [false, false]);
        assert_eq!(binarize_multiclass(&["a", "b"], &["b", "a"]).unwrap(), [true, true]);
        assert_eq!(binarize_multiclass(&["a", "b", "c"], &["a", "c", "c"]).unwrap(), [false, true, false]);
        assert!(binarize_multiclass(&["a"], &[]).is_err());
    }

    #[test]
    fn f_score_examples() {
        assert!((f_score(0.99, 0.5).unwrap() - 0.495).abs() < 1e-15);
        assert_eq!(f_score(1.0, 0.37).unwrap(), 0.37);
        assert_eq!(f_score(0.0, 0.8).unwrap(), 0.0);
        assert!(f_score(1.2, 0.5).is_err());
        assert!(f_score(0.5, -0.1).is_err());
    }

    proptest::proptest! {
        #[test]
        fn auc_matches_pairwise_and_is_rank_invariant(
            data in proptest::collection::vec((proptest::bool::ANY, 0u8..20), 2..60)
        ) {
            let labels: Vec<bool> = data.iter().map(|d| d.0).collect();
            let scores: Vec<f64> = data.iter().map(|d| d.1 as f64 / 19.0).collect();
            match auc_binary(&labels, &scores) {
                Ok(auc) => {
                    proptest::prop_assert!((auc - pairwise_auc(&labels, &scores)).abs() < 1e-12);
                    let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
                    proptest::prop_assert!((auc - auc_binary(&labels, &warped).unwrap()).abs() < 1e-12);
                }
                Err(Error::AucUndefined) => {
                    proptest::prop_assert!(labels.iter().all(|&l| l) || labels.iter().all(|&l| !l));
                }
                Err(e) => proptest::prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn f_score_bounded_by_factors(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let f = f_score(a, b).unwrap();
            proptest::prop_assert_eq!(f, a * b);
            proptest::prop_assert!(f <= a.min(b));
        }
    }
}
