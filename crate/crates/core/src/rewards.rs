//! Meta-dataset construction (dataset -> best algorithm) and estimation of
//! the per-meta-feature rewards that drive the selection agent.
//!
//! The reward of a meta-feature is the mean cross-validated accuracy of the
//! meta-learner over many random feature batches that contain it.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::meta_learner::{cross_validated_accuracy, MetaForestParams};
use crate::metafeatures::{compute_all, MetaFeatureVector, N_META_FEATURES};
use crate::metrics::evaluate;
use crate::portfolio::{AlgorithmId, Portfolio};
use crate::seeds::derive_seed;

/// Default-configuration scores of every algorithm on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labelling {
    pub dataset: String,
    pub label: AlgorithmId,
    /// Composite score per algorithm; `None` when evaluation failed.
    pub scores: BTreeMap<AlgorithmId, Option<f64>>,
}

/// Evaluate every portfolio algorithm at its default configuration and
/// label each dataset with the best one (earlier portfolio entry on ties).
/// All algorithms share one evaluation split per dataset.
pub fn label_optimal(datasets: &[Dataset], portfolio: &Portfolio, seed: u64) -> Result<Vec<Labelling>> {
    if datasets.is_empty() {
        return Err(Error::InvalidArgument("no datasets to label".into()));
    }
    datasets
        .iter()
        .map(|d| {
            let split_seed = derive_seed(seed, d.name());
            let scores: Vec<(AlgorithmId, Option<f64>)> = portfolio
                .algorithms()
                .par_iter()
                .map(|spec| (spec.id, evaluate(spec, &spec.default_config, d, split_seed).ok().map(|o| o.f_score)))
                .collect();
            let mut best: Option<(AlgorithmId, f64)> = None;
            for &(id, score) in &scores {
                if let Some(s) = score {
                    if best.is_none_or(|(_, b)| s > b) {
                        best = Some((id, s));
                    }
                }
            }
            let (label, _) = best.ok_or_else(|| {
                Error::stage(
                    "label",
                    Some(d.name()),
                    Error::Training {
                        algorithm: "every algorithm".into(),
                        message: "all evaluations failed".into(),
                    },
                )
            })?;
            Ok(Labelling {
                dataset: d.name().to_owned(),
                label,
                scores: scores.into_iter().collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRow {
    pub dataset: String,
    pub features: MetaFeatureVector,
    pub label: AlgorithmId,
}

impl MetaRow {
    pub fn new(dataset: impl Into<String>, features: MetaFeatureVector, label: AlgorithmId) -> Self {
        MetaRow {
            dataset: dataset.into(),
            features,
            label,
        }
    }
}

/// One row per training dataset: its full meta-feature vector and the best
/// algorithm found for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDataset {
    rows: Vec<MetaRow>,
}

impl MetaDataset {
    /// Rejects duplicate dataset names.
    pub fn new(rows: Vec<MetaRow>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for r in &rows {
            if !seen.insert(r.dataset.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate dataset name `{}`", r.dataset)));
            }
        }
        Ok(MetaDataset { rows })
    }

    pub fn rows(&self) -> &[MetaRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn labels(&self) -> BTreeSet<AlgorithmId> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Pair each dataset's meta-features with its label.
pub fn build_meta_dataset(datasets: &[Dataset], labels: &[Labelling]) -> Result<MetaDataset> {
    let by_name: BTreeMap<&str, AlgorithmId> = labels.iter().map(|l| (l.dataset.as_str(), l.label)).collect();
    let rows = datasets
        .iter()
        .map(|d| {
            let label = by_name
                .get(d.name())
                .ok_or_else(|| Error::InvalidArgument(format!("no label for dataset `{}`", d.name())))?;
            Ok(MetaRow::new(d.name(), compute_all(d), *label))
        })
        .collect::<Result<Vec<_>>>()?;
    MetaDataset::new(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RewardTable {
    rewards: Vec<f64>,
}

impl RewardTable {
    pub fn new(rewards: Vec<f64>) -> Result<Self> {
        if rewards.len() != N_META_FEATURES {
            return Err(Error::InvalidArgument(format!(
                "reward table needs {N_META_FEATURES} entries, got {}",
                rewards.len()
            )));
        }
        if rewards.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::InvalidArgument("rewards must lie in [0, 1]".into()));
        }
        Ok(RewardTable { rewards })
    }

    pub fn get(&self, feature: usize) -> f64 {
        self.rewards[feature]
    }

    pub fn values(&self) -> &[f64] {
        &self.rewards
    }
}

impl<'de> Deserialize<'de> for RewardTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        RewardTable::new(Vec::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardParams {
    pub batch_sizes: RangeInclusive<usize>,
    pub repeats: usize,
    pub folds: usize,
    pub forest: MetaForestParams,
    pub seed: u64,
}

impl Default for RewardParams {
    fn default() -> Self {
        RewardParams {
            batch_sizes: 2..=8,
            repeats: 5,
            folds: 5,
            forest: MetaForestParams::default(),
            seed: 0,
        }
    }
}

/// One forest evaluation on a random feature batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardTrial {
    pub feature: usize,
    pub batch_size: usize,
    /// Sorted catalogue indices of the batch, including `feature`.
    pub subset: Vec<usize>,
    pub accuracy: f64,
}

/// Every (feature, batch size, repeat) evaluation behind the reward table.
pub fn reward_trials(md: &MetaDataset, params: &RewardParams) -> Result<Vec<RewardTrial>> {
    if md.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "reward estimation needs at least 5 meta-dataset rows, got {}",
            md.len()
        )));
    }
    if params.repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    let (lo, hi) = (*params.batch_sizes.start(), *params.batch_sizes.end());
    if lo == 0 || hi > N_META_FEATURES || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "batch sizes {lo}..={hi} must lie within 1..={N_META_FEATURES}"
        )));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..N_META_FEATURES)
        .flat_map(|f| params.batch_sizes.clone().flat_map(move |s| (0..params.repeats).map(move |t| (f, s, t))))
        .collect();
    jobs.into_par_iter()
        .map(|(feature, batch_size, trial)| {
            let tag = format!("reward/{feature}/{batch_size}/{trial}");
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &tag));
            let mut others: Vec<usize> = (0..N_META_FEATURES).filter(|&i| i != feature).collect();
            others.shuffle(&mut rng);
            let mut subset: Vec<usize> = others[..batch_size - 1].to_vec();
            subset.push(feature);
            subset.sort_unstable();
            let forest = MetaForestParams {
                seed: derive_seed(params.seed, &format!("{tag}/forest")),
                ..params.forest
            };
            let accuracy = cross_validated_accuracy(md, &subset, params.folds, &forest)?;
            Ok(RewardTrial {
                feature,
                batch_size,
                subset,
                accuracy,
            })
        })
        .collect()
}

/// Mean trial accuracy per meta-feature.
pub fn estimate_rewards(md: &MetaDataset, params: &RewardParams) -> Result<RewardTable> {
    Ok(table_from_trials(&reward_trials(md, params)?))
}

pub fn table_from_trials(trials: &[RewardTrial]) -> RewardTable {
    let mut sum = [0.0; N_META_FEATURES];
    let mut count = [0usize; N_META_FEATURES];
    for t in trials {
        sum[t.feature] += t.accuracy;
        count[t.feature] += 1;
    }
    RewardTable {
        rewards: sum
            .iter()
            .zip(&count)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect(),
    }
}
