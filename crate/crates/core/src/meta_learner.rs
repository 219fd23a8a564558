//! Random-forest meta-learner mapping projected meta-feature vectors to the
//! recommended algorithm.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metafeatures::{MetaFeatureList, MetaFeatureVector};
use crate::portfolio::tree::{argmax, FeatureKind, Forest, ForestParams, TrainingSet};
use crate::portfolio::AlgorithmId;
use crate::rewards::MetaDataset;
use crate::seeds::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetaForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for MetaForestParams {
    fn default() -> Self {
        MetaForestParams {
            trees: 100,
            max_depth: 12,
            seed: 0,
        }
    }
}

impl MetaForestParams {
    fn forest(&self) -> ForestParams {
        ForestParams {
            trees: self.trees,
            max_depth: self.max_depth,
            min_split: 2,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaForest {
    forest: Forest,
    /// Class index to algorithm, in portfolio order.
    labels: Vec<AlgorithmId>,
    features: MetaFeatureList,
}

fn label_map(md: &MetaDataset) -> Vec<AlgorithmId> {
    let mut labels: Vec<AlgorithmId> = md.rows().iter().map(|r| r.label).collect();
    labels.sort();
    labels.dedup();
    labels
}

fn matrix(md: &MetaDataset, rows: &[usize], indices: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|&r| indices.iter().map(|&i| md.rows()[r].features.get(i)).collect())
        .collect()
}

fn fit_forest(md: &MetaDataset, rows: &[usize], indices: &[usize], labels: &[AlgorithmId], params: &MetaForestParams) -> Forest {
    let x = matrix(md, rows, indices);
    let y: Vec<usize> = rows
        .iter()
        .map(|&r| labels.binary_search(&md.rows()[r].label).expect("label in map"))
        .collect();
    let kinds = vec![FeatureKind::Numeric; indices.len()];
    Forest::fit(
        TrainingSet {
            x: &x,
            y: &y,
            kinds: &kinds,
            n_classes: labels.len(),
        },
        &params.forest(),
    )
}

/// Train on every row of `md`, projected onto `features`.
pub fn train_rf(md: &MetaDataset, features: &MetaFeatureList, params: &MetaForestParams) -> Result<MetaForest> {
    if md.is_empty() {
        return Err(Error::InvalidArgument("empty meta-dataset".into()));
    }
    if params.trees == 0 {
        return Err(Error::InvalidArgument("a forest needs at least one tree".into()));
    }
    let labels = label_map(md);
    let rows: Vec<usize> = (0..md.len()).collect();
    Ok(MetaForest {
        forest: fit_forest(md, &rows, features.indices(), &labels, params),
        labels,
        features: features.clone(),
    })
}

impl MetaForest {
    pub fn features(&self) -> &MetaFeatureList {
        &self.features
    }

    pub fn labels(&self) -> &[AlgorithmId] {
        &self.labels
    }

    pub fn n_trees(&self) -> usize {
        self.forest.trees().len()
    }

    /// Averaged leaf distributions over the trained labels.
    pub fn predict_proba(&self, projected: &[f64]) -> Result<Vec<f64>> {
        if projected.len() != self.features.len() {
            return Err(Error::SchemaMismatch(format!(
                "expected {} meta-features, got {}",
                self.features.len(),
                projected.len()
            )));
        }
        Ok(self.forest.predict_proba(projected))
    }

    /// Most probable algorithm; ties go to the earlier portfolio entry.
    pub fn predict(&self, projected: &[f64]) -> Result<AlgorithmId> {
        Ok(self.labels[argmax(&self.predict_proba(projected)?)])
    }

    pub fn predict_vector(&self, v: &MetaFeatureVector) -> Result<AlgorithmId> {
        self.predict(&v.project(&self.features))
    }
}

/// Shuffled k-fold partition of `0..n`; `min(k, n)` folds of near-equal size.
pub fn folds(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = k.clamp(1, n.max(1));
    let mut out = vec![Vec::new(); k];
    for (i, row) in order.into_iter().enumerate() {
        out[i % k].push(row);
    }
    out
}

/// k-fold accuracy of the meta-learner restricted to catalogue `indices`.
pub fn cross_validated_accuracy(md: &MetaDataset, indices: &[usize], k: usize, params: &MetaForestParams) -> Result<f64> {
    if md.len() < 2 {
        return Err(Error::InvalidArgument("cross-validation needs at least two rows".into()));
    }
    if indices.is_empty() {
        return Err(Error::InvalidArgument("no meta-features selected".into()));
    }
    let labels = label_map(md);
    let mut hits = 0usize;
    for (f, held_out) in folds(md.len(), k, derive_seed(params.seed, "folds")).iter().enumerate() {
        let train: Vec<usize> = (0..md.len()).filter(|r| !held_out.contains(r)).collect();
        let fold_params = MetaForestParams {
            seed: derive_seed(params.seed, &format!("fold/{f}")),
            ..*params
        };
        let forest = fit_forest(md, &train, indices, &labels, &fold_params);
        for (row, x) in held_out.iter().zip(matrix(md, held_out, indices)) {
            if labels[argmax(&forest.predict_proba(&x))] == md.rows()[*row].label {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / md.len() as f64)
}
