//! End-to-end training (label, meta-dataset, rewards, feature selection,
//! meta-learner), the persisted model artifact, and recommendation for a
//! new dataset.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{load_csv, CsvOptions, Dataset, TargetColumn};
use crate::dqn::{train_dqn_with, CrossValidatedForest, DqnParams};
use crate::error::{Error, Result};
use crate::ga::{optimize, GaParams, HpoResult};
use crate::meta_learner::{train_rf, MetaForest, MetaForestParams};
use crate::metafeatures::{compute_all, MetaFeatureList, MetaFeatureVector};
use crate::portfolio::{AlgorithmId, Portfolio};
use crate::rewards::{build_meta_dataset, estimate_rewards, label_optimal, Labelling, MetaDataset, RewardParams, RewardTable};
use crate::seeds::derive_seed;

pub const ARTIFACT_VERSION: u64 = 1;
pub const MANIFEST: &str = "manifest.json";

/// Manifest entry: a header name or a 0-based column index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ManifestTarget {
    Index(usize),
    Name(String),
}

impl From<&ManifestTarget> for TargetColumn {
    fn from(t: &ManifestTarget) -> Self {
        match t {
            ManifestTarget::Index(i) => TargetColumn::Index(*i),
            ManifestTarget::Name(n) => TargetColumn::Name(n.clone()),
        }
    }
}

/// Read every `*.csv` in `dir` (sorted by file name). Targets come from
/// `manifest.json` (file name -> column) when present, else the last column.
pub fn load_corpus(dir: &Path, options: &CsvOptions) -> Result<Vec<Dataset>> {
    let manifest_path = dir.join(MANIFEST);
    let manifest: BTreeMap<String, ManifestTarget> = if manifest_path.exists() {
        let text = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::stage("load", Some(MANIFEST), e.into()))?
    } else {
        BTreeMap::new()
    };
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if let Some(missing) = manifest.keys().find(|k| !files.iter().any(|f| f.file_name().is_some_and(|n| n == k.as_str()))) {
        return Err(Error::stage(
            "load",
            Some(missing),
            Error::FileNotFound(dir.join(missing)),
        ));
    }
    files
        .iter()
        .map(|path| {
            let file = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let target = manifest.get(&file).map(TargetColumn::from).unwrap_or(TargetColumn::Last);
            load_csv(path, &target, options).map_err(|e| Error::stage("load", Some(&file), e))
        })
        .collect()
}

/// Fill missing cells with the dataset's seeded imputation stream.
pub fn prepare(d: &Dataset, seed: u64) -> Result<Dataset> {
    if !d.has_missing() {
        return Ok(d.clone());
    }
    d.impute_missing(derive_seed(seed, &format!("impute/{}", d.name())))
        .map_err(|e| Error::stage("impute", Some(d.name()), e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainParams {
    pub seed: u64,
    pub reward_repeats: usize,
    pub dqn: DqnParams,
    pub forest: MetaForestParams,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            seed: 0,
            reward_repeats: RewardParams::default().repeats,
            dqn: DqnParams::default(),
            forest: MetaForestParams::default(),
        }
    }
}

/// Per-stage seeds, all derived from one root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub root: u64,
    pub impute: u64,
    pub label: u64,
    pub rewards: u64,
    pub dqn: u64,
    pub forest: u64,
}

impl StageSeeds {
    pub fn from_root(root: u64) -> Self {
        StageSeeds {
            root,
            impute: derive_seed(root, "impute"),
            label: derive_seed(root, "label"),
            rewards: derive_seed(root, "rewards"),
            dqn: derive_seed(root, "dqn"),
            forest: derive_seed(root, "forest"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seeds: StageSeeds,
    pub datasets: Vec<String>,
    pub labels: BTreeMap<String, AlgorithmId>,
    pub reward_repeats: usize,
    pub rewards: RewardTable,
    pub dqn_episodes: usize,
    pub n_max: usize,
    pub forest_trees: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub version: u64,
    pub m_list: MetaFeatureList,
    pub forest: MetaForest,
    pub fingerprint: String,
    pub provenance: Provenance,
}

/// Body of the artifact file; the version lives in the envelope.
#[derive(Serialize, Deserialize)]
struct Body {
    m_list: MetaFeatureList,
    forest: MetaForest,
    fingerprint: String,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    version: u64,
    body: serde_json::Value,
    crc32: u32,
}

fn canonical(body: &serde_json::Value) -> Result<String> {
    // serde_json maps keep keys sorted, so this text is canonical
    Ok(serde_json::to_string(body)?)
}

impl ModelArtifact {
    pub fn to_json(&self) -> Result<String> {
        let body = serde_json::to_value(Body {
            m_list: self.m_list.clone(),
            forest: self.forest.clone(),
            fingerprint: self.fingerprint.clone(),
            provenance: self.provenance.clone(),
        })?;
        let crc32 = crc32fast::hash(canonical(&body)?.as_bytes());
        let mut text = serde_json::to_string(&Envelope {
            version: self.version,
            body,
            crc32,
        })?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<ModelArtifact> {
        let envelope: Envelope =
            serde_json::from_str(text).map_err(|e| Error::Checksum(format!("unreadable artifact: {e}")))?;
        if envelope.version != ARTIFACT_VERSION {
            return Err(Error::UnsupportedVersion(envelope.version));
        }
        let actual = crc32fast::hash(canonical(&envelope.body)?.as_bytes());
        if actual != envelope.crc32 {
            return Err(Error::Checksum(format!(
                "stored crc32 {} but body hashes to {actual}",
                envelope.crc32
            )));
        }
        let body: Body = serde_json::from_value(envelope.body)?;
        Ok(ModelArtifact {
            version: envelope.version,
            m_list: body.m_list,
            forest: body.forest,
            fingerprint: body.fingerprint,
            provenance: body.provenance,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ModelArtifact> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ModelArtifact::from_json(&text)
    }
}

/// Intermediate results of a full training run, for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub artifact: ModelArtifact,
    pub labels: Vec<Labelling>,
    pub meta: MetaDataset,
    pub rewards: RewardTable,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        staged @ Error::Stage { .. } => staged,
        other => Error::stage(name, None::<&str>, other),
    })
}

/// Impute, label with the best default-configured algorithm, and pair
/// labels with meta-features.
pub fn meta_stage(datasets: &[Dataset], portfolio: &Portfolio, seeds: &StageSeeds) -> Result<(Vec<Labelling>, MetaDataset)> {
    let prepared = datasets
        .iter()
        .map(|d| prepare(d, seeds.impute))
        .collect::<Result<Vec<_>>>()?;
    let labels = stage("label", label_optimal(&prepared, portfolio, seeds.label))?;
    let meta = stage("meta-dataset", build_meta_dataset(&prepared, &labels))?;
    Ok((labels, meta))
}

pub fn reward_stage(meta: &MetaDataset, repeats: usize, forest: &MetaForestParams, seeds: &StageSeeds) -> Result<RewardTable> {
    let params = RewardParams {
        repeats,
        forest: *forest,
        seed: seeds.rewards,
        ..RewardParams::default()
    };
    stage("rewards", estimate_rewards(meta, &params))
}

/// Run the selector with candidate lists scored by 5-fold meta-learner accuracy.
pub fn selection_stage(
    rewards: &RewardTable,
    meta: &MetaDataset,
    dqn: &DqnParams,
    forest: &MetaForestParams,
    seeds: &StageSeeds,
) -> Result<MetaFeatureList> {
    let scorer = CrossValidatedForest {
        md: meta,
        folds: RewardParams::default().folds,
        forest: MetaForestParams {
            seed: derive_seed(seeds.dqn, "score"),
            ..*forest
        },
    };
    let params = DqnParams { seed: seeds.dqn, ..*dqn };
    Ok(stage("select-features", train_dqn_with(rewards, &scorer, &params))?.selected)
}

/// Train on already loaded datasets.
pub fn train_on(datasets: &[Dataset], portfolio: &Portfolio, params: &TrainParams) -> Result<Training> {
    if datasets.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "training needs at least 5 datasets, got {}",
            datasets.len()
        )));
    }
    let seeds = StageSeeds::from_root(params.seed);
    let (labels, meta) = meta_stage(datasets, portfolio, &seeds)?;
    let rewards = reward_stage(&meta, params.reward_repeats, &params.forest, &seeds)?;
    let m_list = selection_stage(&rewards, &meta, &params.dqn, &params.forest, &seeds)?;
    let forest_params = MetaForestParams {
        seed: seeds.forest,
        ..params.forest
    };
    let forest = stage("meta-learner", train_rf(&meta, &m_list, &forest_params))?;
    let provenance = Provenance {
        seeds,
        datasets: datasets.iter().map(|d| d.name().to_owned()).collect(),
        labels: labels.iter().map(|l| (l.dataset.clone(), l.label)).collect(),
        reward_repeats: params.reward_repeats,
        rewards: rewards.clone(),
        dqn_episodes: params.dqn.episodes,
        n_max: params.dqn.n_max,
        forest_trees: forest_params.trees,
    };
    Ok(Training {
        artifact: ModelArtifact {
            version: ARTIFACT_VERSION,
            m_list,
            forest,
            fingerprint: portfolio.fingerprint(),
            provenance,
        },
        labels,
        meta,
        rewards,
    })
}

pub fn train_pipeline(data_dir: &Path, options: &CsvOptions, portfolio: &Portfolio, params: &TrainParams) -> Result<ModelArtifact> {
    let datasets = load_corpus(data_dir, options)?;
    Ok(train_on(&datasets, portfolio, params)?.artifact)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub dataset: String,
    pub algorithm: AlgorithmId,
    pub meta_features: MetaFeatureVector,
    pub tuning: HpoResult,
}

/// Pick an algorithm for `d` with the artifact's meta-learner and tune it.
pub fn recommend(artifact: &ModelArtifact, d: &Dataset, ga: &GaParams, portfolio: &Portfolio) -> Result<Recommendation> {
    let live = portfolio.fingerprint();
    if artifact.fingerprint != live {
        return Err(Error::FingerprintMismatch {
            artifact: artifact.fingerprint.clone(),
            live,
        });
    }
    let prepared = prepare(d, ga.seed)?;
    let meta_features = compute_all(&prepared);
    let algorithm = artifact.forest.predict_vector(&meta_features)?;
    let spec = portfolio.get(algorithm)?;
    let tuning = optimize(spec, &prepared, ga).map_err(|e| Error::stage("tune", Some(d.name()), e))?;
    Ok(Recommendation {
        dataset: d.name().to_owned(),
        algorithm,
        meta_features,
        tuning,
    })
}
