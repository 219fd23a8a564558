//! The candidate algorithm set: six native classifiers, each with a
//! declared hyperparameter space and default configuration.

pub mod features;
pub mod knn;
pub mod logistic;
pub mod naive_bayes;
pub mod space;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::Dataset;
use crate::error::{Error, Result};
use features::{Scaler, Schema};
use knn::{Knn, Weighting};
use logistic::Logistic;
use naive_bayes::GaussianNb;
pub use space::{Config, Domain, HyperparamSpec, ParamValue};
use tree::{argmax, Forest, ForestParams, TrainingSet, Tree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    MajorityBaseline,
    KNearestNeighbors,
    DecisionTree,
    RandomForest,
    GaussianNaiveBayes,
    LogisticRegression,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 6] = [
        AlgorithmId::MajorityBaseline,
        AlgorithmId::KNearestNeighbors,
        AlgorithmId::DecisionTree,
        AlgorithmId::RandomForest,
        AlgorithmId::GaussianNaiveBayes,
        AlgorithmId::LogisticRegression,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::MajorityBaseline => "majority-baseline",
            AlgorithmId::KNearestNeighbors => "k-nearest-neighbors",
            AlgorithmId::DecisionTree => "decision-tree",
            AlgorithmId::RandomForest => "random-forest",
            AlgorithmId::GaussianNaiveBayes => "gaussian-naive-bayes",
            AlgorithmId::LogisticRegression => "logistic-regression",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSpec {
    pub id: AlgorithmId,
    pub hyperparameters: Vec<HyperparamSpec>,
    pub default_config: Config,
}

impl AlgorithmSpec {
    fn new(id: AlgorithmId, params: Vec<(HyperparamSpec, ParamValue)>) -> Self {
        let default_config = params.iter().map(|(h, v)| (h.name.clone(), v.clone())).collect();
        AlgorithmSpec {
            id,
            hyperparameters: params.into_iter().map(|(h, _)| h).collect(),
            default_config,
        }
    }

    pub fn tunable(&self) -> impl Iterator<Item = &HyperparamSpec> {
        self.hyperparameters.iter().filter(|h| h.tunable)
    }

    pub fn hyperparameter(&self, name: &str) -> Option<&HyperparamSpec> {
        self.hyperparameters.iter().find(|h| h.name == name)
    }

    /// Every declared parameter must be present and inside its domain;
    /// unknown names are rejected.
    pub fn check_config(&self, config: &Config) -> Result<()> {
        let err = |message: String| Error::Config {
            algorithm: self.id.to_string(),
            message,
        };
        for h in &self.hyperparameters {
            let value = config.get(&h.name).ok_or_else(|| err(format!("missing `{}`", h.name)))?;
            if !h.domain.contains(value) {
                return Err(err(format!("`{}` = {value} is outside its domain", h.name)));
            }
        }
        if let Some(extra) = config.keys().find(|k| self.hyperparameter(k).is_none()) {
            return Err(err(format!("unknown hyperparameter `{extra}`")));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for h in &self.hyperparameters {
            h.validate()?;
        }
        self.check_config(&self.default_config)
    }
}

/// An ordered set of algorithms with unique ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    algorithms: Vec<AlgorithmSpec>,
}

impl Default for Portfolio {
    fn default() -> Self {
        Portfolio::standard()
    }
}

impl Portfolio {
    pub fn standard() -> Portfolio {
        use AlgorithmId::*;
        let int = ParamValue::Int;
        Portfolio {
            algorithms: vec![
                AlgorithmSpec::new(MajorityBaseline, vec![]),
                AlgorithmSpec::new(
                    KNearestNeighbors,
                    vec![
                        (HyperparamSpec::integer("k", 1, 32), int(5)),
                        (
                            HyperparamSpec::categorical("weighting", &["uniform", "inverse-distance"]),
                            ParamValue::Text("uniform".into()),
                        ),
                    ],
                ),
                AlgorithmSpec::new(
                    DecisionTree,
                    vec![
                        (HyperparamSpec::integer("max_depth", 1, 32), int(10)),
                        (HyperparamSpec::integer("min_split", 2, 32), int(2)),
                    ],
                ),
                AlgorithmSpec::new(
                    RandomForest,
                    vec![
                        (HyperparamSpec::integer("trees", 10, 200), int(50)),
                        (HyperparamSpec::integer("max_depth", 1, 32), int(12)),
                    ],
                ),
                AlgorithmSpec::new(
                    GaussianNaiveBayes,
                    vec![(HyperparamSpec::integer("var_smoothing_exp", -12, -3), int(-9))],
                ),
                AlgorithmSpec::new(
                    LogisticRegression,
                    vec![(HyperparamSpec::log2_grid("l2", -10, 4), ParamValue::Real(2f64.powi(-4)))],
                ),
            ],
        }
    }

    pub fn new(algorithms: Vec<AlgorithmSpec>) -> Result<Portfolio> {
        for (i, a) in algorithms.iter().enumerate() {
            if algorithms[..i].iter().any(|b| b.id == a.id) {
                return Err(Error::InvalidArgument(format!("duplicate algorithm `{}`", a.id)));
            }
            a.validate()?;
        }
        if algorithms.is_empty() {
            return Err(Error::InvalidArgument("empty portfolio".into()));
        }
        Ok(Portfolio { algorithms })
    }

    /// Only the listed algorithms, in standard order.
    pub fn subset(ids: &[AlgorithmId]) -> Result<Portfolio> {
        Portfolio::new(
            Portfolio::standard()
                .algorithms
                .into_iter()
                .filter(|a| ids.contains(&a.id))
                .collect(),
        )
    }

    pub fn algorithms(&self) -> &[AlgorithmSpec] {
        &self.algorithms
    }

    pub fn ids(&self) -> Vec<AlgorithmId> {
        self.algorithms.iter().map(|a| a.id).collect()
    }

    pub fn get(&self, id: AlgorithmId) -> Result<&AlgorithmSpec> {
        self.algorithms
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("`{id}` is not in the portfolio")))
    }

    pub fn replace(&mut self, spec: AlgorithmSpec) -> Result<()> {
        spec.validate()?;
        let slot = self
            .algorithms
            .iter_mut()
            .find(|a| a.id == spec.id)
            .ok_or_else(|| Error::InvalidArgument(format!("`{}` is not in the portfolio", spec.id)))?;
        *slot = spec;
        Ok(())
    }

    /// SHA-256 over the canonical JSON of every spec (ids, domains,
    /// defaults, tunable flags), hex encoded.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_value(self).expect("portfolio serialises").to_string();
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Look up a hyperparameter that `check_config` has already validated.
fn int_param(config: &Config, name: &str) -> i64 {
    match config.get(name) {
        Some(ParamValue::Int(v)) => *v,
        other => unreachable!("validated config has {name} = {other:?}"),
    }
}

fn real_param(config: &Config, name: &str) -> f64 {
    match config.get(name) {
        Some(ParamValue::Real(v)) => *v,
        other => unreachable!("validated config has {name} = {other:?}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Constant(Vec<f64>),
    Knn { scaler: Scaler, knn: Knn },
    Tree(Tree),
    Forest(Forest),
    NaiveBayes(GaussianNb),
    Logistic { scaler: Scaler, model: Logistic },
}

/// A trained classifier. Immutable; safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    algorithm: AlgorithmId,
    schema: Schema,
    n_classes: usize,
    model: Model,
}

/// Predicted labels with one probability vector per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub labels: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

/// Train `spec.id` with `config` on `train`. Deterministic in `seed`.
pub fn fit(spec: &AlgorithmSpec, config: &Config, train: &Dataset, seed: u64) -> Result<FittedModel> {
    spec.check_config(config)?;
    let fail = |message: String| Error::Training {
        algorithm: spec.id.to_string(),
        message,
    };
    if train.n_rows() == 0 {
        return Err(fail("empty training data".into()));
    }
    let schema = Schema::of(train);
    let n_classes = train.n_classes();
    let y = train.labels();
    let model = match spec.id {
        AlgorithmId::MajorityBaseline => {
            let mut freq = vec![0.0; n_classes];
            y.iter().for_each(|&c| freq[c] += 1.0);
            freq.iter_mut().for_each(|f| *f /= y.len() as f64);
            Model::Constant(freq)
        }
        AlgorithmId::KNearestNeighbors => {
            let raw = schema.one_hot(train.rows())?;
            let scaler = Scaler::min_max(&raw);
            let weighting = match config.get("weighting") {
                Some(ParamValue::Text(w)) if w == "inverse-distance" => Weighting::InverseDistance,
                _ => Weighting::Uniform,
            };
            let k = int_param(config, "k") as usize;
            Model::Knn {
                knn: Knn::fit(scaler.apply(&raw), y, n_classes, k, weighting),
                scaler,
            }
        }
        AlgorithmId::DecisionTree => {
            let x = schema.raw(train.rows())?;
            let kinds = schema.kinds();
            let data = TrainingSet { x: &x, y: &y, kinds: &kinds, n_classes };
            let params = TreeParams {
                max_depth: int_param(config, "max_depth") as usize,
                min_split: int_param(config, "min_split") as usize,
                max_features: None,
            };
            let sample: Vec<usize> = (0..y.len()).collect();
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            Model::Tree(Tree::fit(data, &sample, &params, &mut rng))
        }
        AlgorithmId::RandomForest => {
            let x = schema.raw(train.rows())?;
            let kinds = schema.kinds();
            let data = TrainingSet { x: &x, y: &y, kinds: &kinds, n_classes };
            Model::Forest(Forest::fit(
                data,
                &ForestParams {
                    trees: int_param(config, "trees") as usize,
                    max_depth: int_param(config, "max_depth") as usize,
                    min_split: 2,
                    seed,
                },
            ))
        }
        AlgorithmId::GaussianNaiveBayes => {
            let x = schema.one_hot(train.rows())?;
            let epsilon = 10f64.powi(int_param(config, "var_smoothing_exp") as i32);
            Model::NaiveBayes(GaussianNb::fit(&x, &y, n_classes, epsilon))
        }
        AlgorithmId::LogisticRegression => {
            let raw = schema.one_hot(train.rows())?;
            let scaler = Scaler::z_score(&raw);
            let model = Logistic::fit(&scaler.apply(&raw), &y, n_classes, real_param(config, "l2"));
            Model::Logistic { scaler, model }
        }
    };
    Ok(FittedModel {
        algorithm: spec.id,
        schema,
        n_classes,
        model,
    })
}

impl FittedModel {
    pub fn algorithm(&self) -> AlgorithmId {
        self.algorithm
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Labels are the argmax of each probability vector, ties to the lower
    /// class index.
    pub fn predict_with_scores(&self, rows: &[Vec<crate::data::Cell>]) -> Result<Predictions> {
        let probabilities: Vec<Vec<f64>> = match &self.model {
            Model::Constant(freq) => {
                self.schema.raw(rows)?;
                vec![freq.clone(); rows.len()]
            }
            Model::Knn { scaler, knn } => scaler
                .apply(&self.schema.one_hot(rows)?)
                .iter()
                .map(|r| knn.predict_proba(r))
                .collect(),
            Model::Tree(tree) => self
                .schema
                .raw(rows)?
                .iter()
                .map(|r| tree.predict_proba(r).to_vec())
                .collect(),
            Model::Forest(forest) => self.schema.raw(rows)?.iter().map(|r| forest.predict_proba(r)).collect(),
            Model::NaiveBayes(nb) => self.schema.one_hot(rows)?.iter().map(|r| nb.predict_proba(r)).collect(),
            Model::Logistic { scaler, model } => scaler
                .apply(&self.schema.one_hot(rows)?)
                .iter()
                .map(|r| model.predict_proba(r))
                .collect(),
        };
        let labels = probabilities.iter().map(|p| argmax(p)).collect();
        Ok(Predictions { labels, probabilities })
    }

    pub fn predict_dataset(&self, d: &Dataset) -> Result<Predictions> {
        if d.attributes().len() != self.schema.n_columns() || d.target_index() != self.schema.target() {
            return Err(Error::SchemaMismatch("dataset layout differs from training data".into()));
        }
        self.predict_with_scores(d.rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{parse_csv, CsvOptions, TargetColumn};

    fn load(text: &str) -> Dataset {
        parse_csv("t", text, &TargetColumn::Last, &CsvOptions::default()).unwrap()
    }

    #[test]
    fn standard_portfolio_shape() {
        let p = Portfolio::standard();
        assert_eq!(p.algorithms().len(), 6);
        assert_eq!(p.ids(), AlgorithmId::ALL.to_vec());
        for a in p.algorithms() {
            a.validate().unwrap();
        }
        assert_eq!(p.get(AlgorithmId::MajorityBaseline).unwrap().hyperparameters.len(), 0);
        assert!(Portfolio::new(vec![p.algorithms()[0].clone(), p.algorithms()[0].clone()]).is_err());
    }

    #[test]
    fn fingerprint_tracks_tunable_flags() {
        let mut p = Portfolio::standard();
        let before = p.fingerprint();
        assert_eq!(before, Portfolio::standard().fingerprint());
        let mut rf = p.get(AlgorithmId::RandomForest).unwrap().clone();
        rf.hyperparameters[0].tunable = false;
        p.replace(rf).unwrap();
        assert_ne!(p.fingerprint(), before);
    }

    #[test]
    fn id_round_trip() {
        for id in AlgorithmId::ALL {
            assert_eq!(id.as_str().parse::<AlgorithmId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
    }

    #[test]
    fn majority_predicts_frequencies() {
        let d = load("x,y\n1,a\n2,a\n3,b\n");
        let spec = Portfolio::standard().get(AlgorithmId::MajorityBaseline).unwrap().clone();
        let m = fit(&spec, &spec.default_config, &d, 0).unwrap();
        let p = m.predict_dataset(&d).unwrap();
        assert_eq!(p.labels, vec![0, 0, 0]);
        assert!((p.probabilities[0][0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((p.probabilities[2][1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn one_nn_memorises_training_set() {
        let d = load("x,c,y\n0.1,u,a\n0.5,v,b\n0.9,u,c\n0.3,v,a\n0.7,u,b\n");
        let spec = Portfolio::standard().get(AlgorithmId::KNearestNeighbors).unwrap().clone();
        let mut config = spec.default_config.clone();
        config.insert("k".into(), ParamValue::Int(1));
        let m = fit(&spec, &config, &d, 0).unwrap();
        assert_eq!(m.predict_dataset(&d).unwrap().labels, d.labels());
    }

    #[test]
    fn config_errors() {
        let d = load("x,y\n1,a\n2,b\n");
        let spec = Portfolio::standard().get(AlgorithmId::DecisionTree).unwrap().clone();
        let mut config = spec.default_config.clone();
        config.insert("max_depth".into(), ParamValue::Int(0));
        assert!(matches!(fit(&spec, &config, &d, 0), Err(Error::Config { .. })));
        let empty = d.select_rows(&[]);
        assert!(matches!(fit(&spec, &spec.default_config, &empty, 0), Err(Error::Training { .. })));
    }

    #[test]
    fn every_algorithm_yields_distributions() {
        let d = load("x,c,z,y\n0.1,u,3,a\n0.5,v,1,b\n0.9,u,2,c\n0.3,v,7,a\n0.7,u,5,b\n0.2,w,1,c\n");
        let p = Portfolio::standard();
        for spec in p.algorithms() {
            let m = fit(spec, &spec.default_config, &d, 3).unwrap();
            let pred = m.predict_dataset(&d).unwrap();
            for (label, probs) in pred.labels.iter().zip(&pred.probabilities) {
                assert_eq!(probs.len(), 3);
                assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{}", spec.id);
                assert_eq!(*label, argmax(probs));
            }
            assert_eq!(fit(spec, &spec.default_config, &d, 3).unwrap(), m);
        }
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let d = load("x,y\n1,a\n2,b\n");
        let spec = Portfolio::standard().get(AlgorithmId::LogisticRegression).unwrap().clone();
        let m = fit(&spec, &spec.default_config, &d, 0).unwrap();
        let bad = vec![vec![crate::data::Cell::Num(1.0)]];
        assert!(matches!(m.predict_with_scores(&bad), Err(Error::SchemaMismatch(_))));
        let cat = vec![vec![crate::data::Cell::Cat(0), crate::data::Cell::Cat(0)]];
        assert!(matches!(m.predict_with_scores(&cat), Err(Error::SchemaMismatch(_))));
    }
}
