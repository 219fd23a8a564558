//! The 23-entry meta-feature catalogue describing a dataset, and projection
//! of catalogue vectors onto a selected subset.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{AttributeKind, Cell, Dataset};
use crate::error::{Error, Result};

/// Catalogue size.
pub const N_META_FEATURES: usize = 23;
/// Upper bound on the size of a selected meta-feature list.
pub const MAX_SELECTED: usize = 8;

/// Statistic family of a meta-feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetaFeatureType {
    Entropy = 1,
    Proportion = 2,
    Average = 3,
    Variance = 4,
    Count = 5,
}

pub const META_FEATURE_NAMES: [&str; N_META_FEATURES] = [
    "target_class_count",
    "target_entropy",
    "target_max_class_proportion",
    "target_min_class_proportion",
    "numeric_attribute_count",
    "categorical_attribute_count",
    "numeric_attribute_proportion",
    "attribute_count",
    "row_count",
    "fewest_classes_count",
    "fewest_classes_entropy",
    "fewest_classes_max_proportion",
    "fewest_classes_min_proportion",
    "most_classes_count",
    "most_classes_entropy",
    "most_classes_max_proportion",
    "most_classes_min_proportion",
    "min_numeric_mean",
    "max_numeric_mean",
    "min_numeric_variance",
    "max_numeric_variance",
    "variance_of_numeric_means",
    "variance_of_numeric_variances",
];

pub fn meta_feature_type(index: usize) -> MetaFeatureType {
    use MetaFeatureType::*;
    match index {
        1 | 10 | 14 => Entropy,
        2 | 3 | 6 | 11 | 12 | 15 | 16 => Proportion,
        17 | 18 => Average,
        19..=22 => Variance,
        0 | 4 | 5 | 7 | 8 | 9 | 13 => Count,
        _ => panic!("meta-feature index {index} out of range"),
    }
}

/// Shannon entropy in bits. `0 * log 0` counts as 0.
pub fn entropy(proportions: &[f64]) -> Result<f64> {
    if proportions.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidArgument("proportions must be finite and non-negative".into()));
    }
    let total: f64 = proportions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("proportions sum to {total}, expected 1")));
    }
    Ok(entropy_unchecked(proportions))
}

fn entropy_unchecked(proportions: &[f64]) -> f64 {
    let h: f64 = proportions
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // -0.0 for a single class
    h.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetaFeatureVector {
    values: [f64; N_META_FEATURES],
}

impl MetaFeatureVector {
    pub fn new(values: [f64; N_META_FEATURES]) -> Self {
        MetaFeatureVector { values }
    }

    pub fn values(&self) -> &[f64; N_META_FEATURES] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn labelled(&self) -> BTreeMap<String, f64> {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (format!("mf{i}"), v))
            .collect()
    }

    /// Values restricted to `list`, in list order.
    pub fn project(&self, list: &MetaFeatureList) -> Vec<f64> {
        list.indices().iter().map(|&i| self.values[i]).collect()
    }
}

/// A strictly increasing list of at most [`MAX_SELECTED`] catalogue indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MetaFeatureList {
    indices: Vec<usize>,
}

impl MetaFeatureList {
    /// Validates and sorts; rejects duplicates, out-of-range indices and
    /// lists longer than [`MAX_SELECTED`].
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        Self::check(&mut indices, MAX_SELECTED)?;
        Ok(MetaFeatureList { indices })
    }

    /// Like [`new`](Self::new) but without the length cap. Used to address
    /// the full catalogue.
    pub fn unbounded(mut indices: Vec<usize>) -> Result<Self> {
        Self::check(&mut indices, N_META_FEATURES)?;
        Ok(MetaFeatureList { indices })
    }

    pub fn all() -> Self {
        MetaFeatureList {
            indices: (0..N_META_FEATURES).collect(),
        }
    }

    fn check(indices: &mut [usize], cap: usize) -> Result<()> {
        indices.sort_unstable();
        if let Some(&i) = indices.iter().find(|&&i| i >= N_META_FEATURES) {
            return Err(Error::InvalidArgument(format!("meta-feature index {i} out of range")));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate meta-feature index".into()));
        }
        if indices.len() > cap {
            return Err(Error::InvalidArgument(format!(
                "{} meta-features selected, limit is {cap}",
                indices.len()
            )));
        }
        Ok(())
    }

    pub fn from_mask(mask: u32) -> Result<Self> {
        Self::new((0..N_META_FEATURES).filter(|&i| mask & (1 << i) != 0).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

impl TryFrom<Vec<usize>> for MetaFeatureList {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::unbounded(v)
    }
}

impl From<MetaFeatureList> for Vec<usize> {
    fn from(l: MetaFeatureList) -> Self {
        l.indices
    }
}

/// Project `v` onto raw indices, failing on out-of-range entries.
pub fn project(v: &MetaFeatureVector, indices: &[usize]) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| {
            v.values
                .get(i)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("meta-feature index {i} out of range")))
        })
        .collect()
}

struct Distribution {
    classes: f64,
    entropy: f64,
    max: f64,
    min: f64,
}

fn distribution(codes: impl Iterator<Item = u32>) -> Distribution {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    let mut n = 0usize;
    for c in codes {
        *counts.entry(c).or_default() += 1;
        n += 1;
    }
    let props: Vec<f64> = counts.values().map(|&c| c as f64 / n as f64).collect();
    Distribution {
        classes: props.len() as f64,
        entropy: entropy_unchecked(&props),
        max: props.iter().copied().fold(0.0, f64::max),
        min: props.iter().copied().fold(f64::INFINITY, f64::min).min(1.0),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Compute the full catalogue. Missing cells are skipped; impute first for
/// the intended semantics.
pub fn compute_all(d: &Dataset) -> MetaFeatureVector {
    let mut v = [0.0; N_META_FEATURES];
    let rows = d.rows();
    let column_codes = |col: usize| {
        rows.iter().filter_map(move |r| match r[col] {
            Cell::Cat(c) => Some(c),
            _ => None,
        })
    };

    let target = distribution(column_codes(d.target_index()));
    v[0] = target.classes;
    v[1] = target.entropy;
    v[2] = target.max;
    v[3] = target.min;

    let predictors: Vec<usize> = d.predictors().collect();
    let numeric: Vec<usize> = predictors
        .iter()
        .copied()
        .filter(|&c| d.attributes()[c].kind == AttributeKind::Numeric)
        .collect();
    let categorical: Vec<usize> = predictors
        .iter()
        .copied()
        .filter(|&c| d.attributes()[c].kind == AttributeKind::Categorical)
        .collect();
    v[4] = numeric.len() as f64;
    v[5] = categorical.len() as f64;
    v[7] = predictors.len() as f64;
    v[6] = if predictors.is_empty() { 0.0 } else { v[4] / v[7] };
    v[8] = rows.len() as f64;

    let cat_stats: Vec<Distribution> = categorical.iter().map(|&c| distribution(column_codes(c))).collect();
    // first attribute wins ties
    let fewest = cat_stats.iter().reduce(|a, b| if b.classes < a.classes { b } else { a });
    let most = cat_stats.iter().reduce(|a, b| if b.classes > a.classes { b } else { a });
    if let (Some(f), Some(m)) = (fewest, most) {
        v[9..13].copy_from_slice(&[f.classes, f.entropy, f.max, f.min]);
        v[13..17].copy_from_slice(&[m.classes, m.entropy, m.max, m.min]);
    }

    let mut means = Vec::with_capacity(numeric.len());
    let mut variances = Vec::with_capacity(numeric.len());
    for &c in &numeric {
        let xs: Vec<f64> = rows
            .iter()
            .filter_map(|r| match r[c] {
                Cell::Num(x) => Some(x),
                _ => None,
            })
            .collect();
        if xs.is_empty() {
            continue;
        }
        means.push(mean(&xs));
        variances.push(population_variance(&xs));
    }
    if !means.is_empty() {
        let (lo_m, hi_m) = min_max(&means);
        let (lo_v, hi_v) = min_max(&variances);
        v[17] = lo_m;
        v[18] = hi_m;
        v[19] = lo_v;
        v[20] = hi_v;
        v[21] = population_variance(&means);
        v[22] = population_variance(&variances);
    }
    MetaFeatureVector::new(v)
}
