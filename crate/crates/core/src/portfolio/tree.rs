//! CART classification trees with Gini impurity and bootstrap forests.
//!
//! Features are dense `f64` columns. Numeric features split on midpoints
//! between sorted distinct values (`x <= t` goes left); categorical features,
//! stored as category codes, split by equality (`x == c` goes left).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// A depth-1 tree is a single split.
    pub max_depth: usize,
    pub min_split: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 32,
            min_split: 2,
            max_features: None,
        }
    }
}

/// Training rows for tree induction. Labels are class indices below `n_classes`.
#[derive(Debug, Clone, Copy)]
pub struct TrainingSet<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [usize],
    pub kinds: &'a [FeatureKind],
    pub n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Split {
    Threshold { feature: usize, threshold: f64 },
    Equals { feature: usize, category: f64 },
}

impl Split {
    fn goes_left(&self, row: &[f64]) -> bool {
        match *self {
            Split::Threshold { feature, threshold } => row[feature] <= threshold,
            Split::Equals { feature, category } => row[feature] == category,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { distribution: Vec<f64> },
    Internal { split: Split, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    n_features: usize,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total) * (c / total)).sum::<f64>()
}

struct Candidate {
    split: Split,
    impurity: f64,
}

impl Tree {
    /// Fit on the rows listed in `sample` (duplicates allowed, as in a
    /// bootstrap resample).
    pub fn fit(data: TrainingSet<'_>, sample: &[usize], params: &TreeParams, rng: &mut impl Rng) -> Tree {
        let mut tree = Tree {
            nodes: Vec::new(),
            n_features: data.kinds.len(),
        };
        tree.grow(data, sample.to_vec(), 0, params, rng);
        tree
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn grow(
        &mut self,
        data: TrainingSet<'_>,
        sample: Vec<usize>,
        depth: usize,
        params: &TreeParams,
        rng: &mut impl Rng,
    ) -> usize {
        let mut counts = vec![0.0; data.n_classes];
        for &i in &sample {
            counts[data.y[i]] += 1.0;
        }
        let n = sample.len() as f64;
        let impurity = gini(&counts, n);
        let id = self.nodes.len();
        let leaf = |counts: Vec<f64>| Node::Leaf {
            distribution: counts.iter().map(|c| c / n).collect(),
        };
        if depth >= params.max_depth || sample.len() < params.min_split.max(2) || impurity <= 0.0 {
            self.nodes.push(leaf(counts));
            return id;
        }
        let Some(best) = best_split(data, &sample, &counts, params.max_features, rng) else {
            self.nodes.push(leaf(counts));
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) =
            sample.iter().partition(|&&i| best.split.goes_left(&data.x[i]));
        debug_assert!(!left.is_empty() && !right.is_empty());
        // placeholder, patched once children exist
        self.nodes.push(leaf(counts));
        let l = self.grow(data, left, depth + 1, params, rng);
        let r = self.grow(data, right, depth + 1, params, rng);
        self.nodes[id] = Node::Internal {
            split: best.split,
            left: l,
            right: r,
        };
        id
    }

    pub fn predict_proba(&self, row: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { distribution } => return distribution,
                Node::Internal { split, left, right } => {
                    at = if split.goes_left(row) { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Exhaustive split search. Features are visited in random order when
/// subsampling; constant features do not count towards `max_features`.
fn best_split(
    data: TrainingSet<'_>,
    sample: &[usize],
    parent_counts: &[f64],
    max_features: Option<usize>,
    rng: &mut impl Rng,
) -> Option<Candidate> {
    let n_features = data.kinds.len();
    let mut order: Vec<usize> = (0..n_features).collect();
    let budget = match max_features {
        Some(k) if k < n_features => {
            order.shuffle(rng);
            k.max(1)
        }
        _ => n_features,
    };
    let mut best: Option<Candidate> = None;
    let mut visited = 0;
    for feature in order {
        if visited >= budget {
            break;
        }
        let found = match data.kinds[feature] {
            FeatureKind::Numeric => best_threshold(data, sample, parent_counts, feature),
            FeatureKind::Categorical => best_category(data, sample, parent_counts, feature),
        };
        if let Some(c) = found {
            visited += 1;
            if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                best = Some(c);
            }
        }
    }
    best
}

fn best_threshold(data: TrainingSet<'_>, sample: &[usize], parent: &[f64], feature: usize) -> Option<Candidate> {
    let mut sorted: Vec<(f64, usize)> = sample.iter().map(|&i| (data.x[i][feature], data.y[i])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = sorted.len() as f64;
    let mut left = vec![0.0; parent.len()];
    let mut right = parent.to_vec();
    let mut best: Option<Candidate> = None;
    for k in 0..sorted.len() - 1 {
        let (value, label) = sorted[k];
        left[label] += 1.0;
        right[label] -= 1.0;
        let next = sorted[k + 1].0;
        if next <= value {
            continue;
        }
        let nl = (k + 1) as f64;
        let nr = total - nl;
        let impurity = (nl * gini(&left, nl) + nr * gini(&right, nr)) / total;
        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
            let mut threshold = value + (next - value) / 2.0;
            // guard against the midpoint rounding up onto `next`
            if threshold >= next {
                threshold = value;
            }
            best = Some(Candidate {
                split: Split::Threshold { feature, threshold },
                impurity,
            });
        }
    }
    best
}

fn best_category(data: TrainingSet<'_>, sample: &[usize], parent: &[f64], feature: usize) -> Option<Candidate> {
    let mut categories: Vec<f64> = sample.iter().map(|&i| data.x[i][feature]).collect();
    categories.sort_by(f64::total_cmp);
    categories.dedup();
    if categories.len() < 2 {
        return None;
    }
    let total = sample.len() as f64;
    let mut best: Option<Candidate> = None;
    for &category in &categories {
        let mut left = vec![0.0; parent.len()];
        for &i in sample {
            if data.x[i][feature] == category {
                left[data.y[i]] += 1.0;
            }
        }
        let right: Vec<f64> = parent.iter().zip(&left).map(|(p, l)| p - l).collect();
        let nl: f64 = left.iter().sum();
        let nr = total - nl;
        let impurity = (nl * gini(&left, nl) + nr * gini(&right, nr)) / total;
        if best.as_ref().is_none_or(|b| impurity < b.impurity) {
            best = Some(Candidate {
                split: Split::Equals { feature, category },
                impurity,
            });
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: usize,
    pub min_split: usize,
    pub seed: u64,
}

/// Bagged trees with `ceil(sqrt(d))` features examined per split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<Tree>,
    n_classes: usize,
}

pub fn sqrt_features(d: usize) -> usize {
    ((d as f64).sqrt().ceil() as usize).max(1)
}

impl Forest {
    pub fn fit(data: TrainingSet<'_>, params: &ForestParams) -> Forest {
        let n = data.y.len();
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_split: params.min_split,
            max_features: Some(sqrt_features(data.kinds.len())),
        };
        let mut seeder = ChaCha8Rng::seed_from_u64(params.seed);
        let seeds: Vec<u64> = (0..params.trees.max(1)).map(|_| seeder.gen()).collect();
        let trees = seeds
            .into_par_iter()
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                Tree::fit(data, &sample, &tree_params, &mut rng)
            })
            .collect();
        Forest {
            trees,
            n_classes: data.n_classes,
        }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }

    /// Mean of the trees' leaf distributions.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.predict_proba(row)) {
                *a += p;
            }
        }
        let k = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        acc
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
