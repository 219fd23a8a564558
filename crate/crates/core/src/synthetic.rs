//! Seeded generators of synthetic classification datasets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, WeightedIndex};

use crate::data::{Attribute, Cell, Dataset};
use crate::seeds::derive_seed;

/// Shape of a Gaussian-blob dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub name: String,
    pub rows: usize,
    pub numeric: usize,
    pub categorical: usize,
    /// Category count of every categorical predictor.
    pub levels: usize,
    pub classes: usize,
    /// Relative class frequencies; uniform when empty.
    pub class_weights: Vec<f64>,
    /// Spread of the class centres in units of the noise deviation.
    pub separation: f64,
    /// Probability that a categorical cell follows its class.
    pub categorical_signal: f64,
    /// Fraction of predictor cells blanked out.
    pub missing_rate: f64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        BlobSpec {
            name: "blobs".into(),
            rows: 150,
            numeric: 4,
            categorical: 0,
            levels: 3,
            classes: 3,
            class_weights: Vec::new(),
            separation: 2.0,
            categorical_signal: 0.6,
            missing_rate: 0.0,
        }
    }
}

pub fn blobs(spec: &BlobSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let centres: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| (0..spec.numeric).map(|_| unit.sample(&mut rng) * spec.separation).collect())
        .collect();
    let weights = if spec.class_weights.len() == spec.classes {
        spec.class_weights.clone()
    } else {
        vec![1.0; spec.classes]
    };
    let pick_class = WeightedIndex::new(&weights).expect("positive class weights");

    // every class appears at least twice so stratified splits keep it
    let mut labels: Vec<usize> = (0..spec.classes).flat_map(|c| [c, c]).take(spec.rows).collect();
    while labels.len() < spec.rows {
        labels.push(pick_class.sample(&mut rng));
    }
    labels.shuffle(&mut rng);

    let mut attributes: Vec<Attribute> = (0..spec.numeric).map(|j| Attribute::numeric(format!("x{j}"))).collect();
    let level_names: Vec<String> = (0..spec.levels).map(|l| format!("v{l}")).collect();
    for j in 0..spec.categorical {
        attributes.push(Attribute::categorical(format!("c{j}"), level_names.clone()));
    }
    attributes.push(Attribute::categorical("class", (0..spec.classes).map(|c| format!("k{c}"))));
    let target = attributes.len() - 1;

    let rows = labels
        .iter()
        .map(|&class| {
            let mut row: Vec<Cell> = centres[class]
                .iter()
                .map(|c| Cell::Num(round4(c + unit.sample(&mut rng))))
                .collect();
            for j in 0..spec.categorical {
                let level = if rng.gen_bool(spec.categorical_signal) {
                    (class + j) % spec.levels
                } else {
                    rng.gen_range(0..spec.levels)
                };
                row.push(Cell::Cat(level as u32));
            }
            for cell in row.iter_mut() {
                if rng.gen_bool(spec.missing_rate) {
                    *cell = Cell::Missing;
                }
            }
            row.push(Cell::Cat(class as u32));
            row
        })
        .collect();
    Dataset::new(spec.name.clone(), attributes, rows, target).expect("generator emits valid rows")
}

/// Four decimals keeps CSV round trips exact and files small.
fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

/// Two well separated clusters on a single numeric attribute.
pub fn separable(rows: usize, seed: u64) -> Dataset {
    blobs(
        &BlobSpec {
            name: "separable".into(),
            rows,
            numeric: 1,
            classes: 2,
            separation: 0.0,
            ..BlobSpec::default()
        },
        seed,
    )
    .map_numeric(|class, x| x * 0.1 + if class == 0 { -10.0 } else { 10.0 })
}

/// A binary problem whose minority class has the given share of rows.
pub fn imbalanced(rows: usize, minority_share: f64, seed: u64) -> Dataset {
    blobs(
        &BlobSpec {
            name: "imbalanced".into(),
            rows,
            numeric: 2,
            classes: 2,
            class_weights: vec![1.0 - minority_share, minority_share],
            separation: 0.5,
            ..BlobSpec::default()
        },
        seed,
    )
}

/// A varied corpus of `n` small datasets: mixed attribute types, class
/// counts, separations and occasional missing cells.
pub fn corpus(n: usize, seed: u64) -> Vec<Dataset> {
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("corpus/{i}")));
            let spec = BlobSpec {
                name: format!("synth_{i:02}"),
                rows: rng.gen_range(60..=160),
                numeric: rng.gen_range(0..=6),
                categorical: rng.gen_range(0..=3),
                levels: rng.gen_range(2..=5),
                classes: rng.gen_range(2..=4),
                separation: rng.gen_range(0.3..3.0),
                categorical_signal: rng.gen_range(0.2..0.9),
                missing_rate: if rng.gen_bool(0.3) { 0.02 } else { 0.0 },
                ..BlobSpec::default()
            };
            let spec = if spec.numeric + spec.categorical == 0 {
                BlobSpec { numeric: 1, ..spec }
            } else {
                spec
            };
            blobs(&spec, rng.gen())
        })
        .collect()
}

impl Dataset {
    /// Apply `f(class, value)` to every numeric cell.
    pub fn map_numeric(&self, f: impl Fn(usize, f64) -> f64) -> Dataset {
        let target = self.target_index();
        let rows = self
            .rows()
            .iter()
            .map(|row| {
                let class = match row[target] {
                    Cell::Cat(c) => c as usize,
                    _ => 0,
                };
                row.iter()
                    .map(|&cell| match cell {
                        Cell::Num(x) => Cell::Num(f(class, x)),
                        other => other,
                    })
                    .collect()
            })
            .collect();
        Dataset::new(self.name(), self.attributes().to_vec(), rows, target).expect("same schema")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_deterministic_and_well_formed() {
        let spec = BlobSpec {
            categorical: 2,
            missing_rate: 0.1,
            ..BlobSpec::default()
        };
        let a = blobs(&spec, 4);
        assert_eq!(a, blobs(&spec, 4));
        assert_eq!(a.n_rows(), 150);
        assert_eq!(a.attributes().len(), 7);
        assert!(a.has_missing());
        assert!(!a.rows().iter().any(|r| r[a.target_index()].is_missing()));
    }

    #[test]
    fn corpus_varies() {
        let c = corpus(10, 1);
        assert_eq!(c.len(), 10);
        let shapes: std::collections::BTreeSet<usize> = c.iter().map(|d| d.attributes().len()).collect();
        assert!(shapes.len() > 2);
    }
}
