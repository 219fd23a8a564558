//! Conversion of dataset rows into dense feature matrices.

use serde::{Deserialize, Serialize};

use crate::data::{AttributeKind, Cell, Dataset};
use crate::error::{Error, Result};
use crate::portfolio::tree::FeatureKind;

/// Column layout a model was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    n_columns: usize,
    target: usize,
    /// (column, kind, category count) for every predictor.
    predictors: Vec<(usize, AttributeKind, usize)>,
}

impl Schema {
    pub fn of(d: &Dataset) -> Schema {
        Schema {
            n_columns: d.attributes().len(),
            target: d.target_index(),
            predictors: d
                .predictors()
                .map(|c| {
                    let a = &d.attributes()[c];
                    (c, a.kind, a.categories.len())
                })
                .collect(),
        }
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.predictors
            .iter()
            .map(|&(_, k, _)| match k {
                AttributeKind::Numeric => FeatureKind::Numeric,
                AttributeKind::Categorical => FeatureKind::Categorical,
            })
            .collect()
    }

    /// Raw predictor matrix: numeric values as-is, categories as their codes.
    pub fn raw(&self, rows: &[Vec<Cell>]) -> Result<Vec<Vec<f64>>> {
        rows.iter()
            .enumerate()
            .map(|(r, row)| {
                if row.len() != self.n_columns {
                    return Err(Error::SchemaMismatch(format!(
                        "row {r} has {} cells, model expects {}",
                        row.len(),
                        self.n_columns
                    )));
                }
                self.predictors
                    .iter()
                    .map(|&(c, kind, n_cats)| match (row[c], kind) {
                        (Cell::Num(v), AttributeKind::Numeric) => Ok(v),
                        (Cell::Cat(code), AttributeKind::Categorical) if (code as usize) < n_cats => Ok(code as f64),
                        (Cell::Missing, _) => Err(Error::SchemaMismatch(format!(
                            "row {r} column {c} is missing; impute first"
                        ))),
                        (cell, _) => Err(Error::SchemaMismatch(format!(
                            "row {r} column {c}: {cell:?} does not match {kind:?}"
                        ))),
                    })
                    .collect()
            })
            .collect()
    }

    /// Predictor matrix with categorical columns one-hot expanded.
    pub fn one_hot(&self, rows: &[Vec<Cell>]) -> Result<Vec<Vec<f64>>> {
        let width: usize = self
            .predictors
            .iter()
            .map(|&(_, k, n)| if k == AttributeKind::Numeric { 1 } else { n })
            .sum();
        Ok(self
            .raw(rows)?
            .into_iter()
            .map(|raw| {
                let mut out = Vec::with_capacity(width);
                for (&(_, kind, n), v) in self.predictors.iter().zip(raw) {
                    match kind {
                        AttributeKind::Numeric => out.push(v),
                        AttributeKind::Categorical => {
                            let start = out.len();
                            out.resize(start + n, 0.0);
                            out[start + v as usize] = 1.0;
                        }
                    }
                }
                out
            })
            .collect())
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn target(&self) -> usize {
        self.target
    }
}

/// Per-column affine rescaling `(x - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    shift: Vec<f64>,
    scale: Vec<f64>,
}

impl Scaler {
    /// Map the training range of each column onto `[0, 1]`.
    pub fn min_max(x: &[Vec<f64>]) -> Scaler {
        let d = x.first().map_or(0, Vec::len);
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in x {
            for j in 0..d {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        let scale = lo.iter().zip(&hi).map(|(l, h)| if h > l { h - l } else { 1.0 }).collect();
        Scaler { shift: lo, scale }
    }

    /// Zero mean, unit population standard deviation per column.
    pub fn z_score(x: &[Vec<f64>]) -> Scaler {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for row in x {
            for j in 0..d {
                mean[j] += row[j] / n;
            }
        }
        let mut var = vec![0.0; d];
        for row in x {
            for j in 0..d {
                var[j] += (row[j] - mean[j]).powi(2) / n;
            }
        }
        let scale = var.iter().map(|v| if *v > 0.0 { v.sqrt() } else { 1.0 }).collect();
        Scaler { shift: mean, scale }
    }

    pub fn apply(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|row| {
                row.iter()
                    .zip(self.shift.iter().zip(&self.scale))
                    .map(|(v, (s, k))| (v - s) / k)
                    .collect()
            })
            .collect()
    }
}
