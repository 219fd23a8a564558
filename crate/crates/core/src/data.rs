//! Tabular classification datasets: CSV loading with column typing,
//! seeded imputation of missing cells and stratified train/test splits.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A single cell value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Index into the owning attribute's category vocabulary.
    Cat(u32),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
    /// Sorted category tokens; empty for numeric attributes.
    pub categories: Vec<String>,
}

impl Attribute {
    pub fn numeric(name: impl Into<String>) -> Self {
        Attribute {
            name: name.into(),
            kind: AttributeKind::Numeric,
            categories: Vec::new(),
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        let set: BTreeSet<String> = categories.into_iter().map(Into::into).collect();
        Attribute {
            name: name.into(),
            kind: AttributeKind::Categorical,
            categories: set.into_iter().collect(),
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == AttributeKind::Numeric
    }

    pub fn category_index(&self, token: &str) -> Option<u32> {
        self.categories
            .binary_search_by(|c| c.as_str().cmp(token))
            .ok()
            .map(|i| i as u32)
    }
}

/// A typed table with one designated categorical target column.
///
/// Rows are immutable once the dataset is built; every transformation
/// returns a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    attributes: Vec<Attribute>,
    rows: Vec<Vec<Cell>>,
    target: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<Attribute>,
        rows: Vec<Vec<Cell>>,
        target: usize,
    ) -> Result<Self> {
        let target_attr = attributes
            .get(target)
            .ok_or_else(|| Error::InvalidDataset(format!("target index {target} out of range")))?;
        if target_attr.kind != AttributeKind::Categorical {
            return Err(Error::InvalidDataset(format!(
                "target `{}` must be categorical",
                target_attr.name
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != attributes.len() {
                return Err(Error::InvalidDataset(format!(
                    "row {r} has {} cells, expected {}",
                    row.len(),
                    attributes.len()
                )));
            }
            for (cell, attr) in row.iter().zip(&attributes) {
                let ok = match (cell, attr.kind) {
                    (Cell::Missing, _) => true,
                    (Cell::Num(v), AttributeKind::Numeric) => v.is_finite(),
                    (Cell::Cat(c), AttributeKind::Categorical) => (*c as usize) < attr.categories.len(),
                    _ => false,
                };
                if !ok {
                    return Err(Error::InvalidDataset(format!(
                        "row {r}: cell {cell:?} does not fit attribute `{}`",
                        attr.name
                    )));
                }
            }
        }
        Ok(Dataset {
            name: name.into(),
            attributes,
            rows,
            target,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &Attribute {
        &self.attributes[self.target]
    }

    /// Class tokens in label order.
    pub fn classes(&self) -> &[String] {
        &self.attributes[self.target].categories
    }

    pub fn n_classes(&self) -> usize {
        self.classes().len()
    }

    /// Indices of the non-target attributes, in column order.
    pub fn predictors(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.attributes.len()).filter(move |&i| i != self.target)
    }

    /// Target label of every row. Panics on a missing target cell; call on
    /// imputed data.
    pub fn labels(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|row| match row[self.target] {
                Cell::Cat(c) => c as usize,
                other => panic!("target cell is {other:?}; impute before reading labels"),
            })
            .collect()
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().flatten().any(Cell::is_missing)
    }

    /// A dataset with the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            attributes: self.attributes.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            target: self.target,
        }
    }

    /// Replace every missing cell with a value drawn uniformly (seeded) from
    /// the non-missing cells of the same column.
    pub fn impute_missing(&self, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = self.rows.clone();
        for (col, attr) in self.attributes.iter().enumerate() {
            let holes: Vec<usize> = (0..rows.len()).filter(|&r| rows[r][col].is_missing()).collect();
            if holes.is_empty() {
                continue;
            }
            let donors: Vec<Cell> = self
                .rows
                .iter()
                .map(|row| row[col])
                .filter(|c| !c.is_missing())
                .collect();
            if donors.is_empty() {
                return Err(Error::ColumnEntirelyMissing(attr.name.clone()));
            }
            for r in holes {
                rows[r][col] = donors[rng.gen_range(0..donors.len())];
            }
        }
        Ok(Dataset {
            rows,
            ..self.clone()
        })
    }

    /// Per-class stratified split. Each class with at least two rows keeps
    /// `max(1, round(fraction * count))` rows in the train part; a singleton
    /// class goes entirely to train. Both parts preserve the original row order.
    pub fn split_stratified(&self, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction {train_fraction} must lie in (0, 1)"
            )));
        }
        if self.rows.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "cannot split {} row(s); need at least 2",
                self.rows.len()
            )));
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.n_classes()];
        for (i, row) in self.rows.iter().enumerate() {
            match row[self.target] {
                Cell::Cat(c) => by_class[c as usize].push(i),
                _ => return Err(Error::InvalidDataset("missing target cell; impute first".into())),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut is_train = vec![false; self.rows.len()];
        for members in &mut by_class {
            if members.is_empty() {
                continue;
            }
            members.shuffle(&mut rng);
            let n = members.len();
            let take = if n == 1 {
                1
            } else {
                ((train_fraction * n as f64).round() as usize).clamp(1, n)
            };
            for &i in &members[..take] {
                is_train[i] = true;
            }
        }
        let (train, test): (Vec<usize>, Vec<usize>) = (0..self.rows.len()).partition(|&i| is_train[i]);
        Ok((self.select_rows(&train), self.select_rows(&test)))
    }

    /// Render a cell back to its CSV token.
    pub fn cell_token(&self, col: usize, cell: Cell, missing_token: &str) -> String {
        match cell {
            Cell::Num(v) => format!("{v}"),
            Cell::Cat(c) => self.attributes[col].categories[c as usize].clone(),
            Cell::Missing => missing_token.to_owned(),
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W, options: &CsvOptions) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .delimiter(options.delimiter)
            .from_writer(writer);
        let map = |e: csv::Error| Error::MalformedCsv(e.to_string());
        out.write_record(self.attributes.iter().map(|a| a.name.as_str()))
            .map_err(map)?;
        for row in &self.rows {
            let tokens: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(col, &cell)| self.cell_token(col, cell, &options.missing_token))
                .collect();
            out.write_record(&tokens).map_err(map)?;
        }
        out.flush().map_err(|e| Error::MalformedCsv(e.to_string()))?;
        Ok(())
    }
}

/// How to find the target column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetColumn {
    Name(String),
    Index(usize),
    Last,
}

impl From<&str> for TargetColumn {
    /// A plain integer is read as a column index only when no header has that name.
    fn from(s: &str) -> Self {
        TargetColumn::Name(s.to_owned())
    }
}

impl TargetColumn {
    fn resolve(&self, header: &[String]) -> Result<usize> {
        match self {
            TargetColumn::Name(name) => header
                .iter()
                .position(|h| h == name)
                .or_else(|| name.parse::<usize>().ok().filter(|&i| i < header.len()))
                .ok_or_else(|| Error::TargetNotFound(name.clone())),
            TargetColumn::Index(i) if *i < header.len() => Ok(*i),
            TargetColumn::Index(i) => Err(Error::TargetNotFound(i.to_string())),
            TargetColumn::Last => header
                .len()
                .checked_sub(1)
                .ok_or_else(|| Error::TargetNotFound("<last>".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Cells equal to this token (or empty) are missing.
    pub missing_token: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            missing_token: "?".to_owned(),
        }
    }
}

/// Integer or plain decimal literal: optional sign, digits, optional fraction.
/// Exponents, `inf` and `nan` are rejected.
pub fn is_decimal_literal(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    match frac {
        None => !int.is_empty() && digits(int),
        Some(f) => (!int.is_empty() || !f.is_empty()) && digits(int) && digits(f),
    }
}

pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_csv(&name, &text, target, options)
}

/// Parse CSV text (header row first) into a typed dataset.
pub fn parse_csv(name: &str, text: &str, target: &TargetColumn, options: &CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::MalformedCsv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::MalformedCsv("missing header row".into()));
    }
    let target = target.resolve(&header)?;

    let mut raw: Vec<Vec<Option<String>>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        if record.len() != header.len() {
            return Err(Error::MalformedCsv(format!(
                "data row {} has {} cells, header has {}",
                line + 1,
                record.len(),
                header.len()
            )));
        }
        raw.push(
            record
                .iter()
                .map(|t| (!t.is_empty() && t != options.missing_token).then(|| t.to_owned()))
                .collect(),
        );
    }
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if raw.iter().all(|row| row[target].is_none()) {
        return Err(Error::ColumnEntirelyMissing(header[target].clone()));
    }

    let mut attributes = Vec::with_capacity(header.len());
    for (col, name) in header.iter().enumerate() {
        let present = raw.iter().filter_map(|row| row[col].as_deref());
        let numeric = col != target && present.clone().all(is_decimal_literal);
        attributes.push(if numeric {
            Attribute::numeric(name.clone())
        } else {
            Attribute::categorical(name.clone(), present)
        });
    }

    let rows = raw
        .into_iter()
        .map(|row| {
            row.into_iter()
                .zip(&attributes)
                .map(|(tok, attr)| match tok {
                    None => Cell::Missing,
                    Some(t) if attr.is_numeric() => Cell::Num(t.parse().expect("validated literal")),
                    Some(t) => Cell::Cat(attr.category_index(&t).expect("token in vocabulary")),
                })
                .collect()
        })
        .collect();
    Dataset::new(name, attributes, rows, target)
}
