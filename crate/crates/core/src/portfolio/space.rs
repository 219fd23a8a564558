use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A concrete hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
        }
    }
}

/// Hyperparameter name to value.
pub type Config = BTreeMap<String, ParamValue>;

/// The set of values a hyperparameter may take.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    /// Every integer in `lo..=hi`.
    Integer { lo: i64, hi: i64 },
    Categorical { values: Vec<String> },
    /// Reals `2^e` for integer `e` in `lo..=hi`.
    Log2Grid { lo: i64, hi: i64 },
}

impl Domain {
    pub fn cardinality(&self) -> u64 {
        match self {
            Domain::Integer { lo, hi } | Domain::Log2Grid { lo, hi } => (hi - lo + 1) as u64,
            Domain::Categorical { values } => values.len() as u64,
        }
    }

    /// Smallest width whose codes reach every value.
    pub fn min_bits(&self) -> u32 {
        let n = self.cardinality().max(2);
        64 - (n - 1).leading_zeros()
    }

    pub fn contains(&self, value: &ParamValue) -> bool {
        match (self, value) {
            (Domain::Integer { lo, hi }, ParamValue::Int(v)) => lo <= v && v <= hi,
            (Domain::Categorical { values }, ParamValue::Text(v)) => values.contains(v),
            (Domain::Log2Grid { .. }, ParamValue::Real(v)) => self.grid_exponent(*v).is_some(),
            _ => false,
        }
    }

    fn grid_exponent(&self, v: f64) -> Option<i64> {
        let Domain::Log2Grid { lo, hi } = self else { return None };
        if !(v > 0.0 && v.is_finite()) {
            return None;
        }
        let e = v.log2().round() as i64;
        (*lo <= e && e <= *hi && (e as i32 >= -1074) && 2f64.powi(e as i32) == v).then_some(e)
    }

    /// Decode a `bits`-wide code word. Total over `0..2^bits`.
    pub fn decode(&self, code: u64, bits: u32) -> ParamValue {
        let top = (1u64 << bits) - 1;
        let scaled = |lo: i64, hi: i64| {
            if top == 0 {
                lo
            } else {
                lo + ((code.min(top) as f64) * ((hi - lo) as f64) / top as f64).round() as i64
            }
        };
        match self {
            Domain::Integer { lo, hi } => ParamValue::Int(scaled(*lo, *hi)),
            Domain::Log2Grid { lo, hi } => ParamValue::Real(2f64.powi(scaled(*lo, *hi) as i32)),
            Domain::Categorical { values } => ParamValue::Text(values[(code % values.len() as u64) as usize].clone()),
        }
    }

    /// Smallest code decoding to `value`.
    pub fn encode(&self, value: &ParamValue, bits: u32) -> Option<u64> {
        if !self.contains(value) {
            return None;
        }
        (0..1u64 << bits).find(|&code| &self.decode(code, bits) == value)
    }

    pub fn values(&self) -> Vec<ParamValue> {
        match self {
            Domain::Integer { lo, hi } => (*lo..=*hi).map(ParamValue::Int).collect(),
            Domain::Log2Grid { lo, hi } => (*lo..=*hi).map(|e| ParamValue::Real(2f64.powi(e as i32))).collect(),
            Domain::Categorical { values } => values.iter().cloned().map(ParamValue::Text).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperparamSpec {
    pub name: String,
    pub domain: Domain,
    pub bits: u32,
    /// Cleared by screening when tuning the parameter does not pay off.
    pub tunable: bool,
}

impl HyperparamSpec {
    pub fn new(name: &str, domain: Domain) -> Self {
        let bits = domain.min_bits();
        HyperparamSpec {
            name: name.to_owned(),
            domain,
            bits,
            tunable: true,
        }
    }

    pub fn integer(name: &str, lo: i64, hi: i64) -> Self {
        Self::new(name, Domain::Integer { lo, hi })
    }

    pub fn categorical(name: &str, values: &[&str]) -> Self {
        Self::new(
            name,
            Domain::Categorical {
                values: values.iter().map(|s| s.to_string()).collect(),
            },
        )
    }

    pub fn log2_grid(name: &str, lo: i64, hi: i64) -> Self {
        Self::new(name, Domain::Log2Grid { lo, hi })
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits == 0 || self.bits > 32 {
            return Err(Error::InvalidArgument(format!("`{}`: bits must be in 1..=32", self.name)));
        }
        let reachable = match &self.domain {
            Domain::Categorical { values } => !values.is_empty() && values.len() as u64 <= 1u64 << self.bits,
            d => d.cardinality() <= 1u64 << self.bits,
        };
        if !reachable {
            return Err(Error::InvalidArgument(format!(
                "`{}`: {} bits cannot address the domain",
                self.name, self.bits
            )));
        }
        Ok(())
    }
}
