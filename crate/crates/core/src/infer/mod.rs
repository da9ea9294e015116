//! Single-column discovery: primitive type, quantum, string pattern, scale.

pub mod datetime;
pub mod pattern;
pub mod primitive;
pub mod quantum;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::table::{Column, Table, Value};

pub use datetime::parse_datetime;
pub use pattern::{match_and_extract, mine_string_pattern, PatternToken, StringPattern};
pub use primitive::{infer_primitive_type, PrimitiveInference, SubLevel, TopLevel, TypeTag};
pub use quantum::{infer_quantum, Quantum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Nominal,
    NumericMeaningful,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    pub dirt_tolerance: f64,
    pub rel_tolerance_integer: f64,
    pub rel_tolerance_real: f64,
    pub pattern_support: f64,
    pub pattern_node_budget: usize,
    pub nominal_ratio: f64,
    pub nominal_max_distinct: usize,
    pub epoch_seconds: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            dirt_tolerance: 0.02,
            rel_tolerance_integer: 1e-9,
            rel_tolerance_real: 1e-6,
            pattern_support: 0.95,
            pattern_node_budget: pattern::DEFAULT_NODE_BUDGET,
            nominal_ratio: 0.05,
            nominal_max_distinct: 20,
            epoch_seconds: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnProfile {
    pub name: String,
    #[serde(flatten)]
    pub type_tag: TypeTag,
    pub conformance: f64,
    pub dirty_rows: Vec<usize>,
    pub quantum: Option<Quantum>,
    pub pattern: Option<StringPattern>,
    pub distinct_count: usize,
    pub missing_fraction: f64,
    pub scale: Scale,
}

impl ColumnProfile {
    pub fn is_nominal(&self) -> bool {
        self.scale == Scale::Nominal
    }

    pub fn is_numeric(&self) -> bool {
        self.type_tag.is_numeric() && self.scale == Scale::NumericMeaningful
    }

    /// Numeric reading of a cell under this profile: `None` for Null and for
    /// dirty cells of numeric columns.
    pub fn numeric_value(&self, v: &Value) -> Option<f64> {
        if self.type_tag.is_numeric() {
            v.as_f64()
        } else {
            None
        }
    }
}

pub fn profile_column(column: &Column, config: &ProfileConfig) -> ColumnProfile {
    let rows = column.len();
    let nulls = column.null_count();
    let missing_fraction = if rows == 0 { 0.0 } else { nulls as f64 / rows as f64 };
    let distinct_count = column
        .values
        .iter()
        .filter(|v| !v.is_null())
        .collect::<HashSet<_>>()
        .len();

    let inferred = match infer_primitive_type(column, config.dirt_tolerance, config.epoch_seconds) {
        Ok(r) => r,
        Err(Error::AllMissing(_)) | Err(_) => {
            return ColumnProfile {
                name: column.name.clone(),
                type_tag: TypeTag::PLAIN,
                conformance: 1.0,
                dirty_rows: Vec::new(),
                quantum: None,
                pattern: None,
                distinct_count: 0,
                missing_fraction,
                scale: Scale::Nominal,
            }
        }
    };
    let tag = inferred.tag;

    let quantum = if tag.is_numeric() && tag.sub_level != SubLevel::Boolean {
        let xs: Vec<f64> = column.values.iter().filter_map(Value::as_f64).collect();
        let rel = if tag.top_level == TopLevel::Integer {
            config.rel_tolerance_integer
        } else {
            config.rel_tolerance_real
        };
        infer_quantum(&xs, config.dirt_tolerance, rel)
    } else {
        None
    };

    let pattern = if tag == TypeTag::PLAIN {
        let texts: Vec<String> = column
            .values
            .iter()
            .filter_map(|v| v.as_text().map(|s| s.into_owned()))
            .collect();
        pattern::mine_string_pattern_with_budget(&texts, config.pattern_support, config.pattern_node_budget)
    } else {
        None
    };

    let non_null = rows - nulls;
    let low_cardinality = distinct_count <= config.nominal_max_distinct
        || (distinct_count as f64) <= config.nominal_ratio * non_null as f64;
    let scale = match tag.top_level {
        TopLevel::String => Scale::Nominal,
        TopLevel::Integer if low_cardinality => Scale::Nominal,
        TopLevel::Integer | TopLevel::Numeric => Scale::NumericMeaningful,
    };

    ColumnProfile {
        name: column.name.clone(),
        type_tag: tag,
        conformance: inferred.conformance,
        dirty_rows: inferred.dirty_rows,
        quantum,
        pattern,
        distinct_count,
        missing_fraction,
        scale,
    }
}

pub fn profile_table(table: &Table, config: &ProfileConfig) -> Vec<ColumnProfile> {
    use rayon::prelude::*;
    table
        .columns()
        .par_iter()
        .map(|c| profile_column(c, config))
        .collect()
}
