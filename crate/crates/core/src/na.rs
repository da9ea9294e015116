//! Missing-value normalization and sentinel flagging.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::stats::{self, MAD_TO_SIGMA};
use crate::table::{Column, Table, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaOptions {
    /// Tokens that mean "missing"; compared case-insensitively after trimming.
    pub na_tokens: Vec<String>,
    pub detect_sentinels: bool,
    /// Minimum share of rows a value must take to count as a sentinel.
    pub sentinel_mass: f64,
    /// Distance from the median, in robust standard deviations.
    pub sentinel_sigmas: f64,
}

impl Default for NaOptions {
    fn default() -> Self {
        Self {
            na_tokens: ["", "NA", "N/A", "null", "NaN"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            detect_sentinels: false,
            sentinel_mass: 0.005,
            sentinel_sigmas: 6.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentinel {
    pub column: String,
    /// Raw text of the first occurrence.
    pub raw: String,
    pub value: f64,
    pub count: usize,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SentinelReport {
    pub sentinels: Vec<Sentinel>,
}

/// Replaces NA tokens with `Null`. Sentinels are only reported, never nulled.
pub fn normalize_missing(table: &Table, options: &NaOptions) -> (Table, SentinelReport) {
    let tokens: Vec<String> = options
        .na_tokens
        .iter()
        .map(|t| t.trim().to_lowercase())
        .collect();
    let is_na = |s: &str| {
        let t = s.trim().to_lowercase();
        tokens.contains(&t)
    };
    let normalized = table.map_columns(|c| {
        let values = c
            .values
            .iter()
            .map(|v| match v {
                Value::Text(s) if is_na(s) => Value::Null,
                other => other.clone(),
            })
            .collect();
        Column::new(c.name.clone(), values)
    });

    let mut report = SentinelReport::default();
    if options.detect_sentinels {
        for c in normalized.columns() {
            report
                .sentinels
                .extend(column_sentinels(c, normalized.row_count(), options));
        }
    }
    (normalized, report)
}

fn column_sentinels(column: &Column, row_count: usize, options: &NaOptions) -> Vec<Sentinel> {
    let non_null: Vec<(usize, &Value)> = column
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_null())
        .collect();
    let numeric: Vec<(usize, f64)> = non_null
        .iter()
        .filter_map(|(i, v)| v.as_f64().map(|x| (*i, x)))
        .collect();
    // Only columns that are mostly numeric can carry a numeric sentinel.
    if numeric.is_empty() || numeric.len() * 2 < non_null.len() {
        return Vec::new();
    }
    let xs: Vec<f64> = numeric.iter().map(|(_, x)| *x).collect();
    let median = stats::median(&xs).unwrap_or(0.0);
    let mad = stats::mad(&xs).unwrap_or(0.0);
    if mad <= 0.0 {
        return Vec::new();
    }
    let limit = options.sentinel_sigmas * MAD_TO_SIGMA * mad;

    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &(i, x) in &numeric {
        if (x - median).abs() > limit {
            groups.entry(x.to_bits()).or_default().push(i);
        }
    }
    let min_count = options.sentinel_mass * row_count as f64;
    let mut out: Vec<Sentinel> = groups
        .into_iter()
        .filter(|(_, rows)| rows.len() as f64 >= min_count)
        .map(|(bits, rows)| Sentinel {
            column: column.name.clone(),
            raw: column.values[rows[0]].to_string(),
            value: f64::from_bits(bits),
            count: rows.len(),
            rows,
        })
        .collect();
    out.sort_by_key(|s| s.rows[0]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cols: Vec<Column>) -> Table {
        Table::new("t", cols).unwrap()
    }

    #[test]
    fn na_tokens_become_null_case_insensitively() {
        let t = table(vec![Column::from_strs(
            "fullname",
            &[Some("John Smith"), Some("NA"), Some("na"), Some(" n/a "), Some(""), Some("nan")],
        )]);
        let (n, _) = normalize_missing(&t, &NaOptions::default());
        let v = &n.column("fullname").unwrap().values;
        assert_eq!(v[0], Value::text("John Smith"));
        assert!(v[1..].iter().all(Value::is_null));
        // input untouched
        assert_eq!(t.column("fullname").unwrap().null_count(), 0);
    }

    #[test]
    fn column_without_tokens_is_identical() {
        let t = table(vec![Column::from_strs("x", &[Some("a"), Some("b")])]);
        let (n, r) = normalize_missing(&t, &NaOptions::default());
        assert_eq!(n, t);
        assert!(r.sentinels.is_empty());
    }

    #[test]
    fn flags_isolated_extreme_point_mass() {
        let mut vals: Vec<String> = (0..199)
            .map(|i| ["15", "32", "18", "5", "25"][i % 5].to_string())
            .collect();
        vals.insert(4, " -999".to_string());
        let col = Column::new("price", vals.into_iter().map(Value::Text).collect());
        let t = table(vec![col]);
        let opts = NaOptions {
            detect_sentinels: true,
            ..Default::default()
        };
        let (n, r) = normalize_missing(&t, &opts);
        assert_eq!(r.sentinels.len(), 1);
        let s = &r.sentinels[0];
        assert_eq!(s.value, -999.0);
        assert_eq!(s.rows, vec![4]);
        // flagged, not removed
        assert_eq!(n.column("price").unwrap().null_count(), 0);
    }

    #[test]
    fn rare_extremes_below_mass_are_not_flagged() {
        let mut vals: Vec<Value> = (0..999).map(|i| Value::Text((i % 50).to_string())).collect();
        vals.push(Value::text("100000"));
        let t = table(vec![Column::new("x", vals)]);
        let opts = NaOptions {
            detect_sentinels: true,
            ..Default::default()
        };
        // one row out of 1000 is 0.1% < 0.5%
        assert!(normalize_missing(&t, &opts).1.sentinels.is_empty());
    }

    proptest::proptest! {
        #[test]
        fn normalization_preserves_shape_and_only_adds_nulls(
            cells in proptest::collection::vec(
                proptest::option::of("(NA|na|null|x|1|2.5|)"), 1..40)
        ) {
            let t = table(vec![Column::from_strs("c", &cells)]);
            let (n, _) = normalize_missing(&t, &NaOptions::default());
            proptest::prop_assert_eq!(n.row_count(), t.row_count());
            proptest::prop_assert_eq!(n.column_names(), t.column_names());
            proptest::prop_assert!(
                n.column("c").unwrap().null_count() >= t.column("c").unwrap().null_count()
            );
        }
    }
}
