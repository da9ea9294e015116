//! Group aggregators.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Min,
    Max,
    Mean,
    Std,
    Count,
    Sum,
    DistinctCount,
}

impl Aggregator {
    pub const NUMERIC: [Aggregator; 6] = [
        Aggregator::Min,
        Aggregator::Max,
        Aggregator::Mean,
        Aggregator::Std,
        Aggregator::Count,
        Aggregator::Sum,
    ];
    pub const NOMINAL: [Aggregator; 2] = [Aggregator::Count, Aggregator::DistinctCount];
    pub const ROLLUP: [Aggregator; 3] = [Aggregator::Min, Aggregator::Max, Aggregator::Mean];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Min => "min",
            Aggregator::Max => "max",
            Aggregator::Mean => "mean",
            Aggregator::Std => "std",
            Aggregator::Count => "count",
            Aggregator::Sum => "sum",
            Aggregator::DistinctCount => "distinct_count",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Aggregator::Min,
            Aggregator::Max,
            Aggregator::Mean,
            Aggregator::Std,
            Aggregator::Count,
            Aggregator::Sum,
            Aggregator::DistinctCount,
        ]
        .into_iter()
        .find(|a| a.name() == s)
    }

    /// Numeric aggregate. Nulls are skipped except by `Count`; an empty or
    /// all-Null group gives Null (count gives the group size).
    pub fn numeric(self, values: &[Option<f64>]) -> Option<f64> {
        let present: Vec<f64> = values.iter().flatten().copied().collect();
        match self {
            Aggregator::Count => Some(values.len() as f64),
            Aggregator::DistinctCount => {
                let d: BTreeSet<u64> = present.iter().map(|v| v.to_bits()).collect();
                Some(d.len() as f64)
            }
            _ if present.is_empty() => None,
            Aggregator::Min => present.iter().copied().reduce(f64::min),
            Aggregator::Max => present.iter().copied().reduce(f64::max),
            Aggregator::Mean => stats::mean(&present),
            Aggregator::Std => stats::std_dev(&present),
            Aggregator::Sum => Some(present.iter().sum()),
        }
    }

    /// Nominal aggregate; only `Count` and `DistinctCount` are defined.
    pub fn nominal(self, values: &[Option<String>]) -> Option<f64> {
        match self {
            Aggregator::Count => Some(values.len() as f64),
            Aggregator::DistinctCount => Some(values.iter().flatten().collect::<BTreeSet<_>>().len() as f64),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_group() {
        let g = [Some(15.0), Some(18.0), Some(32.0)];
        assert_eq!(Aggregator::Min.numeric(&g), Some(15.0));
        assert_eq!(Aggregator::Max.numeric(&g), Some(32.0));
        assert!((Aggregator::Mean.numeric(&g).unwrap() - 65.0 / 3.0).abs() < 1e-9);
        assert_eq!(Aggregator::Count.numeric(&g), Some(3.0));
        assert_eq!(Aggregator::Sum.numeric(&g), Some(65.0));
    }

    #[test]
    fn empty_group() {
        assert_eq!(Aggregator::Count.numeric(&[]), Some(0.0));
        for a in [Aggregator::Min, Aggregator::Max, Aggregator::Mean, Aggregator::Std, Aggregator::Sum] {
            assert_eq!(a.numeric(&[]), None);
        }
    }

    #[test]
    fn nulls_count_but_do_not_aggregate() {
        let g = [Some(2.0), None, Some(4.0)];
        assert_eq!(Aggregator::Count.numeric(&g), Some(3.0));
        assert_eq!(Aggregator::Mean.numeric(&g), Some(3.0));
        assert_eq!(Aggregator::Sum.numeric(&[None]), None);
    }

    #[test]
    fn nominal_group() {
        let g = [Some("web".to_string()), Some("web".to_string()), Some("phone".to_string())];
        assert_eq!(Aggregator::Count.nominal(&g), Some(3.0));
        assert_eq!(Aggregator::DistinctCount.nominal(&g), Some(2.0));
    }
}
