//! Transforms applied to a path's terminal column before any aggregation.

use chrono::{Datelike, Timelike};

use crate::infer::datetime::parse_datetime;
use crate::infer::pattern::match_and_extract;
use crate::infer::{ColumnProfile, TypeTag};
use crate::table::Value;

/// Values of one derived stream, aligned with the input cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Stream {
    Numeric(Vec<Option<f64>>),
    Text(Vec<Option<String>>),
}

impl Stream {
    pub fn len(&self) -> usize {
        match self {
            Stream::Numeric(v) => v.len(),
            Stream::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Stream::Numeric(_))
    }

    /// Picks the given positions, in order.
    pub fn select(&self, idx: &[usize]) -> Stream {
        match self {
            Stream::Numeric(v) => Stream::Numeric(idx.iter().map(|&i| v[i]).collect()),
            Stream::Text(v) => Stream::Text(idx.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

pub const DATETIME_PARTS: [&str; 7] = [
    "dt_year",
    "dt_month",
    "dt_day",
    "dt_hour",
    "dt_minute",
    "dt_second",
    "dt_dow",
];

/// One-to-one transforms of a terminal column: datetime components,
/// pattern captures (`part1`, `part2`, ...), or the column itself (no
/// suffix). `as_key` forces a textual identity, used for key columns.
pub fn transform_one_to_one(
    values: &[Value],
    profile: &ColumnProfile,
    epoch_seconds: bool,
    as_key: bool,
) -> Vec<(Option<String>, Stream)> {
    let text = || -> Vec<Option<String>> {
        values
            .iter()
            .map(|v| v.as_text().map(|s| s.into_owned()))
            .collect()
    };
    if as_key {
        return vec![(None, Stream::Text(text()))];
    }
    if profile.type_tag.is_datetime() {
        let parsed: Vec<_> = values
            .iter()
            .map(|v| v.as_text().and_then(|s| parse_datetime(&s, epoch_seconds)))
            .collect();
        return DATETIME_PARTS
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let col = parsed
                    .iter()
                    .map(|d| {
                        d.map(|d| match k {
                            0 => d.year() as f64,
                            1 => d.month() as f64,
                            2 => d.day() as f64,
                            3 => d.hour() as f64,
                            4 => d.minute() as f64,
                            5 => d.second() as f64,
                            _ => d.weekday().num_days_from_monday() as f64,
                        })
                    })
                    .collect();
                (Some(name.to_string()), Stream::Numeric(col))
            })
            .collect();
    }
    if profile.is_numeric() {
        return vec![(None, Stream::Numeric(values.iter().map(|v| profile.numeric_value(v)).collect()))];
    }
    if profile.type_tag == TypeTag::PLAIN {
        if let Some(p) = profile.pattern.as_ref().filter(|p| p.wildcard_count > 0) {
            let caps: Vec<Option<Vec<String>>> = values
                .iter()
                .map(|v| v.as_text().and_then(|s| match_and_extract(p, &s)))
                .collect();
            return (0..p.wildcard_count)
                .map(|k| {
                    let col = caps.iter().map(|c| c.as_ref().map(|c| c[k].clone())).collect();
                    (Some(format!("part{}", k + 1)), Stream::Text(col))
                })
                .collect();
        }
    }
    vec![(None, Stream::Text(text()))]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::{profile_column, ProfileConfig};
    use crate::table::Column;

    #[test]
    fn datetime_components() {
        let vals: Vec<Option<&str>> = vec![Some("2019-03-05 10:20:30"), Some("2020-01-01 00:00:00")];
        let col = Column::from_strs("t", &vals);
        let p = profile_column(&col, &ProfileConfig::default());
        let out = transform_one_to_one(&col.values, &p, false, false);
        assert_eq!(out.len(), 7);
        let firsts: Vec<f64> = out
            .iter()
            .map(|(_, s)| match s {
                Stream::Numeric(v) => v[0].unwrap(),
                _ => unreachable!(),
            })
            .collect();
        // 2019-03-05 was a Tuesday (Monday = 0).
        assert_eq!(firsts, vec![2019.0, 3.0, 5.0, 10.0, 20.0, 30.0, 1.0]);
    }

    #[test]
    fn email_splits_into_three_parts() {
        let vals: Vec<String> = (0..40).map(|i| format!("u{i}@host{}.{}", i % 7, ["com", "org", "edu"][i % 3])).collect();
        let opt: Vec<Option<&str>> = vals.iter().map(|s| Some(s.as_str())).chain([Some("broken")]).collect();
        let col = Column::from_strs("email", &opt);
        let p = profile_column(&col, &ProfileConfig::default());
        let out = transform_one_to_one(&col.values, &p, false, false);
        assert_eq!(out.len(), 3);
        let Stream::Text(v) = &out[1].1 else { panic!("expected text") };
        assert_eq!(v[0].as_deref(), Some("host0"));
        assert_eq!(v[40], None);
    }

    #[test]
    fn numeric_identity() {
        let vals: Vec<Option<String>> = (0..100).map(|i| Some(format!("{}.5", i))).collect();
        let col = Column::from_strs("x", &vals);
        let p = profile_column(&col, &ProfileConfig::default());
        let out = transform_one_to_one(&col.values, &p, false, false);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, None);
        assert!(out[0].1.is_numeric());
    }
}
