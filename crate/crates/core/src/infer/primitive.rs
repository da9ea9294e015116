//! Two-level primitive type inference with a dirt tolerance.

use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::datetime::{parse_datetime, parse_epoch};
use crate::error::{Error, Result};
use crate::table::{parse_finite, Column};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopLevel {
    Integer,
    Numeric,
    String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubLevel {
    Boolean,
    Byte,
    Short,
    Int,
    Long,
    Float,
    Double,
    Datetime,
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeTag {
    #[serde(rename = "type")]
    pub top_level: TopLevel,
    #[serde(rename = "subtype")]
    pub sub_level: SubLevel,
}

impl TypeTag {
    pub const PLAIN: TypeTag = TypeTag {
        top_level: TopLevel::String,
        sub_level: SubLevel::Plain,
    };

    pub fn new(sub_level: SubLevel) -> Self {
        let top_level = match sub_level {
            SubLevel::Boolean | SubLevel::Byte | SubLevel::Short | SubLevel::Int | SubLevel::Long => {
                TopLevel::Integer
            }
            SubLevel::Float | SubLevel::Double => TopLevel::Numeric,
            SubLevel::Datetime | SubLevel::Plain => TopLevel::String,
        };
        Self {
            top_level,
            sub_level,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.top_level, TopLevel::Integer | TopLevel::Numeric)
    }

    pub fn is_datetime(&self) -> bool {
        self.sub_level == SubLevel::Datetime
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top = match self.top_level {
            TopLevel::Integer => "integer",
            TopLevel::Numeric => "numeric",
            TopLevel::String => "string",
        };
        let sub = serde_json::to_value(self.sub_level)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        write!(f, "{top}/{sub}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveInference {
    pub tag: TypeTag,
    pub conformance: f64,
    pub dirty_rows: Vec<usize>,
}

/// Returns the most specific type whose conformance over non-Null cells is at
/// least `1 - dirt_tolerance`.
///
/// Order: boolean, byte, short, int, long, double, datetime, plain. Inference
/// never emits `float`: a decimal column is always `double`. With
/// `epoch_seconds`, ten-digit epoch timestamps are tested before the integer
/// types so they are not swallowed by `long`.
pub fn infer_primitive_type(
    column: &Column,
    dirt_tolerance: f64,
    epoch_seconds: bool,
) -> Result<PrimitiveInference> {
    let cells: Vec<(usize, Cow<str>)> = column
        .values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.as_text().map(|s| (i, s)))
        .collect();
    if cells.is_empty() {
        return Err(Error::AllMissing(column.name.clone()));
    }
    let needed = 1.0 - dirt_tolerance;
    let n = cells.len() as f64;
    let attempt = |sub: SubLevel, pred: &dyn Fn(&str) -> bool| -> Option<PrimitiveInference> {
        let dirty: Vec<usize> = cells
            .iter()
            .filter(|(_, s)| !pred(s))
            .map(|(i, _)| *i)
            .collect();
        let conformance = 1.0 - dirty.len() as f64 / n;
        (conformance >= needed - 1e-12).then(|| PrimitiveInference {
            tag: TypeTag::new(sub),
            conformance,
            dirty_rows: dirty,
        })
    };

    if epoch_seconds {
        if let Some(r) = attempt(SubLevel::Datetime, &|s| parse_epoch(s.trim()).is_some()) {
            return Ok(r);
        }
    }
    let int_in = |lo: i64, hi: i64| move |s: &str| parse_int(s).is_some_and(|v| (lo..=hi).contains(&v));
    let ladder: [(SubLevel, &dyn Fn(&str) -> bool); 7] = [
        (SubLevel::Boolean, &is_boolean),
        (SubLevel::Byte, &int_in(i8::MIN.into(), i8::MAX.into())),
        (SubLevel::Short, &int_in(i16::MIN.into(), i16::MAX.into())),
        (SubLevel::Int, &int_in(i32::MIN.into(), i32::MAX.into())),
        (SubLevel::Long, &|s| parse_int(s).is_some()),
        (SubLevel::Double, &|s| parse_finite(s).is_some()),
        (SubLevel::Datetime, &|s| parse_datetime(s, epoch_seconds).is_some()),
    ];
    for (sub, pred) in ladder {
        if let Some(r) = attempt(sub, pred) {
            return Ok(r);
        }
    }
    Ok(PrimitiveInference {
        tag: TypeTag::PLAIN,
        conformance: 1.0,
        dirty_rows: Vec::new(),
    })
}

pub(crate) fn parse_int(s: &str) -> Option<i64> {
    s.trim().parse::<i64>().ok()
}

fn is_boolean(s: &str) -> bool {
    let t = s.trim();
    t == "0" || t == "1" || t.eq_ignore_ascii_case("true") || t.eq_ignore_ascii_case("false")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Value;

    fn col(vals: &[&str]) -> Column {
        Column::new("c", vals.iter().map(|s| Value::text(*s)).collect())
    }

    #[test]
    fn integer_ids_with_one_dirty_entry() {
        let mut vals: Vec<String> = (0..99).map(|i| (3_000_000_000i64 + i).to_string()).collect();
        vals.insert(0, "A1".into());
        let c = Column::new("customerID", vals.into_iter().map(Value::Text).collect());
        let r = infer_primitive_type(&c, 0.02, false).unwrap();
        assert_eq!(r.tag, TypeTag::new(SubLevel::Long));
        assert!((r.conformance - 0.99).abs() < 1e-12);
        assert_eq!(r.dirty_rows, vec![0]);
    }

    #[test]
    fn ladder_picks_narrowest_integer() {
        let t = |v: &[&str]| infer_primitive_type(&col(v), 0.0, false).unwrap().tag.sub_level;
        assert_eq!(t(&["0", "1", "1"]), SubLevel::Boolean);
        assert_eq!(t(&["true", "FALSE"]), SubLevel::Boolean);
        assert_eq!(t(&["5", "-100"]), SubLevel::Byte);
        assert_eq!(t(&["5", "1000"]), SubLevel::Short);
        assert_eq!(t(&["5", "100000"]), SubLevel::Int);
        assert_eq!(t(&["5", "10000000000"]), SubLevel::Long);
        assert_eq!(t(&["1.5", "2.25", "3.0"]), SubLevel::Double);
        assert_eq!(t(&["2019-01-02", "2019-01-03 10:00:00"]), SubLevel::Datetime);
        assert_eq!(t(&["day 1", "day 2"]), SubLevel::Plain);
    }

    #[test]
    fn datetime_column_conforms_fully() {
        let c = col(&["2019-01-02 10:00:00"; 50]);
        let r = infer_primitive_type(&c, 0.02, false).unwrap();
        assert_eq!(r.tag, TypeTag::new(SubLevel::Datetime));
        assert_eq!(r.conformance, 1.0);
        assert!(r.dirty_rows.is_empty());
    }

    #[test]
    fn epoch_flag_turns_timestamps_into_datetimes() {
        let c = col(&["1546300800", "1546387200", "1546473600"]);
        assert_eq!(
            infer_primitive_type(&c, 0.0, false).unwrap().tag.sub_level,
            SubLevel::Int
        );
        assert_eq!(
            infer_primitive_type(&c, 0.0, true).unwrap().tag.sub_level,
            SubLevel::Datetime
        );
    }

    #[test]
    fn all_missing_is_an_error() {
        let c = Column::new("c", vec![Value::Null, Value::Null]);
        assert!(matches!(
            infer_primitive_type(&c, 0.02, false),
            Err(Error::AllMissing(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn declared_type_meets_tolerance(
            cells in proptest::collection::vec("(1|2|300|x|2.5|2019-01-01|true)", 1..60),
            tol in 0.0f64..0.3,
        ) {
            let c = Column::new("c", cells.iter().map(|s| Value::text(s.as_str())).collect());
            let r = infer_primitive_type(&c, tol, false).unwrap();
            proptest::prop_assert!(r.conformance >= 1.0 - tol - 1e-12);
            let expected = 1.0 - r.dirty_rows.len() as f64 / cells.len() as f64;
            proptest::prop_assert!((r.conformance - expected).abs() < 1e-12);
        }
    }
}
