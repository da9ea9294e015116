//! Columnar data model shared by every stage.

use std::borrow::Cow;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// A single cell.
///
/// Freshly loaded tables hold only `Text` and (after missing-value
/// normalization) `Null`; typing into `Integer`/`Real` is opt-in through
/// [`Table::with_typed_cells`].
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Value {
    #[default]
    Null,
    Integer(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn text(s: impl Into<String>) -> Self {
        Value::Text(s.into())
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Numeric reading of the cell. Text is trimmed and parsed; non-finite
    /// results are rejected.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Null => None,
            Value::Integer(i) => Some(*i as f64),
            Value::Real(r) => r.is_finite().then_some(*r),
            Value::Text(s) => parse_finite(s),
        }
    }

    /// Textual rendering; `None` for `Null`.
    pub fn as_text(&self) -> Option<Cow<'_, str>> {
        match self {
            Value::Null => None,
            Value::Integer(i) => Some(Cow::Owned(i.to_string())),
            Value::Real(r) => Some(Cow::Owned(r.to_string())),
            Value::Text(s) => Some(Cow::Borrowed(s.as_str())),
        }
    }
}

pub(crate) fn parse_finite(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    // `inf`/`nan` spellings parse as f64 but are not numbers for our purposes.
    if !t.bytes().any(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Null => {}
            Value::Integer(i) => i.hash(state),
            Value::Real(r) => r.to_bits().hash(state),
            Value::Text(s) => s.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Integer(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Value>,
}

impl Column {
    pub fn new(name: impl Into<String>, values: Vec<Value>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }

    /// Builds a text column; `None` entries become `Null`.
    pub fn from_strs<S: AsRef<str>>(name: impl Into<String>, values: &[Option<S>]) -> Self {
        let values = values
            .iter()
            .map(|v| match v {
                Some(s) => Value::Text(s.as_ref().to_string()),
                None => Value::Null,
            })
            .collect();
        Self::new(name, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn null_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_null()).count()
    }
}

/// A rectangular, immutable-by-convention table with unique column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    row_count: usize,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<Column>) -> Result<Self> {
        let row_count = columns.first().map_or(0, Column::len);
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(Error::DuplicateHeader(c.name.clone()));
            }
            if c.len() != row_count {
                return Err(Error::RaggedRow {
                    row: row_count.min(c.len()),
                    expected: row_count,
                    found: c.len(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            columns,
            row_count,
        })
    }

    /// An empty-bodied table with the given header.
    pub fn with_header(name: impl Into<String>, header: &[&str]) -> Result<Self> {
        let cols = header.iter().map(|h| Column::new(*h, Vec::new())).collect();
        Self::new(name, cols)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn require_column(&self, name: &str) -> Result<&Column> {
        self.column(name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// Copy of the table with each column replaced by `f(column)`.
    pub fn map_columns(&self, mut f: impl FnMut(&Column) -> Column) -> Self {
        let columns = self.columns.iter().map(&mut f).collect();
        Self {
            name: self.name.clone(),
            columns,
            row_count: self.row_count,
        }
    }

    /// Copy of the table without the named columns.
    pub fn without_columns(&self, names: &[&str]) -> Self {
        Self {
            name: self.name.clone(),
            columns: self
                .columns
                .iter()
                .filter(|c| !names.contains(&c.name.as_str()))
                .cloned()
                .collect(),
            row_count: self.row_count,
        }
    }

    /// Converts text cells of the given columns to `Integer`/`Real` when they
    /// parse; non-parsing cells stay as text.
    pub fn with_typed_cells(&self, numeric_columns: &[&str]) -> Self {
        self.map_columns(|c| {
            if !numeric_columns.contains(&c.name.as_str()) {
                return c.clone();
            }
            let values = c
                .values
                .iter()
                .map(|v| match v {
                    Value::Text(s) => {
                        let t = s.trim();
                        if let Ok(i) = t.parse::<i64>() {
                            Value::Integer(i)
                        } else if let Some(r) = parse_finite(t) {
                            Value::Real(r)
                        } else {
                            v.clone()
                        }
                    }
                    other => other.clone(),
                })
                .collect();
            Column::new(c.name.clone(), values)
        })
    }
}

/// A named collection of tables. Columns that are equivalent across tables
/// share a name; that convention is the only link between tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    tables: Vec<Table>,
}

impl Dataset {
    pub fn new(tables: Vec<Table>) -> Result<Self> {
        for (i, t) in tables.iter().enumerate() {
            if tables[..i].iter().any(|o| o.name() == t.name()) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate table name `{}`",
                    t.name()
                )));
            }
        }
        Ok(Self { tables })
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name() == name)
    }

    pub fn tables_with_column<'a>(&'a self, column: &'a str) -> impl Iterator<Item = &'a Table> {
        self.tables.iter().filter(move |t| t.column(column).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_is_not_empty_text() {
        assert_ne!(Value::Null, Value::text(""));
        assert!(Value::text("").as_text().is_some());
        assert!(Value::Null.as_text().is_none());
    }

    #[test]
    fn numeric_reading_rejects_non_numbers() {
        assert_eq!(Value::text(" 42 ").as_f64(), Some(42.0));
        assert_eq!(Value::text("inf").as_f64(), None);
        assert_eq!(Value::text("NaN").as_f64(), None);
        assert_eq!(Value::text("$15").as_f64(), None);
        assert_eq!(Value::Integer(-3).as_f64(), Some(-3.0));
    }

    #[test]
    fn rejects_duplicate_and_ragged_columns() {
        let a = Column::from_strs("a", &[Some("1")]);
        let a2 = Column::from_strs("a", &[Some("2")]);
        assert!(matches!(
            Table::new("t", vec![a.clone(), a2]),
            Err(Error::DuplicateHeader(_))
        ));
        let b = Column::from_strs::<&str>("b", &[]);
        assert!(matches!(
            Table::new("t", vec![a, b]),
            Err(Error::RaggedRow { .. })
        ));
    }

    #[test]
    fn typed_cells_keep_dirty_text() {
        let t = Table::new(
            "t",
            vec![Column::from_strs("x", &[Some("1"), Some("2.5"), Some("A1")])],
        )
        .unwrap();
        let typed = t.with_typed_cells(&["x"]);
        assert_eq!(
            typed.column("x").unwrap().values,
            vec![Value::Integer(1), Value::Real(2.5), Value::text("A1")]
        );
    }
}
