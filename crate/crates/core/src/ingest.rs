//! CSV ingestion and serialization.
//!
//! Every cell is loaded as [`Value::Text`]; typing is left to the
//! type-inference stage. Quoting follows RFC 4180.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Column, Table, Value};

pub const DEFAULT_MAX_CELL_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestOptions {
    pub delimiter: u8,
    pub max_cell_bytes: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            max_cell_bytes: DEFAULT_MAX_CELL_BYTES,
        }
    }
}

/// Loads a CSV file; the table is named after the file stem.
pub fn load_table(path: impl AsRef<Path>, options: &IngestOptions) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "table".to_string());
    read_table(file, name, options)
}

/// Reads CSV from any reader. Ragged rows are reported with their 0-based
/// data-row index (the header is not counted).
pub fn read_table(reader: impl Read, name: impl Into<String>, options: &IngestOptions) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(options.delimiter)
        .from_reader(reader);
    let mut records = rdr.byte_records();

    let header = match records.next() {
        None => return Err(Error::EmptyInput),
        Some(r) => r.map_err(csv_error)?,
    };
    let mut names: Vec<String> = Vec::with_capacity(header.len());
    for (i, field) in header.iter().enumerate() {
        let mut s = String::from_utf8_lossy(field).into_owned();
        if i == 0 {
            if let Some(stripped) = s.strip_prefix('\u{feff}') {
                s = stripped.to_string();
            }
        }
        if names.contains(&s) {
            return Err(Error::DuplicateHeader(s));
        }
        names.push(s);
    }

    let mut columns: Vec<Vec<Value>> = vec![Vec::new(); names.len()];
    for (row, record) in records.enumerate() {
        let record = record.map_err(csv_error)?;
        if record.len() != names.len() {
            return Err(Error::RaggedRow {
                row,
                expected: names.len(),
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            if field.len() > options.max_cell_bytes {
                return Err(Error::CellTooLarge {
                    row,
                    column: names[col].clone(),
                    limit: options.max_cell_bytes,
                });
            }
            columns[col].push(Value::Text(String::from_utf8_lossy(field).into_owned()));
        }
    }

    let columns = names
        .into_iter()
        .zip(columns)
        .map(|(n, v)| Column::new(n, v))
        .collect();
    Table::new(name, columns)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Csv(e.to_string())
}

/// Writes a table as CSV. `Null` cells are written as empty fields.
pub fn write_table(table: &Table, writer: impl Write, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(writer);
    w.write_record(table.column_names()).map_err(csv_error)?;
    let mut record: Vec<String> = Vec::with_capacity(table.columns().len());
    for row in 0..table.row_count() {
        record.clear();
        record.extend(table.columns().iter().map(|c| c.values[row].to_string()));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_table(table: &Table, path: impl AsRef<Path>, delimiter: u8) -> Result<()> {
    let file = File::create(path)?;
    write_table(table, std::io::BufWriter::new(file), delimiter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CUSTOMER: &str = "customerID,email,fullname,phoneno,age\n\
        A1,jw@gmail.com,John Smith,908-544-2331,45\n\
        2,em@gmail.com,NA,NA,NA\n\
        3,cb@rutgers.edu,Emma Baker,732-548-2331,40\n\
        4,as@yahoo.com,NA,NA,NA\n";

    fn read(s: &str) -> Result<Table> {
        read_table(s.as_bytes(), "t", &IngestOptions::default())
    }

    #[test]
    fn loads_customer_sample() {
        let t = read(CUSTOMER).unwrap();
        assert_eq!(t.columns().len(), 5);
        assert_eq!(t.row_count(), 4);
        assert_eq!(
            t.column("email").unwrap().values[2],
            Value::text("cb@rutgers.edu")
        );
    }

    #[test]
    fn header_only_gives_zero_rows() {
        let t = read("a,b,c\n").unwrap();
        assert_eq!(t.row_count(), 0);
        assert_eq!(t.column_names(), vec!["a", "b", "c"]);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(read(""), Err(Error::EmptyInput)));
    }

    #[test]
    fn ragged_row_names_its_index() {
        let err = read("a,b,c,d,e\n1,2,3,4,5\n1,2,3,4\n").unwrap_err();
        match err {
            Error::RaggedRow { row, expected, found } => {
                assert_eq!((row, expected, found), (1, 5, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_header_is_rejected() {
        assert!(matches!(read("a,b,a\n"), Err(Error::DuplicateHeader(h)) if h == "a"));
    }

    #[test]
    fn oversized_cell_is_rejected() {
        let opts = IngestOptions {
            max_cell_bytes: 4,
            ..Default::default()
        };
        let err = read_table("a\nhello\n".as_bytes(), "t", &opts).unwrap_err();
        assert!(matches!(err, Error::CellTooLarge { row: 0, .. }));
    }

    #[test]
    fn quoted_fields_and_custom_delimiter() {
        let t = read("a,b\n\"x, y\",\"say \"\"hi\"\"\"\n").unwrap();
        assert_eq!(t.column("a").unwrap().values[0], Value::text("x, y"));
        assert_eq!(t.column("b").unwrap().values[0], Value::text("say \"hi\""));

        let opts = IngestOptions {
            delimiter: b';',
            ..Default::default()
        };
        let t = read_table("a;b\n1,5;2\n".as_bytes(), "t", &opts).unwrap();
        assert_eq!(t.column("a").unwrap().values[0], Value::text("1,5"));
    }

    #[test]
    fn missing_file_is_reported() {
        let err = load_table("/definitely/not/here.csv", &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, Error::FileNotFound(_)));
    }

    proptest! {
        #[test]
        fn load_write_load_is_idempotent(
            rows in prop::collection::vec(
                prop::collection::vec("[a-z0-9 ,\"\n-]{0,6}", 3),
                0..12,
            )
        ) {
            let cols: Vec<Column> = (0..3)
                .map(|c| Column::new(
                    format!("c{c}"),
                    rows.iter().map(|r| Value::Text(r[c].clone())).collect(),
                ))
                .collect();
            let original = Table::new("t", cols).unwrap();
            let mut buf = Vec::new();
            write_table(&original, &mut buf, b',').unwrap();
            let once = read_table(buf.as_slice(), "t", &IngestOptions::default()).unwrap();
            let mut buf2 = Vec::new();
            write_table(&once, &mut buf2, b',').unwrap();
            let twice = read_table(buf2.as_slice(), "t", &IngestOptions::default()).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once.row_count(), original.row_count());
        }
    }
}
