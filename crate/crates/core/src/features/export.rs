//! Feature matrix CSV plus JSON lineage sidecar.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureColumn, FeatureKind, FeatureMatrix, Lineage, Stream};
use crate::error::{Error, Result};
use crate::ingest::{load_table, IngestOptions};
use crate::report;
use crate::table::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageEntry {
    pub name: String,
    #[serde(flatten)]
    pub lineage: Lineage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageFile {
    pub anchor: String,
    pub features: Vec<LineageEntry>,
}

impl FeatureMatrix {
    pub fn lineage(&self) -> LineageFile {
        LineageFile {
            anchor: self.anchor.clone(),
            features: self
                .features
                .iter()
                .map(|f| LineageEntry {
                    name: f.name.clone(),
                    lineage: f.lineage.clone(),
                })
                .collect(),
        }
    }

    /// Header `anchor, feature...`; Null cells are empty.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![self.anchor.as_str()];
        header.extend(self.names());
        w.write_record(&header).map_err(|e| Error::Csv(e.to_string()))?;
        for (r, key) in self.keys.iter().enumerate() {
            let mut rec = vec![key.to_string()];
            for f in &self.features {
                rec.push(match &f.values {
                    Stream::Numeric(v) => v[r].map(|x| x.to_string()).unwrap_or_default(),
                    Stream::Text(v) => v[r].clone().unwrap_or_default(),
                });
            }
            w.write_record(&rec).map_err(|e| Error::Csv(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Csv(e.to_string()))
    }
}

pub fn write_feature_matrix(matrix: &FeatureMatrix, csv_path: &Path, lineage_path: &Path) -> Result<()> {
    std::fs::write(csv_path, matrix.to_csv()?)?;
    report::write_json(lineage_path, &matrix.lineage())?;
    Ok(())
}

/// Reads a matrix written by [`write_feature_matrix`]. Columns absent from
/// the lineage file are typed numeric when every non-empty cell parses.
pub fn read_feature_matrix(csv_path: &Path, lineage_path: Option<&Path>) -> Result<FeatureMatrix> {
    let table = load_table(csv_path, &IngestOptions::default())?;
    let lineage: Option<LineageFile> = lineage_path.map(report::read_json).transpose()?;
    let mut cols = table.columns().iter();
    let anchor = cols.next().ok_or(Error::EmptyInput)?;
    let cell = |v: &Value| v.as_text().map(|s| s.into_owned()).filter(|s| !s.is_empty());
    let features = cols
        .map(|c| {
            let entry = lineage
                .as_ref()
                .and_then(|l| l.features.iter().find(|e| e.name == c.name));
            let kind = match entry {
                Some(e) => e.lineage.kind,
                None if c.values.iter().all(|v| cell(v).is_none() || v.as_f64().is_some()) => FeatureKind::Numeric,
                None => FeatureKind::Nominal,
            };
            let values = match kind {
                FeatureKind::Numeric => Stream::Numeric(c.values.iter().map(Value::as_f64).collect()),
                FeatureKind::Nominal => Stream::Text(c.values.iter().map(cell).collect()),
            };
            FeatureColumn {
                name: c.name.clone(),
                values,
                lineage: entry.map(|e| e.lineage.clone()).unwrap_or(Lineage {
                    path: c.name.clone(),
                    steps: Vec::new(),
                    transform: None,
                    aggregators: Vec::new(),
                    kind,
                }),
            }
        })
        .collect();
    Ok(FeatureMatrix {
        anchor: anchor.name.clone(),
        keys: anchor.values.iter().map(|v| cell(v).map(Value::Text).unwrap_or(Value::Null)).collect(),
        features,
    })
}
