//! Train/test split, fold assignment and missingness-aware encoding.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Stream};
use crate::stats;
use crate::table::Value;

pub const MISSING_CATEGORY: &str = "MISSING";
pub const MISSING_SUFFIX: &str = "__is_missing";

/// How one feature becomes dense columns; statistics come from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case")]
pub enum ColumnPrep {
    /// Nulls filled with the training median.
    Numeric { feature: String, median: f64 },
    /// Systematically missing: constant fill plus a `__is_missing` indicator.
    Systematic { feature: String, fill: f64 },
    /// One-hot over the frozen vocabulary; Null is the `MISSING` category and
    /// unseen categories encode as all zeros.
    Nominal { feature: String, categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Preparation {
    pub columns: Vec<ColumnPrep>,
}

impl Preparation {
    /// Freezes encodings on `train` rows. Numeric features listed in
    /// `systematic` get the indicator treatment.
    pub fn fit(matrix: &FeatureMatrix, train: &[usize], systematic: &BTreeSet<String>, max_categories: usize) -> Self {
        let columns = matrix
            .features
            .iter()
            .map(|f| match &f.values {
                Stream::Numeric(_) if systematic.contains(&f.name) => ColumnPrep::Systematic {
                    feature: f.name.clone(),
                    fill: 0.0,
                },
                Stream::Numeric(v) => {
                    let present: Vec<f64> = train.iter().filter_map(|&r| v[r]).collect();
                    ColumnPrep::Numeric {
                        feature: f.name.clone(),
                        median: stats::median(&present).unwrap_or(0.0),
                    }
                }
                Stream::Text(v) => {
                    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                    for &r in train {
                        *counts.entry(v[r].as_deref().unwrap_or(MISSING_CATEGORY)).or_default() += 1;
                    }
                    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
                    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
                    ColumnPrep::Nominal {
                        feature: f.name.clone(),
                        categories: ranked
                            .into_iter()
                            .take(max_categories)
                            .map(|(c, _)| c.to_string())
                            .collect(),
                    }
                }
            })
            .collect();
        Self { columns }
    }

    pub fn output_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.columns {
            match c {
                ColumnPrep::Numeric { feature, .. } => out.push(feature.clone()),
                ColumnPrep::Systematic { feature, .. } => {
                    out.push(feature.clone());
                    out.push(format!("{feature}{MISSING_SUFFIX}"));
                }
                ColumnPrep::Nominal { feature, categories } => {
                    out.extend(categories.iter().map(|k| format!("{feature}={k}")))
                }
            }
        }
        out
    }

    /// Dense column-major encoding of `rows`.
    pub fn transform(&self, matrix: &FeatureMatrix, rows: &[usize]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for c in &self.columns {
            let (ColumnPrep::Numeric { feature, .. }
            | ColumnPrep::Systematic { feature, .. }
            | ColumnPrep::Nominal { feature, .. }) = c;
            let f = matrix
                .feature(feature)
                .ok_or_else(|| Error::UnknownColumn(feature.clone()))?;
            match (c, &f.values) {
                (ColumnPrep::Numeric { median, .. }, Stream::Numeric(v)) => {
                    out.push(rows.iter().map(|&r| v[r].unwrap_or(*median)).collect())
                }
                (ColumnPrep::Systematic { fill, .. }, Stream::Numeric(v)) => {
                    out.push(rows.iter().map(|&r| v[r].unwrap_or(*fill)).collect());
                    out.push(rows.iter().map(|&r| v[r].is_none() as u8 as f64).collect());
                }
                (ColumnPrep::Nominal { categories, .. }, Stream::Text(v)) => {
                    for k in categories {
                        out.push(
                            rows.iter()
                                .map(|&r| (v[r].as_deref().unwrap_or(MISSING_CATEGORY) == k) as u8 as f64)
                                .collect(),
                        );
                    }
                }
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "feature `{feature}` changed kind since the encoding was fitted"
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// Dense rows with names, keys and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSet {
    pub keys: Vec<Value>,
    pub labels: Vec<bool>,
    pub names: Vec<String>,
    /// Column-major.
    pub columns: Vec<Vec<f64>>,
}

impl DenseSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn column_refs(&self, idx: &[usize]) -> Vec<&[f64]> {
        idx.iter().map(|&j| self.columns[j].as_slice()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub data: DenseSet,
    pub folds: Vec<usize>,
    pub n_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrepConfig {
    pub split_ratio: f64,
    pub folds: usize,
    pub max_categories: usize,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            split_ratio: 0.8,
            folds: 5,
            max_categories: 20,
        }
    }
}

fn key_order(keys: &[Value], idx: &mut [usize]) {
    idx.sort_by(|&a, &b| keys[a].to_string().cmp(&keys[b].to_string()).then(a.cmp(&b)));
}

/// Per-class shuffled index lists (negatives first), each sorted by key
/// before shuffling so the result depends only on keys, labels and seed.
fn shuffled_classes(keys: &[Value], labels: &[bool], rows: &[usize], rng: &mut ChaCha8Rng) -> [Vec<usize>; 2] {
    let mut classes = [Vec::new(), Vec::new()];
    for &r in rows {
        classes[labels[r] as usize].push(r);
    }
    for c in &mut classes {
        key_order(keys, c);
        c.shuffle(rng);
    }
    classes
}

/// Stratified split; returns `(train, test)` row indices in key order.
pub fn stratified_split(keys: &[Value], labels: &[bool], ratio: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..labels.len()).collect();
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for class in shuffled_classes(keys, labels, &all, &mut rng) {
        let k = (ratio * class.len() as f64).round() as usize;
        train.extend_from_slice(&class[..k]);
        test.extend_from_slice(&class[k..]);
    }
    key_order(keys, &mut train);
    key_order(keys, &mut test);
    (train, test)
}

/// Stratified fold ids: each class is dealt round-robin, continuing the
/// count across classes so fold sizes stay balanced.
pub fn assign_folds(keys: &[Value], labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..labels.len()).collect();
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in shuffled_classes(keys, labels, &all, &mut rng) {
        for r in class {
            folds[r] = next % k;
            next += 1;
        }
    }
    folds
}

/// Label per anchor key; `None` entries are keys without a label.
pub fn check_labels(keys: &[Value], labels: &[Option<bool>]) -> Result<Vec<bool>> {
    let out = keys
        .iter()
        .zip(labels)
        .map(|(k, l)| l.ok_or_else(|| Error::LabelMismatch(k.to_string())))
        .collect::<Result<Vec<bool>>>()?;
    let pos = out.iter().filter(|&&l| l).count();
    if pos == 0 || pos == out.len() {
        return Err(Error::DegenerateLabel);
    }
    Ok(out)
}

/// Splits, fits the encoding on training rows and encodes both sides.
pub fn prepare_training(
    matrix: &FeatureMatrix,
    labels: &[Option<bool>],
    systematic: &BTreeSet<String>,
    config: &PrepConfig,
    split_seed: u64,
    fold_seed: u64,
) -> Result<(TrainingSet, DenseSet, Preparation)> {
    if labels.len() != matrix.keys.len() {
        return Err(Error::LabelMismatch(format!(
            "{} labels for {} keys",
            labels.len(),
            matrix.keys.len()
        )));
    }
    let labels = check_labels(&matrix.keys, labels)?;
    let (train, test) = stratified_split(&matrix.keys, &labels, config.split_ratio, split_seed);
    let prep = Preparation::fit(matrix, &train, systematic, config.max_categories);
    let names = prep.output_names();
    let dense = |rows: &[usize]| -> Result<DenseSet> {
        Ok(DenseSet {
            keys: rows.iter().map(|&r| matrix.keys[r].clone()).collect(),
            labels: rows.iter().map(|&r| labels[r]).collect(),
            names: names.clone(),
            columns: prep.transform(matrix, rows)?,
        })
    };
    let train_set = dense(&train)?;
    let folds = assign_folds(&train_set.keys, &train_set.labels, config.folds, fold_seed);
    Ok((
        TrainingSet {
            data: train_set,
            folds,
            n_folds: config.folds,
        },
        dense(&test)?,
        prep,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{FeatureColumn, FeatureKind, Lineage};

    fn matrix(features: Vec<(&str, Stream)>) -> FeatureMatrix {
        let n = features[0].1.len();
        FeatureMatrix {
            anchor: "id".into(),
            keys: (0..n).map(|i| Value::text(format!("{i:04}"))).collect(),
            features: features
                .into_iter()
                .map(|(name, values)| FeatureColumn {
                    name: name.into(),
                    lineage: Lineage {
                        path: name.into(),
                        steps: Vec::new(),
                        transform: None,
                        aggregators: Vec::new(),
                        kind: if values.is_numeric() { FeatureKind::Numeric } else { FeatureKind::Nominal },
                    },
                    values,
                })
                .collect(),
        }
    }

    #[test]
    fn split_is_stratified() {
        let keys: Vec<Value> = (0..1000).map(|i| Value::text(i.to_string())).collect();
        let labels: Vec<bool> = (0..1000).map(|i| i % 10 < 3).collect();
        let (train, test) = stratified_split(&keys, &labels, 0.8, 9);
        assert_eq!(train.len() + test.len(), 1000);
        let rate = test.iter().filter(|&&r| labels[r]).count() as f64 / test.len() as f64;
        assert!((0.28..=0.32).contains(&rate), "{rate}");
        let folds = assign_folds(&keys, &labels, 5, 1);
        for f in 0..5 {
            let rows: Vec<usize> = (0..1000).filter(|&r| folds[r] == f).collect();
            let rate = rows.iter().filter(|&&r| labels[r]).count() as f64 / rows.len() as f64;
            assert!((rate - 0.3).abs() <= 0.02, "{rate}");
        }
    }

    #[test]
    fn folds_depend_only_on_keys_labels_seed() {
        let keys: Vec<Value> = (0..50).map(|i| Value::text(i.to_string())).collect();
        let labels: Vec<bool> = (0..50).map(|i| i % 3 == 0).collect();
        let a = assign_folds(&keys, &labels, 5, 4);
        let mut perm: Vec<usize> = (0..50).rev().collect();
        perm.rotate_left(7);
        let pk: Vec<Value> = perm.iter().map(|&i| keys[i].clone()).collect();
        let pl: Vec<bool> = perm.iter().map(|&i| labels[i]).collect();
        let b = assign_folds(&pk, &pl, 5, 4);
        for (j, &i) in perm.iter().enumerate() {
            assert_eq!(a[i], b[j]);
        }
    }

    #[test]
    fn median_fill_indicator_and_one_hot() {
        let m = matrix(vec![
            ("x", Stream::Numeric(vec![Some(1.0), Some(2.0), Some(3.0), None])),
            ("w", Stream::Numeric(vec![Some(5.0), None, Some(7.0), None])),
            ("c", Stream::Text(vec![Some("a".into()), None, Some("a".into()), Some("b".into())])),
        ]);
        let rows = [0, 1, 2, 3];
        let prep = Preparation::fit(&m, &rows, &BTreeSet::from(["w".to_string()]), 20);
        assert_eq!(prep.output_names(), vec!["x", "w", "w__is_missing", "c=a", "c=MISSING", "c=b"]);
        let d = prep.transform(&m, &rows).unwrap();
        assert_eq!(d[0], vec![1.0, 2.0, 3.0, 2.0]);
        assert_eq!(d[1], vec![5.0, 0.0, 7.0, 0.0]);
        assert_eq!(d[2], vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(d[3], vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn label_errors() {
        let keys = vec![Value::text("a"), Value::text("b")];
        assert_eq!(check_labels(&keys, &[Some(true), None]).unwrap_err().code(), "LabelMismatch");
        assert_eq!(check_labels(&keys, &[Some(true), Some(true)]).unwrap_err().code(), "DegenerateLabel");
    }
}
