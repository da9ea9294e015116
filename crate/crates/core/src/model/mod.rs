//! Model building: preparation, pre-filtering, greedy CV selection, random
//! hyper-parameter search and held-out evaluation.

pub mod learner;
pub mod metrics;
pub mod prefilter;
pub mod prepare;
pub mod search;
pub mod select;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use learner::{FittedModel, LearnerSpec};
pub use metrics::{evaluate, TestMetrics};
pub use prefilter::{prefilter_features, Candidate};
pub use prepare::{prepare_training, ColumnPrep, DenseSet, PrepConfig, Preparation, TrainingSet};
pub use search::{random_search_fit, LearnerKind, SearchSpace, Trial};
pub use select::{greedy_select_cv, SelectConfig, Selection, TraceStep};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::report;
use crate::table::{Dataset, Value};

/// Reads a binary label cell: `1/0`, `true/false`, `yes/no`, `y/n`, `t/f`
/// (case-insensitive, trimmed).
pub fn parse_label(v: &Value) -> Option<bool> {
    let s = v.as_text()?;
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "1.0" | "true" | "yes" | "y" | "t" => Some(true),
        "0" | "0.0" | "false" | "no" | "n" | "f" => Some(false),
        _ => None,
    }
}

/// Label per matrix key, read from the first table holding both the anchor
/// and `label` columns; the first non-null label seen for a key wins.
pub fn anchor_labels(dataset: &Dataset, matrix: &FeatureMatrix, label: &str) -> Result<Vec<Option<bool>>> {
    let table = dataset
        .tables_with_column(label)
        .find(|t| t.column(&matrix.anchor).is_some())
        .ok_or_else(|| Error::UnknownColumn(label.to_string()))?;
    let keys = &table.require_column(&matrix.anchor)?.values;
    let vals = &table.require_column(label)?.values;
    let mut by_key = std::collections::HashMap::new();
    for (k, v) in keys.iter().zip(vals) {
        if k.is_null() || v.is_null() {
            continue;
        }
        let l = parse_label(v)
            .ok_or_else(|| Error::InvalidConfig(format!("label `{label}` has non-binary value `{v}`")))?;
        by_key.entry(k.to_string()).or_insert(l);
    }
    Ok(matrix.keys.iter().map(|k| by_key.get(&k.to_string()).copied()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub prep: PrepConfig,
    pub max_features: usize,
    pub redundancy_threshold: f64,
    pub select: SelectConfig,
    /// Learner used inside the selection loop.
    pub selection_learner: LearnerSpec,
    pub search: SearchSpace,
    pub budget: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            prep: PrepConfig::default(),
            max_features: 200,
            redundancy_threshold: 0.97,
            select: SelectConfig::default(),
            selection_learner: LearnerSpec::default(),
            search: SearchSpace::default(),
            budget: 20,
        }
    }
}

/// Held-out metrics; `auc` is absent when the test set has one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub auc: Option<f64>,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub selected_features: Vec<String>,
    pub hyperparameters: LearnerSpec,
    pub cv_trace: Vec<TraceStep>,
    pub baseline_cv_score: f64,
    /// Mean CV AUC of the chosen configuration.
    pub cv_score: f64,
    pub trials: Vec<Trial>,
    pub test_metrics: TestReport,
    pub train_rows: usize,
    pub test_rows: usize,
    pub prefiltered: usize,
    pub seed: u64,
}

/// Everything needed to score a new feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub anchor: String,
    pub preparation: Preparation,
    /// Dense column names fed to `model`, in order.
    pub inputs: Vec<String>,
    pub model: FittedModel,
}

impl SavedModel {
    /// Positive-class scores for every row of `matrix`.
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        let rows: Vec<usize> = (0..matrix.keys.len()).collect();
        let dense = self.preparation.transform(matrix, &rows)?;
        let names = self.preparation.output_names();
        let cols = self
            .inputs
            .iter()
            .map(|n| {
                names
                    .iter()
                    .position(|m| m == n)
                    .map(|j| dense[j].as_slice())
                    .ok_or_else(|| Error::UnknownColumn(n.clone()))
            })
            .collect::<Result<Vec<&[f64]>>>()?;
        Ok(self.model.predict(&cols, &rows))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        report::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        report::read_json(path)
    }
}

/// Full model-building run. `labels` is aligned with `matrix.keys`;
/// `systematic` names numeric features from systematically missing columns.
/// The split uses `seed`, folds `seed + 1` and the search `seed + 2`.
pub fn build_model(
    matrix: &FeatureMatrix,
    labels: &[Option<bool>],
    systematic: &BTreeSet<String>,
    config: &ModelConfig,
    seed: u64,
) -> Result<(ModelReport, SavedModel)> {
    if config.prep.folds < 2 {
        return Err(Error::InvalidConfig("folds must be at least 2".into()));
    }
    if config.budget < 1 {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    let (train, test, preparation) = prepare_training(matrix, labels, systematic, &config.prep, seed, seed + 1)?;
    let candidates = prefilter_features(&train, config.max_features, config.redundancy_threshold);
    let selection = greedy_select_cv(&candidates, &train, &config.selection_learner, &config.select);
    let cols: Vec<usize> = selection.selected.iter().map(|c| c.column).collect();
    let result = random_search_fit(&train, &cols, &config.search, config.budget, seed + 2);

    let test_rows: Vec<usize> = (0..test.len()).collect();
    let scores = result.model.predict(&test.column_refs(&cols), &test_rows);
    let test_metrics = match evaluate(&scores, &test.labels) {
        Ok(m) => TestReport {
            auc: Some(m.auc),
            accuracy: m.accuracy,
        },
        Err(Error::SingleClassTest { accuracy }) => TestReport { auc: None, accuracy },
        Err(e) => return Err(e),
    };
    let inputs: Vec<String> = selection.selected.iter().map(|c| c.name.clone()).collect();
    let report = ModelReport {
        selected_features: inputs.clone(),
        hyperparameters: result.trials[result.best].spec.clone(),
        cv_trace: selection.cv_trace,
        baseline_cv_score: selection.baseline,
        cv_score: result.trials[result.best].cv_score,
        trials: result.trials,
        test_metrics,
        train_rows: train.data.len(),
        test_rows: test.len(),
        prefiltered: candidates.len(),
        seed,
    };
    let saved = SavedModel {
        anchor: matrix.anchor.clone(),
        preparation,
        inputs,
        model: result.model,
    };
    Ok((report, saved))
}
