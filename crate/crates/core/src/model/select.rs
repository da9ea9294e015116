//! Greedy forward feature selection by cross-validated AUC.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::learner::{fit, LearnerSpec};
use super::prefilter::Candidate;
use super::prepare::TrainingSet;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectConfig {
    pub min_gain: f64,
    pub max_selected: usize,
    /// Family-wise level of the per-round improvement test.
    pub alpha: f64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self {
            min_gain: 1e-4,
            max_selected: 50,
            alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub feature: String,
    pub score: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub selected: Vec<Candidate>,
    pub cv_trace: Vec<TraceStep>,
    /// Mean CV AUC of the empty model.
    pub baseline: f64,
}

/// Per-fold validation AUC (0.5 where a fold has one class) of `spec`
/// trained on the other folds using columns `cols`.
pub fn cv_scores(train: &TrainingSet, cols: &[usize], spec: &LearnerSpec) -> Vec<f64> {
    let d = &train.data;
    let columns = d.column_refs(cols);
    (0..train.n_folds)
        .map(|f| {
            let (fit_rows, val_rows): (Vec<usize>, Vec<usize>) = (0..d.len()).partition(|&r| train.folds[r] != f);
            if val_rows.is_empty() || fit_rows.is_empty() {
                return 0.5;
            }
            let model = fit(spec, &columns, &fit_rows, &d.labels);
            let scores = model.predict(&columns, &val_rows);
            let labels: Vec<bool> = val_rows.iter().map(|&r| d.labels[r]).collect();
            stats::auc(&scores, &labels).unwrap_or(0.5)
        })
        .collect()
}

fn mean(x: &[f64]) -> f64 {
    stats::mean(x).unwrap_or(0.5)
}

/// One-sided paired t-test p-value for `new > old` across folds.
pub fn paired_p_value(new: &[f64], old: &[f64]) -> f64 {
    let d: Vec<f64> = new.iter().zip(old).map(|(a, b)| a - b).collect();
    let n = d.len();
    let m = mean(&d);
    if n < 2 {
        return if m > 0.0 { 0.0 } else { 1.0 };
    }
    let sd = (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return if m > 0.0 { 0.0 } else { 1.0 };
    }
    let t = m / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    1.0 - dist.cdf(t)
}

/// Forward selection. Each round scores every remaining candidate added to
/// the current set; the best (ties to the higher-ranked candidate) is
/// accepted when its mean CV AUC beats the current one by at least
/// `min_gain` and a one-sided paired t-test over folds rejects "no gain" at
/// `alpha` divided by the number of candidates tried that round.
pub fn greedy_select_cv(
    candidates: &[Candidate],
    train: &TrainingSet,
    learner: &LearnerSpec,
    config: &SelectConfig,
) -> Selection {
    let mut current_folds = vec![0.5; train.n_folds];
    let baseline = 0.5;
    let mut current = baseline;
    let mut selected: Vec<Candidate> = Vec::new();
    let mut trace = Vec::new();
    let mut remaining: Vec<&Candidate> = candidates.iter().collect();
    while selected.len() < config.max_selected && !remaining.is_empty() {
        let base_cols: Vec<usize> = selected.iter().map(|c| c.column).collect();
        let mut scored: Vec<Vec<f64>> = remaining
            .par_iter()
            .map(|c| {
                let mut cols = base_cols.clone();
                cols.push(c.column);
                cv_scores(train, &cols, learner)
            })
            .collect();
        let mut best = 0;
        for i in 1..scored.len() {
            if mean(&scored[i]) > mean(&scored[best]) {
                best = i;
            }
        }
        let score = mean(&scored[best]);
        let p = paired_p_value(&scored[best], &current_folds);
        if score < current + config.min_gain || p > config.alpha / remaining.len() as f64 {
            break;
        }
        let cand = remaining.remove(best);
        trace.push(TraceStep {
            feature: cand.name.clone(),
            score,
            p_value: p,
        });
        selected.push(cand.clone());
        current = score;
        current_folds = scored.swap_remove(best);
    }
    Selection {
        selected,
        cv_trace: trace,
        baseline,
    }
}
