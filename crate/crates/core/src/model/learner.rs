//! Built-in learners: classification tree, logistic regression, majority.

use serde::{Deserialize, Serialize};

use crate::cart::{self, Feature, Node, TreeConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerSpec {
    Tree { max_depth: usize, min_leaf: usize },
    Logistic { learning_rate: f64, l2: f64, epochs: usize },
    Majority,
}

impl Default for LearnerSpec {
    fn default() -> Self {
        LearnerSpec::Tree {
            max_depth: 4,
            min_leaf: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Tree {
        root: Node,
    },
    Logistic {
        weights: Vec<f64>,
        bias: f64,
        means: Vec<f64>,
        scales: Vec<f64>,
    },
    Majority {
        rate: f64,
    },
}

/// Fits on `rows` of column-major `columns`.
pub fn fit(spec: &LearnerSpec, columns: &[&[f64]], rows: &[usize], labels: &[bool]) -> FittedModel {
    let y: Vec<bool> = rows.iter().map(|&r| labels[r]).collect();
    match spec {
        LearnerSpec::Tree { max_depth, min_leaf } => {
            let features: Vec<Feature> = columns
                .iter()
                .enumerate()
                .map(|(j, c)| Feature::numeric(j.to_string(), rows.iter().map(|&r| Some(c[r])).collect()))
                .collect();
            FittedModel::Tree {
                root: cart::fit(
                    &features,
                    &y,
                    &TreeConfig {
                        max_depth: *max_depth,
                        min_leaf: *min_leaf,
                    },
                ),
            }
        }
        LearnerSpec::Logistic {
            learning_rate,
            l2,
            epochs,
        } => fit_logistic(columns, rows, &y, *learning_rate, *l2, *epochs),
        LearnerSpec::Majority => FittedModel::Majority {
            rate: y.iter().filter(|&&l| l).count() as f64 / y.len().max(1) as f64,
        },
    }
}

fn fit_logistic(columns: &[&[f64]], rows: &[usize], y: &[bool], lr: f64, l2: f64, epochs: usize) -> FittedModel {
    let n = rows.len().max(1) as f64;
    let d = columns.len();
    let mut means = vec![0.0; d];
    let mut scales = vec![1.0; d];
    for (j, c) in columns.iter().enumerate() {
        let m = rows.iter().map(|&r| c[r]).sum::<f64>() / n;
        let v = rows.iter().map(|&r| (c[r] - m).powi(2)).sum::<f64>() / n;
        means[j] = m;
        scales[j] = if v > 0.0 { v.sqrt() } else { 1.0 };
    }
    let x: Vec<Vec<f64>> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| rows.iter().map(|&r| (c[r] - means[j]) / scales[j]).collect())
        .collect();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut resid = vec![0.0; rows.len()];
    for _ in 0..epochs {
        for i in 0..rows.len() {
            let z = b + (0..d).map(|j| w[j] * x[j][i]).sum::<f64>();
            resid[i] = sigmoid(z) - y[i] as u8 as f64;
        }
        b -= lr * resid.iter().sum::<f64>() / n;
        for j in 0..d {
            let g = x[j].iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / n + l2 * w[j];
            w[j] -= lr * g;
        }
    }
    FittedModel::Logistic {
        weights: w,
        bias: b,
        means,
        scales,
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl FittedModel {
    /// Positive-class score of one dense row.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            FittedModel::Tree { root } => cart::predict_dense(root, row),
            FittedModel::Logistic {
                weights,
                bias,
                means,
                scales,
            } => sigmoid(
                bias + weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * (row[j] - means[j]) / scales[j])
                    .sum::<f64>(),
            ),
            FittedModel::Majority { rate } => *rate,
        }
    }

    pub fn predict(&self, columns: &[&[f64]], rows: &[usize]) -> Vec<f64> {
        let mut buf = vec![0.0; columns.len()];
        rows.iter()
            .map(|&r| {
                for (j, c) in columns.iter().enumerate() {
                    buf[j] = c[r];
                }
                self.predict_row(&buf)
            })
            .collect()
    }
}
