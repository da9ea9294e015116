//! Random hyper-parameter search over the built-in learners.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learner::{fit, FittedModel, LearnerSpec};
use super::prepare::TrainingSet;
use super::select::cv_scores;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Tree,
    Logistic,
    Majority,
}

/// Trials pick a learner uniformly from `learners`, then its parameters:
/// tree `max_depth` in 1..=10 and `min_leaf` in 1..=50; logistic
/// `learning_rate` log-uniform on [1e-4, 1], `l2` log-uniform on [1e-6, 1],
/// `epochs` in 50..=500.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub learners: Vec<LearnerKind>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            learners: vec![LearnerKind::Tree, LearnerKind::Logistic],
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

impl SearchSpace {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> LearnerSpec {
        let kind = if self.learners.is_empty() {
            LearnerKind::Majority
        } else {
            self.learners[rng.random_range(0..self.learners.len())]
        };
        match kind {
            LearnerKind::Tree => LearnerSpec::Tree {
                max_depth: rng.random_range(1..=10),
                min_leaf: rng.random_range(1..=50),
            },
            LearnerKind::Logistic => LearnerSpec::Logistic {
                learning_rate: log_uniform(rng, 1e-4, 1.0),
                l2: log_uniform(rng, 1e-6, 1.0),
                epochs: rng.random_range(50..=500),
            },
            LearnerKind::Majority => LearnerSpec::Majority,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub spec: LearnerSpec,
    pub cv_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best: usize,
    pub trials: Vec<Trial>,
    /// Refit of the best configuration on the full training set.
    pub model: FittedModel,
}

/// Samples `budget` configurations up front, scores each by mean CV AUC on
/// `columns`, and refits the best (ties to the earlier trial).
pub fn random_search_fit(
    train: &TrainingSet,
    columns: &[usize],
    space: &SearchSpace,
    budget: usize,
    seed: u64,
) -> SearchResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<LearnerSpec> = (0..budget.max(1)).map(|_| space.sample(&mut rng)).collect();
    let trials: Vec<Trial> = specs
        .into_par_iter()
        .map(|spec| {
            let cv_score = stats::mean(&cv_scores(train, columns, &spec)).unwrap_or(0.5);
            Trial { spec, cv_score }
        })
        .collect();
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.cv_score > trials[best].cv_score {
            best = i;
        }
    }
    let d = &train.data;
    let rows: Vec<usize> = (0..d.len()).collect();
    let model = fit(&trials[best].spec, &d.column_refs(columns), &rows, &d.labels);
    SearchResult { best, trials, model }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::prepare::{assign_folds, DenseSet};
    use crate::table::Value;

    fn xor_set(n: usize, seed: u64) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<bool> = a.iter().zip(&b).map(|(x, y)| (*x > 0.0) != (*y > 0.0)).collect();
        let keys: Vec<Value> = (0..n).map(|i| Value::text(format!("{i:05}"))).collect();
        let folds = assign_folds(&keys, &labels, 5, seed);
        TrainingSet {
            data: DenseSet { keys, labels, names: vec!["a".into(), "b".into()], columns: vec![a, b] },
            folds,
            n_folds: 5,
        }
    }

    #[test]
    fn xor_prefers_deeper_trees() {
        let t = xor_set(800, 7);
        let space = SearchSpace { learners: vec![LearnerKind::Tree] };
        let r = random_search_fit(&t, &[0, 1], &space, 12, 3);
        let LearnerSpec::Tree { max_depth, .. } = r.trials[r.best].spec else { unreachable!() };
        assert!(max_depth >= 2, "{:?}", r.trials);
        let depth1 = stats::mean(&cv_scores(&t, &[0, 1], &LearnerSpec::Tree { max_depth: 1, min_leaf: 1 })).unwrap();
        assert!(depth1 < 0.6, "{depth1}");
    }

    #[test]
    fn deterministic_and_budget_one() {
        let t = xor_set(200, 1);
        let a = random_search_fit(&t, &[0, 1], &SearchSpace::default(), 5, 9);
        let b = random_search_fit(&t, &[0, 1], &SearchSpace::default(), 5, 9);
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.model, b.model);
        assert_eq!(random_search_fit(&t, &[0, 1], &SearchSpace::default(), 1, 9).trials.len(), 1);
    }
}
