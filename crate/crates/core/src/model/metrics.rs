//! Evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestMetrics {
    pub auc: f64,
    pub accuracy: f64,
}

/// Fraction of rows where `score >= 0.5` matches the label.
pub fn accuracy(scores: &[f64], labels: &[bool]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = scores.iter().zip(labels).filter(|(s, &l)| (**s >= 0.5) == l).count();
    hits as f64 / labels.len() as f64
}

/// AUC (midrank Mann-Whitney) and accuracy at 0.5.
pub fn evaluate(scores: &[f64], labels: &[bool]) -> Result<TestMetrics> {
    if labels.is_empty() {
        return Err(Error::EmptySample);
    }
    let acc = accuracy(scores, labels);
    match stats::auc(scores, labels) {
        Some(auc) => Ok(TestMetrics { auc, accuracy: acc }),
        None => Err(Error::SingleClassTest { accuracy: acc }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_and_inverted_scores() {
        let labels = [true, false, true, false];
        let s: Vec<f64> = labels.iter().map(|&l| l as u8 as f64).collect();
        assert_eq!(evaluate(&s, &labels).unwrap(), TestMetrics { auc: 1.0, accuracy: 1.0 });
        let inv: Vec<f64> = s.iter().map(|v| 1.0 - v).collect();
        assert_eq!(evaluate(&inv, &labels).unwrap().auc, 0.0);
    }

    #[test]
    fn random_scores_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let labels: Vec<bool> = (0..10_000).map(|_| rng.random_bool(0.5)).collect();
        let s: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>()).collect();
        let auc = evaluate(&s, &labels).unwrap().auc;
        assert!((0.48..=0.52).contains(&auc), "{auc}");
    }

    #[test]
    fn single_class_reports_accuracy() {
        match evaluate(&[0.9, 0.2], &[true, true]) {
            Err(Error::SingleClassTest { accuracy }) => assert_eq!(accuracy, 0.5),
            other => panic!("{other:?}"),
        }
    }
}
