//! Univariate ranking and redundancy pruning before greedy selection.

use serde::{Deserialize, Serialize};

use super::prepare::TrainingSet;
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    /// Column index into the training set.
    pub column: usize,
    pub name: String,
    /// `max(AUC, 1 - AUC)` of the raw column against the label.
    pub score: f64,
}

/// Ranks columns by single-feature AUC (direction-free), drops constant
/// columns, and walks the ranking keeping a column only when its |Spearman|
/// with every kept column is below `redundancy_threshold`. Returns at most
/// `max_features` survivors, best first; ties go to the earlier name.
pub fn prefilter_features(train: &TrainingSet, max_features: usize, redundancy_threshold: f64) -> Vec<Candidate> {
    let d = &train.data;
    let mut ranked: Vec<(Candidate, Vec<f64>)> = d
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().any(|v| *v != c[0]))
        .map(|(j, c)| {
            let auc = stats::auc(c, &d.labels).unwrap_or(0.5);
            (
                Candidate {
                    column: j,
                    name: d.names[j].clone(),
                    score: auc.max(1.0 - auc),
                },
                stats::midranks(c),
            )
        })
        .collect();
    ranked.sort_by(|a, b| b.0.score.total_cmp(&a.0.score).then(a.0.name.cmp(&b.0.name)));
    let mut kept: Vec<(Candidate, Vec<f64>)> = Vec::new();
    for (cand, ranks) in ranked {
        if kept.len() >= max_features {
            break;
        }
        let redundant = kept.iter().any(|(_, r)| {
            stats::pearson(r, &ranks).is_some_and(|rho| rho.abs() >= redundancy_threshold)
        });
        if !redundant {
            kept.push((cand, ranks));
        }
    }
    kept.into_iter().map(|(c, _)| c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::prepare::DenseSet;
    use crate::table::Value;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(cols: Vec<(&str, Vec<f64>)>, labels: Vec<bool>) -> TrainingSet {
        let n = labels.len();
        TrainingSet {
            data: DenseSet {
                keys: (0..n).map(|i| Value::text(i.to_string())).collect(),
                labels,
                names: cols.iter().map(|(n, _)| n.to_string()).collect(),
                columns: cols.into_iter().map(|(_, c)| c).collect(),
            },
            folds: (0..n).map(|i| i % 5).collect(),
            n_folds: 5,
        }
    }

    #[test]
    fn duplicates_collapse_and_label_copy_ranks_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let labels: Vec<bool> = (0..500).map(|_| rng.random_bool(0.4)).collect();
        let copy: Vec<f64> = labels.iter().map(|&l| l as u8 as f64).collect();
        let noise: Vec<f64> = (0..500).map(|_| rng.random()).collect();
        let t = set(
            vec![("noise", noise.clone()), ("noise_dup", noise), ("copy", copy)],
            labels,
        );
        let c = prefilter_features(&t, 10, 0.97);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].name, "copy");
        assert_eq!(c[0].score, 1.0);
        assert_eq!(c[1].name, "noise");
    }

    #[test]
    fn cap_applies() {
        let labels: Vec<bool> = (0..100).map(|i| i % 2 == 0).collect();
        let cols: Vec<(&str, Vec<f64>)> = ["a", "b", "c"]
            .iter()
            .enumerate()
            .map(|(k, n)| (*n, (0..100).map(|i| ((i * (k + 3) * 7919) % 101) as f64).collect()))
            .collect();
        assert_eq!(prefilter_features(&set(cols, labels), 2, 0.97).len(), 2);
    }
}
