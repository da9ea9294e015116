//! Binary classification trees with Gini splitting.
//!
//! Shared by the missingness explainer and the model builder's tree learner.
//! Numeric splits are `x <= t`; Null goes right. A numeric feature with
//! Nulls can also split on `IS NULL`. Nominal splits send a category set
//! left: every single category, and every prefix of the categories sorted
//! by descending positive rate.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureData {
    Numeric(Vec<Option<f64>>),
    Nominal(Vec<Option<String>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub data: FeatureData,
}

impl Feature {
    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Self {
            name: name.into(),
            data: FeatureData::Numeric(values),
        }
    }

    pub fn nominal(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Self {
            name: name.into(),
            data: FeatureData::Nominal(values),
        }
    }
}

/// Label used for Null categories in nominal splits.
pub const NULL_CATEGORY: &str = "NULL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 3,
            min_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Split {
    /// Left when `x <= threshold`.
    LessEq { feature: usize, threshold: f64 },
    /// Left when the value is Null.
    IsNull { feature: usize },
    /// Left when the category is in the set.
    InSet { feature: usize, categories: Vec<String> },
}

impl Split {
    pub fn feature(&self) -> usize {
        match self {
            Split::LessEq { feature, .. } | Split::IsNull { feature } | Split::InSet { feature, .. } => {
                *feature
            }
        }
    }

    pub fn goes_left(&self, features: &[Feature], row: usize) -> bool {
        match (self, &features[self.feature()].data) {
            (Split::LessEq { threshold, .. }, FeatureData::Numeric(v)) => {
                v[row].is_some_and(|x| x <= *threshold)
            }
            (Split::IsNull { .. }, FeatureData::Numeric(v)) => v[row].is_none(),
            (Split::IsNull { .. }, FeatureData::Nominal(v)) => v[row].is_none(),
            (Split::InSet { categories, .. }, FeatureData::Nominal(v)) => {
                let c = v[row].as_deref().unwrap_or(NULL_CATEGORY);
                categories.iter().any(|k| k == c)
            }
            _ => false,
        }
    }

    /// Left branch on a raw numeric row (model-time prediction).
    pub fn goes_left_dense(&self, row: &[f64]) -> bool {
        match self {
            Split::LessEq { feature, threshold } => {
                let x = row[*feature];
                !x.is_nan() && x <= *threshold
            }
            Split::IsNull { feature } => row[*feature].is_nan(),
            Split::InSet { .. } => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        negatives: usize,
        positives: usize,
    },
    Split {
        split: Split,
        negatives: usize,
        positives: usize,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn counts(&self) -> (usize, usize) {
        match self {
            Node::Leaf {
                negatives,
                positives,
            }
            | Node::Split {
                negatives,
                positives,
                ..
            } => (*negatives, *positives),
        }
    }

    pub fn positive_rate(&self) -> f64 {
        let (n, p) = self.counts();
        if n + p == 0 {
            0.0
        } else {
            p as f64 / (n + p) as f64
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

fn gini(neg: usize, pos: usize) -> f64 {
    let n = (neg + pos) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = pos as f64 / n;
    2.0 * p * (1.0 - p)
}

/// Weighted impurity decrease of splitting `(neg, pos)` into a left part.
fn gain(total: (usize, usize), left: (usize, usize)) -> f64 {
    let right = (total.0 - left.0, total.1 - left.1);
    let n = (total.0 + total.1) as f64;
    let nl = (left.0 + left.1) as f64;
    let nr = (right.0 + right.1) as f64;
    gini(total.0, total.1) - nl / n * gini(left.0, left.1) - nr / n * gini(right.0, right.1)
}

const MIN_GAIN: f64 = 1e-12;

pub fn fit(features: &[Feature], labels: &[bool], config: &TreeConfig) -> Node {
    let rows: Vec<usize> = (0..labels.len()).collect();
    grow(features, labels, &rows, config, 0)
}

fn counts(labels: &[bool], rows: &[usize]) -> (usize, usize) {
    let pos = rows.iter().filter(|&&r| labels[r]).count();
    (rows.len() - pos, pos)
}

fn grow(features: &[Feature], labels: &[bool], rows: &[usize], config: &TreeConfig, depth: usize) -> Node {
    let (neg, pos) = counts(labels, rows);
    let leaf = Node::Leaf {
        negatives: neg,
        positives: pos,
    };
    let min_leaf = config.min_leaf.max(1);
    if depth >= config.max_depth || neg == 0 || pos == 0 || rows.len() < 2 * min_leaf {
        return leaf;
    }
    let Some(split) = best_split(features, labels, rows, min_leaf) else {
        return leaf;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&row| split.goes_left(features, row));
    Node::Split {
        split,
        negatives: neg,
        positives: pos,
        left: Box::new(grow(features, labels, &l, config, depth + 1)),
        right: Box::new(grow(features, labels, &r, config, depth + 1)),
    }
}

fn best_split(features: &[Feature], labels: &[bool], rows: &[usize], min_leaf: usize) -> Option<Split> {
    let total = counts(labels, rows);
    let n = rows.len();
    let mut best: Option<(f64, Split)> = None;
    let mut consider = |g: f64, left_n: usize, s: &dyn Fn() -> Split| {
        if left_n < min_leaf || n - left_n < min_leaf || g <= MIN_GAIN {
            return;
        }
        if best.as_ref().is_none_or(|(bg, _)| g > *bg + MIN_GAIN) {
            best = Some((g, s()));
        }
    };
    for (fi, f) in features.iter().enumerate() {
        match &f.data {
            FeatureData::Numeric(v) => {
                let mut present: Vec<(f64, bool)> = Vec::with_capacity(n);
                let mut null_counts = (0usize, 0usize);
                for &r in rows {
                    match v[r] {
                        Some(x) => present.push((x, labels[r])),
                        None => {
                            if labels[r] {
                                null_counts.1 += 1
                            } else {
                                null_counts.0 += 1
                            }
                        }
                    }
                }
                let nulls = null_counts.0 + null_counts.1;
                if nulls > 0 && !present.is_empty() {
                    consider(gain(total, null_counts), nulls, &|| Split::IsNull { feature: fi });
                }
                present.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = (0usize, 0usize);
                for i in 0..present.len().saturating_sub(1) {
                    if present[i].1 {
                        left.1 += 1;
                    } else {
                        left.0 += 1;
                    }
                    if present[i].0 == present[i + 1].0 {
                        continue;
                    }
                    let t = present[i].0 + (present[i + 1].0 - present[i].0) / 2.0;
                    consider(gain(total, left), i + 1, &|| Split::LessEq {
                        feature: fi,
                        threshold: t,
                    });
                }
            }
            FeatureData::Nominal(v) => {
                let mut per: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
                for &r in rows {
                    let c = v[r].as_deref().unwrap_or(NULL_CATEGORY);
                    let e = per.entry(c).or_default();
                    if labels[r] {
                        e.1 += 1
                    } else {
                        e.0 += 1
                    }
                }
                if per.len() < 2 {
                    continue;
                }
                for (&c, &cnt) in &per {
                    consider(gain(total, cnt), cnt.0 + cnt.1, &|| Split::InSet {
                        feature: fi,
                        categories: vec![c.to_string()],
                    });
                }
                let mut ordered: Vec<(&str, (usize, usize))> = per.iter().map(|(k, v)| (*k, *v)).collect();
                ordered.sort_by(|a, b| {
                    let ra = a.1 .1 as f64 / (a.1 .0 + a.1 .1) as f64;
                    let rb = b.1 .1 as f64 / (b.1 .0 + b.1 .1) as f64;
                    rb.total_cmp(&ra).then(a.0.cmp(b.0))
                });
                let mut left = (0usize, 0usize);
                for k in 0..ordered.len() - 1 {
                    left.0 += ordered[k].1 .0;
                    left.1 += ordered[k].1 .1;
                    if k == 0 {
                        continue;
                    }
                    let mut cats: Vec<String> = ordered[..=k].iter().map(|(c, _)| c.to_string()).collect();
                    cats.sort();
                    consider(gain(total, left), left.0 + left.1, &|| Split::InSet {
                        feature: fi,
                        categories: cats.clone(),
                    });
                }
            }
        }
    }
    best.map(|(_, s)| s)
}

/// Positive-class probability for a dense numeric row (NaN = missing).
pub fn predict_dense(node: &Node, row: &[f64]) -> f64 {
    match node {
        Node::Leaf { .. } => node.positive_rate(),
        Node::Split {
            split, left, right, ..
        } => {
            if split.goes_left_dense(row) {
                predict_dense(left, row)
            } else {
                predict_dense(right, row)
            }
        }
    }
}

/// One condition on a root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub split: Split,
    pub left: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafPath {
    pub conditions: Vec<Condition>,
    pub negatives: usize,
    pub positives: usize,
}

pub fn leaf_paths(root: &Node) -> Vec<LeafPath> {
    fn walk(node: &Node, path: &mut Vec<Condition>, out: &mut Vec<LeafPath>) {
        match node {
            Node::Leaf {
                negatives,
                positives,
            } => out.push(LeafPath {
                conditions: path.clone(),
                negatives: *negatives,
                positives: *positives,
            }),
            Node::Split {
                split, left, right, ..
            } => {
                path.push(Condition {
                    split: split.clone(),
                    left: true,
                });
                walk(left, path, out);
                path.last_mut().unwrap().left = false;
                walk(right, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(root, &mut Vec::new(), &mut out);
    out
}

/// Renders a condition against feature names.
pub struct DisplayCondition<'a> {
    pub condition: &'a Condition,
    pub names: &'a [String],
}

impl fmt::Display for DisplayCondition<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.condition;
        let name = &self.names[c.split.feature()];
        match (&c.split, c.left) {
            (Split::LessEq { threshold, .. }, true) => write!(f, "{name} <= {threshold}"),
            (Split::LessEq { threshold, .. }, false) => write!(f, "({name} > {threshold} OR {name} IS NULL)"),
            (Split::IsNull { .. }, true) => write!(f, "{name} IS NULL"),
            (Split::IsNull { .. }, false) => write!(f, "{name} IS NOT NULL"),
            (Split::InSet { categories, .. }, left) => {
                let set = categories.join(",");
                match (categories.len(), left) {
                    (1, true) => write!(f, "{name} = {set}"),
                    (1, false) => write!(f, "{name} != {set}"),
                    (_, true) => write!(f, "{name} IN {{{set}}}"),
                    (_, false) => write!(f, "{name} NOT IN {{{set}}}"),
                }
            }
        }
    }
}
