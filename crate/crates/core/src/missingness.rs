//! Co-missingness clusters and rule-based explanations of them.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cart::{self, Condition, DisplayCondition, Feature, Split, TreeConfig};
use crate::error::{Error, Result};
use crate::table::{Table, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingCluster {
    pub columns: Vec<String>,
    pub missing_fraction: f64,
    pub co_missing_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupLabel {
    /// Row is labelled missing when every cluster column is Null.
    #[default]
    All,
    /// Row is labelled missing when any cluster column is Null.
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainConfig {
    pub max_depth: usize,
    pub min_purity: f64,
    /// Absolute floor; the effective minimum is `max(min_support, min_support_fraction * rows)`.
    pub min_support: usize,
    pub min_support_fraction: f64,
    pub label: GroupLabel,
    /// Nominal columns with more categories than this are not used for splits.
    pub max_categories: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        Self {
            max_depth: 3,
            min_purity: 0.9,
            min_support: 20,
            min_support_fraction: 0.01,
            label: GroupLabel::All,
            max_categories: 32,
        }
    }
}

impl ExplainConfig {
    pub fn effective_min_support(&self, rows: usize) -> usize {
        self.min_support
            .max((self.min_support_fraction * rows as f64).ceil() as usize)
    }
}

/// One `(column, operator, value)` test of a rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum RuleCondition {
    LessEq { column: String, value: f64 },
    /// `> value`, or Null.
    GreaterOrNull { column: String, value: f64 },
    IsNull { column: String },
    IsNotNull { column: String },
    In { column: String, values: Vec<String> },
    NotIn { column: String, values: Vec<String> },
}

impl RuleCondition {
    fn from_cart(c: &Condition, names: &[String]) -> Self {
        let column = names[c.split.feature()].clone();
        match (&c.split, c.left) {
            (Split::LessEq { threshold, .. }, true) => RuleCondition::LessEq {
                column,
                value: *threshold,
            },
            (Split::LessEq { threshold, .. }, false) => RuleCondition::GreaterOrNull {
                column,
                value: *threshold,
            },
            (Split::IsNull { .. }, true) => RuleCondition::IsNull { column },
            (Split::IsNull { .. }, false) => RuleCondition::IsNotNull { column },
            (Split::InSet { categories, .. }, true) => RuleCondition::In {
                column,
                values: categories.clone(),
            },
            (Split::InSet { categories, .. }, false) => RuleCondition::NotIn {
                column,
                values: categories.clone(),
            },
        }
    }

    pub fn column(&self) -> &str {
        match self {
            RuleCondition::LessEq { column, .. }
            | RuleCondition::GreaterOrNull { column, .. }
            | RuleCondition::IsNull { column }
            | RuleCondition::IsNotNull { column }
            | RuleCondition::In { column, .. }
            | RuleCondition::NotIn { column, .. } => column,
        }
    }

    /// Evaluates the condition on a cell.
    pub fn matches(&self, v: &Value) -> bool {
        let category = || v.as_text().map(|s| s.into_owned()).unwrap_or_else(|| cart::NULL_CATEGORY.to_string());
        match self {
            RuleCondition::LessEq { value, .. } => v.as_f64().is_some_and(|x| x <= *value),
            RuleCondition::GreaterOrNull { value, .. } => v.as_f64().is_none_or(|x| x > *value),
            RuleCondition::IsNull { .. } => v.is_null(),
            RuleCondition::IsNotNull { .. } => !v.is_null(),
            RuleCondition::In { values, .. } => values.contains(&category()),
            RuleCondition::NotIn { values, .. } => !values.contains(&category()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingnessRule {
    pub conditions: Vec<RuleCondition>,
    pub predicate: String,
    /// `true` means the group is predicted missing.
    pub predicted: bool,
    pub purity: f64,
    pub support: usize,
}

impl MissingnessRule {
    pub fn matches_row(&self, table: &Table, row: usize) -> bool {
        self.conditions.iter().all(|c| {
            table
                .column(c.column())
                .is_some_and(|col| c.matches(&col.values[row]))
        })
    }
}

impl fmt::Display for MissingnessRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let outcome = if self.predicted { "MISSING" } else { "PRESENT" };
        write!(
            f,
            "{} => {} (purity={:.2}, support={})",
            self.predicate, outcome, self.purity, self.support
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterExplanation {
    pub cluster: MissingCluster,
    pub rules: Vec<MissingnessRule>,
    /// Set when the group label was constant and no tree was fitted.
    pub degenerate: bool,
}

fn indicators(table: &Table) -> Vec<(String, Vec<bool>)> {
    table
        .columns()
        .iter()
        .filter(|c| c.null_count() > 0)
        .map(|c| (c.name.clone(), c.values.iter().map(Value::is_null).collect()))
        .collect()
}

fn jaccard(a: &[bool], b: &[bool]) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Complete-linkage agglomerative clustering of columns that have Nulls,
/// merging while the least similar pair across two clusters has Jaccard
/// similarity ≥ `threshold`. Every column with Nulls lands in exactly one
/// cluster; clusters come back largest first, then by first column name.
pub fn missing_clusters(table: &Table, jaccard_threshold: f64) -> Vec<MissingCluster> {
    let ind = indicators(table);
    let n = ind.len();
    let mut sim = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            sim[i][j] = jaccard(&ind[i].1, &ind[j].1);
        }
    }
    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let link = groups[a]
                    .iter()
                    .flat_map(|&i| groups[b].iter().map(move |&j| (i, j)))
                    .map(|(i, j)| sim[i][j])
                    .fold(f64::INFINITY, f64::min);
                if link >= jaccard_threshold && best.is_none_or(|(s, _, _)| link > s) {
                    best = Some((link, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        let moved = groups.remove(b);
        groups[a].extend(moved);
        groups[a].sort_unstable();
    }

    let rows = table.row_count();
    let mut out: Vec<MissingCluster> = groups
        .into_iter()
        .map(|g| {
            let mut columns: Vec<String> = g.iter().map(|&i| ind[i].0.clone()).collect();
            columns.sort();
            let missing_fraction =
                g.iter().map(|&i| ind[i].1.iter().filter(|&&m| m).count() as f64).sum::<f64>()
                    / (g.len() * rows.max(1)) as f64;
            let co = (0..rows).filter(|&r| g.iter().all(|&i| ind[i].1[r])).count();
            MissingCluster {
                columns,
                missing_fraction,
                co_missing_rate: co as f64 / rows.max(1) as f64,
            }
        })
        .collect();
    out.sort_by(|a, b| b.columns.len().cmp(&a.columns.len()).then(a.columns.cmp(&b.columns)));
    out
}

/// Per-row group label for a cluster.
pub fn group_label(table: &Table, cluster: &MissingCluster, mode: GroupLabel) -> Result<Vec<bool>> {
    let cols = cluster
        .columns
        .iter()
        .map(|c| table.require_column(c))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..table.row_count())
        .map(|r| match mode {
            GroupLabel::All => cols.iter().all(|c| c.values[r].is_null()),
            GroupLabel::Any => cols.iter().any(|c| c.values[r].is_null()),
        })
        .collect())
}

/// Row identifiers: no Nulls, all values distinct and none fractional.
/// Splitting on them only memorizes row order.
pub(crate) fn is_identifier(c: &crate::table::Column) -> bool {
    if c.values.len() < 2 || c.null_count() > 0 {
        return false;
    }
    if c.values.iter().any(|v| v.as_f64().is_some_and(|x| x.fract() != 0.0)) {
        return false;
    }
    let distinct: std::collections::HashSet<&Value> = c.values.iter().collect();
    distinct.len() == c.values.len()
}

/// Tree features from every column outside `exclude`, row identifiers
/// excepted. A column is numeric when at least 95% of its non-null cells
/// parse as numbers; nominal columns with more than `max_categories`
/// categories are skipped.
pub fn tree_features(table: &Table, exclude: &[String], max_categories: usize) -> Vec<Feature> {
    let mut out = Vec::new();
    for c in table.columns() {
        if exclude.contains(&c.name) || is_identifier(c) {
            continue;
        }
        let non_null = c.values.iter().filter(|v| !v.is_null()).count();
        if non_null == 0 {
            continue;
        }
        let parsed = c.values.iter().filter(|v| v.as_f64().is_some()).count();
        if parsed as f64 >= 0.95 * non_null as f64 {
            out.push(Feature::numeric(c.name.clone(), c.values.iter().map(Value::as_f64).collect()));
        } else {
            let vals: Vec<Option<String>> = c
                .values
                .iter()
                .map(|v| v.as_text().map(|s| s.into_owned()))
                .collect();
            let mut distinct: Vec<&String> = vals.iter().flatten().collect();
            distinct.sort();
            distinct.dedup();
            if distinct.len() <= max_categories {
                out.push(Feature::nominal(c.name.clone(), vals));
            }
        }
    }
    out
}

/// Fits a Gini tree predicting the cluster's group label from the other
/// columns and returns the leaf paths meeting purity and support floors.
pub fn explain_missingness(
    table: &Table,
    cluster: &MissingCluster,
    config: &ExplainConfig,
) -> Result<Vec<MissingnessRule>> {
    if cluster.columns.is_empty() {
        return Err(Error::InvalidConfig("empty missingness cluster".into()));
    }
    let labels = group_label(table, cluster, config.label)?;
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::Degenerate(cluster.columns.clone()));
    }
    let min_support = config.effective_min_support(table.row_count());
    let features = tree_features(table, &cluster.columns, config.max_categories);
    let names: Vec<String> = features.iter().map(|f| f.name.clone()).collect();
    let tree = cart::fit(
        &features,
        &labels,
        &TreeConfig {
            max_depth: config.max_depth,
            min_leaf: min_support,
        },
    );
    let mut rules = Vec::new();
    for path in cart::leaf_paths(&tree) {
        let support = path.negatives + path.positives;
        if support < min_support || path.conditions.is_empty() {
            continue;
        }
        let predicted = path.positives >= path.negatives;
        let purity = path.positives.max(path.negatives) as f64 / support as f64;
        if purity < config.min_purity {
            continue;
        }
        let predicate = path
            .conditions
            .iter()
            .map(|c| {
                DisplayCondition {
                    condition: c,
                    names: &names,
                }
                .to_string()
            })
            .collect::<Vec<_>>()
            .join(" AND ");
        rules.push(MissingnessRule {
            conditions: path
                .conditions
                .iter()
                .map(|c| RuleCondition::from_cart(c, &names))
                .collect(),
            predicate,
            predicted,
            purity,
            support,
        });
    }
    Ok(rules)
}

/// Clusters then explains each cluster; degenerate clusters carry no rules.
pub fn analyze_missingness(
    table: &Table,
    jaccard_threshold: f64,
    config: &ExplainConfig,
) -> Result<Vec<ClusterExplanation>> {
    missing_clusters(table, jaccard_threshold)
        .into_par_iter()
        .map(|cluster| match explain_missingness(table, &cluster, config) {
            Ok(rules) => Ok(ClusterExplanation {
                cluster,
                rules,
                degenerate: false,
            }),
            Err(Error::Degenerate(_)) => Ok(ClusterExplanation {
                cluster,
                rules: Vec::new(),
                degenerate: true,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Column;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(name: &str, vals: Vec<Option<String>>) -> Column {
        Column::from_strs(name, &vals)
    }

    #[test]
    fn no_nulls_no_clusters() {
        let t = Table::new("t", vec![col("a", vec![Some("1".into()); 5])]).unwrap();
        assert!(missing_clusters(&t, 0.8).is_empty());
    }

    #[test]
    fn clusters_partition_missing_columns() {
        let n = 100;
        let m = |f: &dyn Fn(usize) -> bool| -> Vec<Option<String>> {
            (0..n).map(|i| (!f(i)).then(|| i.to_string())).collect()
        };
        let t = Table::new(
            "t",
            vec![
                col("a", m(&|i| i % 3 == 0)),
                col("b", m(&|i| i % 3 == 0)),
                col("c", m(&|i| i % 3 == 0 && i != 99)),
                col("d", m(&|i| i % 5 == 0)),
                col("e", m(&|_| false)),
            ],
        )
        .unwrap();
        let cl = missing_clusters(&t, 0.8);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].columns, vec!["a", "b", "c"]);
        assert_eq!(cl[1].columns, vec!["d"]);
        assert!((cl[0].co_missing_rate - 33.0 / 100.0).abs() < 1e-12);
    }

    #[test]
    fn coin_flip_labels_give_no_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 2000;
        let cats = ["a", "b", "c", "d"];
        let x: Vec<Option<String>> = (0..n).map(|_| Some(rng.random_range(0..1000).to_string())).collect();
        let k: Vec<Option<String>> = (0..n).map(|_| Some(cats[rng.random_range(0..4)].into())).collect();
        let target: Vec<Option<String>> = (0..n).map(|_| rng.random_bool(0.5).then(|| "v".into())).collect();
        let t = Table::new("t", vec![col("x", x), col("k", k), col("target", target)]).unwrap();
        let cluster = &missing_clusters(&t, 0.8)[0];
        let rules = explain_missingness(&t, cluster, &ExplainConfig::default()).unwrap();
        assert!(rules.is_empty(), "{rules:?}");
    }

    #[test]
    fn constant_label_is_degenerate() {
        let t = Table::new(
            "t",
            vec![col("a", vec![None; 30]), col("b", (0..30).map(|i| Some(i.to_string())).collect())],
        )
        .unwrap();
        let cluster = &missing_clusters(&t, 0.8)[0];
        let err = explain_missingness(&t, cluster, &ExplainConfig::default()).unwrap_err();
        assert_eq!(err.code(), "Degenerate");
    }

    #[test]
    fn flag_driven_missingness_and_recomputed_purity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400;
        let flag: Vec<Option<String>> = (0..n)
            .map(|_| Some(if rng.random_bool(0.6) { "Y" } else { "N" }.to_string()))
            .collect();
        let age: Vec<Option<String>> = flag
            .iter()
            .map(|f| (f.as_deref() == Some("Y")).then(|| rng.random_range(0..20).to_string()))
            .collect();
        let income: Vec<Option<String>> = (0..n).map(|_| Some(rng.random_range(1000..9000).to_string())).collect();
        let t = Table::new("t", vec![col("FLAG", flag), col("CAR_AGE", age), col("INCOME", income)]).unwrap();
        let cluster = &missing_clusters(&t, 0.8)[0];
        let rules = explain_missingness(&t, cluster, &ExplainConfig::default()).unwrap();
        let hit = rules.iter().find(|r| r.predicted).expect("a missing rule");
        assert_eq!(hit.predicate, "FLAG = N");
        assert_eq!(hit.purity, 1.0);
        for r in &rules {
            let labels = group_label(&t, cluster, GroupLabel::All).unwrap();
            let rows: Vec<usize> = (0..n).filter(|&i| r.matches_row(&t, i)).collect();
            assert_eq!(rows.len(), r.support);
            let agree = rows.iter().filter(|&&i| labels[i] == r.predicted).count();
            assert_eq!(agree as f64 / rows.len() as f64, r.purity);
        }
    }
}
