//! Anchor-keyed feature generation over the relation graph.
//!
//! Every path from the anchor contributes features: its terminal column is
//! transformed (datetime parts, pattern captures, identity), then rolled up
//! through the path's one-to-many steps. Paths with a single one-to-many
//! step and a time order also get the time-series catalog.
//!
//! Names follow `anchor.step...terminal__transform__agg1__agg2`, aggregators
//! innermost first; the identity transform is omitted.

pub mod aggregate;
pub mod export;
pub mod rollup;
pub mod timeseries;
pub mod transform;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use aggregate::Aggregator;
pub use export::{read_feature_matrix, write_feature_matrix};
pub use rollup::{expand_path, roll_up};
pub use timeseries::{timeseries_features, TIMESERIES_FEATURES};
pub use transform::{transform_one_to_one, Stream};

use crate::error::{Error, Result};
use crate::infer::{parse_datetime, profile_table, ColumnProfile, ProfileConfig, TopLevel};
use crate::relation::{
    enumerate_paths, merge_graphs, to_relation_graph, Cardinality, FeaturePath, PathConfig, PathStep,
    RelationGraph,
};
use crate::structure::{build_schema_tree, FdConfig};
use crate::table::{Dataset, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub paths: PathConfig,
    /// Use the full numeric aggregator set above the first roll-up level.
    pub full_rollup: bool,
    pub timeseries: bool,
    /// Explicit ordering column for time-series features.
    pub time_column: Option<String>,
    /// Never emitted as a feature.
    pub label: Option<String>,
    pub profile: ProfileConfig,
    pub fd: FdConfig,
    /// On a cross-table type clash, keep the first table's column.
    pub prefer_first: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            paths: PathConfig::default(),
            full_rollup: false,
            timeseries: true,
            time_column: None,
            label: None,
            profile: ProfileConfig::default(),
            fd: FdConfig::default(),
            prefer_first: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Nominal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lineage {
    pub path: String,
    pub steps: Vec<PathStep>,
    pub transform: Option<String>,
    pub aggregators: Vec<Aggregator>,
    pub kind: FeatureKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumn {
    pub name: String,
    pub values: Stream,
    pub lineage: Lineage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub anchor: String,
    pub keys: Vec<Value>,
    pub features: Vec<FeatureColumn>,
}

impl FeatureMatrix {
    pub fn feature(&self, name: &str) -> Option<&FeatureColumn> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }
}

fn feature_name(path: &str, transform: Option<&str>, aggs: &[Aggregator]) -> String {
    let mut s = path.to_string();
    if let Some(t) = transform {
        s.push_str("__");
        s.push_str(t);
    }
    for a in aggs {
        s.push_str("__");
        s.push_str(a.name());
    }
    s
}

/// Schema trees of every table merged into one relation graph.
pub fn build_relation_graph(dataset: &Dataset, config: &FeatureConfig) -> Result<RelationGraph> {
    let graphs = dataset
        .tables()
        .par_iter()
        .map(|t| Ok(to_relation_graph(&build_schema_tree(t, &config.fd)?, t)))
        .collect::<Result<Vec<_>>>()?;
    merge_graphs(&graphs, config.prefer_first)
}

/// Distinct non-null anchor values across all tables holding the column:
/// numeric values ascending first, then the rest lexicographically.
pub fn anchor_keys(dataset: &Dataset, anchor: &str) -> Vec<Value> {
    let mut keys: Vec<Value> = dataset
        .tables_with_column(anchor)
        .flat_map(|t| t.column(anchor).unwrap().values.iter())
        .filter(|v| !v.is_null())
        .cloned()
        .collect();
    keys.sort_by(|a, b| match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| a.to_string().cmp(&b.to_string())),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.to_string().cmp(&b.to_string()),
    });
    keys.dedup();
    keys
}

struct Context<'a> {
    dataset: &'a Dataset,
    graph: &'a RelationGraph,
    profiles: BTreeMap<&'a str, Vec<ColumnProfile>>,
    anchors: Vec<Value>,
    config: &'a FeatureConfig,
}

impl<'a> Context<'a> {
    fn new(dataset: &'a Dataset, graph: &'a RelationGraph, anchor: &str, config: &'a FeatureConfig) -> Self {
        let profiles = dataset
            .tables()
            .par_iter()
            .map(|t| (t.name(), profile_table(t, &config.profile)))
            .collect();
        Self {
            dataset,
            graph,
            profiles,
            anchors: anchor_keys(dataset, anchor),
            config,
        }
    }

    fn profile(&self, table: &str, column: &str) -> Option<&ColumnProfile> {
        self.profiles.get(table)?.iter().find(|p| p.name == column)
    }

    fn features_for_path(&self, path: &FeaturePath) -> Result<Vec<FeatureColumn>> {
        let last = path.steps.last().expect("paths have at least one step");
        let profile = self
            .profile(&last.table, &last.to)
            .ok_or_else(|| Error::MissingJoinColumn(last.to.clone()))?;
        let tuples = expand_path(self.dataset, self.graph, path, &self.anchors)?;
        let terminal: Vec<Value> = tuples.iter().map(|t| t.last().unwrap().clone()).collect();
        let as_key = self.graph.is_key_column(&path.terminal);
        let streams = transform_one_to_one(&terminal, profile, self.config.profile.epoch_seconds, as_key);
        let numeric_terminal = match streams.as_slice() {
            [(None, s @ Stream::Numeric(_))] => Some(s.clone()),
            _ => None,
        };
        let dotted = path.dotted();
        let mut out: Vec<FeatureColumn> = roll_up(path, &tuples, streams, &self.anchors, self.config.full_rollup)
            .into_iter()
            .map(|r| FeatureColumn {
                name: feature_name(&dotted, r.transform.as_deref(), &r.aggregators),
                lineage: Lineage {
                    path: dotted.clone(),
                    steps: path.steps.clone(),
                    transform: r.transform,
                    aggregators: r.aggregators,
                    kind: if r.values.is_numeric() {
                        FeatureKind::Numeric
                    } else {
                        FeatureKind::Nominal
                    },
                },
                values: r.values,
            })
            .collect();
        if self.config.timeseries && path.many_count == 1 {
            if let Some(Stream::Numeric(v)) = numeric_terminal {
                out.extend(self.timeseries(path, &tuples, &v)?);
            }
        }
        Ok(out)
    }

    /// Column ordering the children of the path's one-to-many step: the
    /// declared time column, else a datetime column, else an integer column
    /// distinct within every group; each must be one-to-one from the step's
    /// target. Returns the order value per tuple.
    fn time_order(&self, path: &FeaturePath, tuples: &[Vec<Value>], m: usize) -> Option<Vec<Option<f64>>> {
        let target = &path.steps[m].to;
        let mut candidates: Vec<(&str, &str)> = self
            .graph
            .edges
            .iter()
            .filter(|e| &e.from == target && e.cardinality == Cardinality::OneToOne && e.to != path.terminal)
            .map(|e| (e.to.as_str(), e.table.as_str()))
            .collect();
        candidates.dedup_by_key(|c| c.0);
        let lookup = |col: &str, table: &str, f: &dyn Fn(&Value) -> Option<f64>| -> Option<Vec<Option<f64>>> {
            let t = self.dataset.table(table)?;
            let (tc, oc) = (t.column(target)?, t.column(col)?);
            let mut map: HashMap<&Value, Option<f64>> = HashMap::new();
            for (k, v) in tc.values.iter().zip(&oc.values) {
                map.entry(k).or_insert_with(|| f(v));
            }
            Some(tuples.iter().map(|tp| map.get(&tp[m + 1]).copied().flatten()).collect())
        };
        let epoch = self.config.profile.epoch_seconds;
        let as_time = move |v: &Value| {
            v.as_text()
                .and_then(|s| parse_datetime(&s, epoch))
                .map(|d| d.and_utc().timestamp() as f64)
        };
        if let Some(tc) = &self.config.time_column {
            if let Some(&(c, t)) = candidates.iter().find(|(c, _)| c == tc) {
                let datetime = self.profile(t, c).is_some_and(|p| p.type_tag.is_datetime());
                return if datetime {
                    lookup(c, t, &as_time)
                } else {
                    lookup(c, t, &|v: &Value| v.as_f64())
                };
            }
        }
        for &(c, t) in &candidates {
            if self.profile(t, c).is_some_and(|p| p.type_tag.is_datetime()) {
                return lookup(c, t, &as_time);
            }
        }
        let (_, groups) = rollup::group_by_prefix(tuples, m + 1);
        for &(c, t) in &candidates {
            let ok = self.profile(t, c).is_some_and(|p| {
                p.type_tag.top_level == TopLevel::Integer && p.is_numeric() && !self.graph.is_key_column(c)
            });
            if !ok {
                continue;
            }
            let order = lookup(c, t, &|v: &Value| v.as_f64())?;
            let strict = groups.iter().all(|g| {
                let mut vals: Vec<f64> = g.iter().filter_map(|&i| order[i]).collect();
                let n = vals.len();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                n == g.len() && vals.len() == n
            });
            if strict {
                return Some(order);
            }
        }
        None
    }

    fn timeseries(&self, path: &FeaturePath, tuples: &[Vec<Value>], values: &[Option<f64>]) -> Result<Vec<FeatureColumn>> {
        let m = path
            .steps
            .iter()
            .position(|s| s.cardinality == Cardinality::OneToMany)
            .expect("one one-to-many step");
        let Some(order) = self.time_order(path, tuples, m) else {
            return Ok(Vec::new());
        };
        let (prefixes, groups) = rollup::group_by_prefix(tuples, m + 1);
        let per_group: Vec<[Option<f64>; 16]> = groups
            .iter()
            .map(|g| {
                let mut idx = g.clone();
                idx.sort_by(|&a, &b| {
                    let (oa, ob) = (order[a].unwrap_or(f64::INFINITY), order[b].unwrap_or(f64::INFINITY));
                    oa.total_cmp(&ob).then(a.cmp(&b))
                });
                let series: Vec<f64> = idx.iter().filter_map(|&i| values[i]).collect();
                timeseries_features(&series)
            })
            .collect();
        let mut first: HashMap<&Value, usize> = HashMap::new();
        for (i, p) in prefixes.iter().enumerate() {
            first.entry(&p[0]).or_insert(i);
        }
        let rows: Vec<Option<usize>> = self.anchors.iter().map(|a| first.get(a).copied()).collect();
        let dotted = path.dotted();
        Ok(TIMESERIES_FEATURES
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let transform = format!("ts_{name}");
                FeatureColumn {
                    name: feature_name(&dotted, Some(&transform), &[]),
                    values: Stream::Numeric(rows.iter().map(|r| r.and_then(|i| per_group[i][k])).collect()),
                    lineage: Lineage {
                        path: dotted.clone(),
                        steps: path.steps.clone(),
                        transform: Some(transform),
                        aggregators: Vec::new(),
                        kind: FeatureKind::Numeric,
                    },
                }
            })
            .collect())
    }
}

/// Features for one path, one value per anchor key.
pub fn rollup_path(
    dataset: &Dataset,
    graph: &RelationGraph,
    path: &FeaturePath,
    config: &FeatureConfig,
) -> Result<Vec<FeatureColumn>> {
    Context::new(dataset, graph, &path.anchor, config).features_for_path(path)
}

pub fn generate_features(dataset: &Dataset, anchor: &str, config: &FeatureConfig) -> Result<FeatureMatrix> {
    let graph = build_relation_graph(dataset, config)?;
    generate_features_with_graph(dataset, &graph, anchor, config)
}

pub fn generate_features_with_graph(
    dataset: &Dataset,
    graph: &RelationGraph,
    anchor: &str,
    config: &FeatureConfig,
) -> Result<FeatureMatrix> {
    let paths: Vec<FeaturePath> = enumerate_paths(graph, anchor, &config.paths)?
        .into_iter()
        .filter(|p| config.label.as_deref() != Some(p.terminal.as_str()))
        .collect();
    let ctx = Context::new(dataset, graph, anchor, config);
    let per_path = paths
        .par_iter()
        .map(|p| ctx.features_for_path(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix {
        anchor: anchor.to_string(),
        keys: ctx.anchors.clone(),
        features: per_path.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{Column, Table};

    fn table(name: &str, cols: &[(&str, &[&str])]) -> Table {
        Table::new(
            name,
            cols.iter()
                .map(|(n, v)| Column::from_strs(*n, &v.iter().map(|s| (!s.is_empty()).then_some(*s)).collect::<Vec<_>>()))
                .collect(),
        )
        .unwrap()
    }

    fn order_fixture() -> Dataset {
        let order = table(
            "order",
            &[
                ("orderID", &["1", "1", "2", "3", "3", "3", "4", "4"]),
                ("orderType", &["web", "web", "web", "web", "web", "web", "phone", "phone"]),
                ("productID", &["1", "6", "3", "2", "4", "6", "5", "7"]),
                ("customerID", &["4", "4", "2", "2", "2", "2", "3", "3"]),
                ("time", &["day 1", "day 1", "day 1", "day 2", "day 2", "day 2", "day 2", "day 2"]),
            ],
        );
        let customer = table(
            "customer",
            &[("customerID", &["1", "2", "3", "4"]), ("segment", &["a", "b", "a", "b"])],
        );
        Dataset::new(vec![customer, order]).unwrap()
    }

    fn numeric(m: &FeatureMatrix, name: &str) -> Vec<Option<f64>> {
        match &m.feature(name).unwrap_or_else(|| panic!("{name} missing from {:?}", m.names())).values {
            Stream::Numeric(v) => v.clone(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn per_customer_order_and_product_counts() {
        let config = FeatureConfig {
            full_rollup: true,
            ..Default::default()
        };
        let m = generate_features(&order_fixture(), "customerID", &config).unwrap();
        assert_eq!(m.keys.len(), 4);
        let c2 = m.keys.iter().position(|k| k.to_string() == "2").unwrap();
        assert_eq!(numeric(&m, "customerID.orderID__count")[c2], Some(2.0));
        assert_eq!(numeric(&m, "customerID.orderID.productID__count__sum")[c2], Some(4.0));
        assert_eq!(numeric(&m, "customerID.orderID.productID__count__mean")[c2], Some(2.0));
        let c1 = m.keys.iter().position(|k| k.to_string() == "1").unwrap();
        assert_eq!(numeric(&m, "customerID.orderID__count")[c1], Some(0.0));
        assert_eq!(numeric(&m, "customerID.orderID.productID__count__mean")[c1], None);
    }

    #[test]
    fn anchor_keys_sort_numbers_first() {
        let t = table("t", &[("k", &["10", "9", "A1", "2", "9"])]);
        let ds = Dataset::new(vec![t]).unwrap();
        let keys: Vec<String> = anchor_keys(&ds, "k").iter().map(|v| v.to_string()).collect();
        assert_eq!(keys, vec!["2", "9", "10", "A1"]);
    }

    #[test]
    fn label_is_not_a_feature() {
        let config = FeatureConfig {
            label: Some("segment".into()),
            ..Default::default()
        };
        let m = generate_features(&order_fixture(), "customerID", &config).unwrap();
        assert!(m.names().iter().all(|n| !n.contains("segment")), "{:?}", m.names());
        assert_eq!(generate_features(&order_fixture(), "nope", &config).unwrap_err().code(), "UnknownAnchor");
    }
}
