//! Path instance expansion and roll-up aggregation toward the anchor.

use std::collections::HashMap;

use super::aggregate::Aggregator;
use super::transform::Stream;
use crate::error::{Error, Result};
use crate::relation::{Cardinality, FeaturePath, RelationGraph};
use crate::table::{Dataset, Value};

/// Column names along the path, anchor first.
pub(crate) fn path_columns(path: &FeaturePath) -> Vec<&str> {
    std::iter::once(path.anchor.as_str())
        .chain(path.steps.iter().map(|s| s.to.as_str()))
        .collect()
}

/// All value tuples `(anchor, v1, ..., vL)` realising the path, anchors in
/// the given order. Each step joins the tuple so far with the step's table
/// on every path column that table has. One-to-one steps and steps into a
/// key column yield distinct values; other one-to-many steps keep one value
/// per matching row. Nulls never join.
pub fn expand_path(
    dataset: &Dataset,
    graph: &RelationGraph,
    path: &FeaturePath,
    anchors: &[Value],
) -> Result<Vec<Vec<Value>>> {
    let cols = path_columns(path);
    let mut inst: Vec<Vec<Value>> = anchors.iter().map(|a| vec![a.clone()]).collect();
    for (i, step) in path.steps.iter().enumerate() {
        let table = dataset
            .table(&step.table)
            .ok_or_else(|| Error::MissingJoinColumn(step.from.clone()))?;
        let bound: Vec<(usize, usize)> = cols[..=i]
            .iter()
            .enumerate()
            .filter_map(|(p, c)| table.column_index(c).map(|ci| (p, ci)))
            .collect();
        if !bound.iter().any(|&(p, _)| p == i) {
            return Err(Error::MissingJoinColumn(step.from.clone()));
        }
        let to = table
            .column_index(&step.to)
            .ok_or_else(|| Error::MissingJoinColumn(step.to.clone()))?;
        let distinct = step.cardinality == Cardinality::OneToOne || graph.is_key_column_of(&step.table, &step.to);

        let columns = table.columns();
        let mut index: HashMap<Vec<&Value>, Vec<&Value>> = HashMap::new();
        for r in 0..table.row_count() {
            let key: Vec<&Value> = bound.iter().map(|&(_, ci)| &columns[ci].values[r]).collect();
            if key.iter().any(|v| v.is_null()) {
                continue;
            }
            let v = &columns[to].values[r];
            let slot = index.entry(key).or_default();
            if !distinct || !slot.contains(&v) {
                slot.push(v);
            }
        }
        let mut next = Vec::with_capacity(inst.len());
        for tuple in &inst {
            let key: Vec<&Value> = bound.iter().map(|&(p, _)| &tuple[p]).collect();
            if key.iter().any(|v| v.is_null()) {
                continue;
            }
            if let Some(vals) = index.get(&key) {
                for v in vals {
                    let mut t = tuple.clone();
                    t.push((*v).clone());
                    next.push(t);
                }
            }
        }
        inst = next;
    }
    Ok(inst)
}

/// Groups tuples by their first `len` values, keeping first-seen order.
pub(crate) fn group_by_prefix(keys: &[Vec<Value>], len: usize) -> (Vec<Vec<Value>>, Vec<Vec<usize>>) {
    let mut ids: HashMap<&[Value], usize> = HashMap::new();
    let mut prefixes = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (i, k) in keys.iter().enumerate() {
        let p = &k[..len];
        let id = *ids.entry(p).or_insert_with(|| {
            prefixes.push(p.to_vec());
            members.push(Vec::new());
            prefixes.len() - 1
        });
        members[id].push(i);
    }
    (prefixes, members)
}

/// A derived stream with its aggregation chain (innermost first).
#[derive(Debug, Clone)]
pub struct RolledStream {
    pub transform: Option<String>,
    pub aggregators: Vec<Aggregator>,
    pub values: Stream,
}

fn aggregate(agg: Aggregator, s: &Stream) -> Option<f64> {
    match s {
        Stream::Numeric(v) => agg.numeric(v),
        Stream::Text(v) => agg.nominal(v),
    }
}

/// Rolls per-tuple streams up to one value per anchor.
///
/// One-to-many steps are processed from the terminal back toward the anchor;
/// at each, the current streams are aggregated per prefix of the path ending
/// at that step's source. The first aggregation uses the full numeric or
/// nominal set; later ones use `min, max, mean`, or the full numeric set
/// when `full_rollup` is set. Anchors without tuples get the outermost
/// aggregate of an empty group (Null for a path without one-to-many steps).
pub fn roll_up(
    path: &FeaturePath,
    tuples: &[Vec<Value>],
    streams: Vec<(Option<String>, Stream)>,
    anchors: &[Value],
    full_rollup: bool,
) -> Vec<RolledStream> {
    let many: Vec<usize> = path
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| s.cardinality == Cardinality::OneToMany)
        .map(|(i, _)| i)
        .collect();
    let mut keys: Vec<Vec<Value>> = tuples.to_vec();
    let mut current: Vec<RolledStream> = streams
        .into_iter()
        .map(|(transform, values)| RolledStream {
            transform,
            aggregators: Vec::new(),
            values,
        })
        .collect();
    for (level, &i) in many.iter().rev().enumerate() {
        let (prefixes, members) = group_by_prefix(&keys, i + 1);
        let mut next = Vec::new();
        for s in &current {
            let set: &[Aggregator] = match (level, &s.values) {
                (0, Stream::Numeric(_)) => &Aggregator::NUMERIC,
                (0, Stream::Text(_)) => &Aggregator::NOMINAL,
                _ if full_rollup => &Aggregator::NUMERIC,
                _ => &Aggregator::ROLLUP,
            };
            for &agg in set {
                let vals = members.iter().map(|m| aggregate(agg, &s.values.select(m))).collect();
                let mut aggregators = s.aggregators.clone();
                aggregators.push(agg);
                next.push(RolledStream {
                    transform: s.transform.clone(),
                    aggregators,
                    values: Stream::Numeric(vals),
                });
            }
        }
        current = next;
        keys = prefixes;
    }

    let mut first: HashMap<&Value, usize> = HashMap::new();
    for (i, k) in keys.iter().enumerate() {
        first.entry(&k[0]).or_insert(i);
    }
    let rows: Vec<Option<usize>> = anchors.iter().map(|a| first.get(a).copied()).collect();
    current
        .into_iter()
        .map(|s| {
            let empty = s.aggregators.last().and_then(|a| a.numeric(&[]));
            let values = match &s.values {
                Stream::Numeric(v) => Stream::Numeric(rows.iter().map(|r| r.map_or(empty, |i| v[i])).collect()),
                Stream::Text(v) => Stream::Text(rows.iter().map(|r| r.and_then(|i| v[i].clone())).collect()),
            };
            RolledStream { values, ..s }
        })
        .collect()
}
