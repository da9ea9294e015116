//! Schema trees: functional-dependency structure rooted at a virtual row id.
//!
//! Construction:
//! 1. The root is the row id. Its children are the members of a
//!    minimum-cardinality candidate key (first in lexicographic column
//!    order); together they determine the row id.
//! 2. Level by level, every unattached column is hung under the first node
//!    (level order, then column order) that determines it.
//! 3. Under each parent, dependents that determine the parent back get their
//!    own `↔` node; among the rest, the smallest set that jointly determines
//!    the parent becomes one `↔` set node; the others get `→` nodes.
//! 4. Columns determined only by the whole key hang off the root with `→`.

use serde::{Deserialize, Serialize};

use super::fd::{check_cap, combinations, Encoded, FdConfig, ROW_ID};
use crate::error::Result;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Bidirectional,
    Directional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaNode {
    pub id: usize,
    pub columns: Vec<String>,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaEdge {
    pub parent: usize,
    pub child: usize,
    pub kind: EdgeKind,
    pub violation_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaTree {
    pub table: String,
    /// Node 0 is the row id.
    pub nodes: Vec<SchemaNode>,
    pub edges: Vec<SchemaEdge>,
    pub key: Vec<String>,
    /// Fraction of rows that would have to go for `key` to be exact.
    pub key_violation: f64,
}

impl SchemaTree {
    pub fn node(&self, id: usize) -> &SchemaNode {
        &self.nodes[id]
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &SchemaEdge> {
        self.edges.iter().filter(move |e| e.parent == id)
    }

    /// Finds the node holding exactly this column set (order-insensitive).
    pub fn find(&self, columns: &[&str]) -> Option<&SchemaNode> {
        let mut want: Vec<&str> = columns.to_vec();
        want.sort_unstable();
        self.nodes.iter().find(|n| {
            let mut have: Vec<&str> = n.columns.iter().map(String::as_str).collect();
            have.sort_unstable();
            have == want
        })
    }

    pub fn edge_between(&self, parent: usize, child: usize) -> Option<&SchemaEdge> {
        self.edges.iter().find(|e| e.parent == parent && e.child == child)
    }

    /// Columns attached directly below the root, outside the key.
    pub fn composite_dependents(&self) -> Vec<&str> {
        self.children(0)
            .filter(|e| e.kind == EdgeKind::Directional)
            .flat_map(|e| self.nodes[e.child].columns.iter().map(String::as_str))
            .collect()
    }
}

/// Largest candidate-key size searched before falling back to all columns.
const MAX_KEY_SIZE: usize = 4;
/// Largest joint-determinant set searched under one parent.
const MAX_SET_SIZE: usize = 3;

pub fn build_schema_tree(table: &Table, config: &FdConfig) -> Result<SchemaTree> {
    let d = table.columns().len();
    check_cap(d, config)?;
    let enc = Encoded::new(table);
    let eps = config.epsilon + 1e-12;

    let (key, key_violation) = (1..=MAX_KEY_SIZE.min(d))
        .flat_map(|k| combinations(d, k))
        .map(|c| {
            let v = enc.violation(&c, None);
            (c, v)
        })
        .find(|(_, v)| *v <= eps)
        .unwrap_or_else(|| {
            let all: Vec<usize> = (0..d).collect();
            let v = enc.violation(&all, None);
            (all, v)
        });

    let mut nodes = vec![SchemaNode {
        id: 0,
        columns: vec![ROW_ID.to_string()],
        level: 0,
    }];
    let mut node_cols: Vec<Vec<usize>> = vec![Vec::new()];
    let mut edges = Vec::new();
    for &k in &key {
        nodes.push(SchemaNode {
            id: nodes.len(),
            columns: vec![enc.names[k].clone()],
            level: 1,
        });
        node_cols.push(vec![k]);
        edges.push(SchemaEdge {
            parent: 0,
            child: nodes.len() - 1,
            kind: EdgeKind::Bidirectional,
            violation_fraction: key_violation,
        });
    }

    let mut attached: Vec<bool> = (0..d).map(|c| key.contains(&c)).collect();
    let mut frontier: Vec<usize> = (1..nodes.len()).collect();
    let mut level = 1;
    while !frontier.is_empty() {
        // Assign each unattached column to the first frontier node determining it.
        let mut deps: Vec<Vec<usize>> = vec![Vec::new(); frontier.len()];
        for c in 0..d {
            if attached[c] {
                continue;
            }
            if let Some(fi) = frontier
                .iter()
                .position(|&n| enc.violation(&node_cols[n], Some(c)) <= eps)
            {
                deps[fi].push(c);
                attached[c] = true;
            }
        }
        let mut next = Vec::new();
        for (fi, &parent) in frontier.iter().enumerate() {
            let pcols = node_cols[parent].clone();
            let mut rest = Vec::new();
            let mut groups: Vec<(Vec<usize>, EdgeKind, f64)> = Vec::new();
            for &c in &deps[fi] {
                let back = enc.set_violation(&[c], &pcols);
                if back <= eps {
                    let fwd = enc.violation(&pcols, Some(c));
                    groups.push((vec![c], EdgeKind::Bidirectional, fwd.max(back)));
                } else {
                    rest.push(c);
                }
            }
            let joint = (2..=MAX_SET_SIZE.min(rest.len()))
                .flat_map(|k| combinations(rest.len(), k))
                .map(|idx| idx.iter().map(|&i| rest[i]).collect::<Vec<usize>>())
                .find(|set| enc.set_violation(set, &pcols) <= eps);
            if let Some(set) = &joint {
                let back = enc.set_violation(set, &pcols);
                let fwd = enc.set_violation(&pcols, set);
                groups.push((set.clone(), EdgeKind::Bidirectional, fwd.max(back)));
            }
            for &c in &rest {
                if joint.as_ref().is_some_and(|s| s.contains(&c)) {
                    continue;
                }
                groups.push((vec![c], EdgeKind::Directional, enc.violation(&pcols, Some(c))));
            }
            groups.sort_by_key(|(cols, _, _)| cols[0]);
            for (cols, kind, v) in groups {
                let id = nodes.len();
                nodes.push(SchemaNode {
                    id,
                    columns: cols.iter().map(|&c| enc.names[c].clone()).collect(),
                    level: level + 1,
                });
                node_cols.push(cols);
                edges.push(SchemaEdge {
                    parent,
                    child: id,
                    kind,
                    violation_fraction: v,
                });
                next.push(id);
            }
        }
        frontier = next;
        level += 1;
    }

    for c in 0..d {
        if !attached[c] {
            let id = nodes.len();
            nodes.push(SchemaNode {
                id,
                columns: vec![enc.names[c].clone()],
                level: 1,
            });
            node_cols.push(vec![c]);
            edges.push(SchemaEdge {
                parent: 0,
                child: id,
                kind: EdgeKind::Directional,
                violation_fraction: enc.violation(&key, Some(c)),
            });
        }
    }

    Ok(SchemaTree {
        table: table.name().to_string(),
        nodes,
        edges,
        key: key.iter().map(|&k| enc.names[k].clone()).collect(),
        key_violation,
    })
}
