//! Relation graphs: column-level cardinality links derived from schema
//! trees, merged across tables by shared column names, and the anchor-rooted
//! paths that feature generation walks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::{profile_column, ProfileConfig, TopLevel};
use crate::structure::{EdgeKind, SchemaTree};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cardinality {
    OneToOne,
    OneToMany,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationNode {
    pub name: String,
    /// Owning table and the column's inferred top-level type there.
    pub tables: Vec<(String, TopLevel)>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationEdge {
    pub from: String,
    pub to: String,
    pub cardinality: Cardinality,
    pub table: String,
    /// Both endpoints determine each other (interchangeable keys).
    pub equivalence: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RelationGraph {
    /// Sorted by name.
    pub nodes: Vec<RelationNode>,
    /// Sorted, without exact duplicates.
    pub edges: Vec<RelationEdge>,
    /// Candidate key of each table.
    pub keys: BTreeMap<String, Vec<String>>,
}

impl RelationGraph {
    pub fn node(&self, name: &str) -> Option<&RelationNode> {
        self.nodes
            .binary_search_by(|n| n.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn has_edge(&self, from: &str, to: &str, cardinality: Cardinality) -> bool {
        self.edges
            .iter()
            .any(|e| e.from == from && e.to == to && e.cardinality == cardinality)
    }

    /// Whether `column` belongs to the candidate key of any table.
    pub fn is_key_column(&self, column: &str) -> bool {
        self.keys.values().any(|k| k.iter().any(|c| c == column))
    }

    pub fn is_key_column_of(&self, table: &str, column: &str) -> bool {
        self.keys.get(table).is_some_and(|k| k.iter().any(|c| c == column))
    }

    fn normalize(&mut self) {
        self.nodes.sort();
        self.edges.sort();
        self.edges.dedup();
    }
}

fn edge(from: &str, to: &str, cardinality: Cardinality, table: &str, equivalence: bool) -> RelationEdge {
    RelationEdge {
        from: from.to_string(),
        to: to.to_string(),
        cardinality,
        table: table.to_string(),
        equivalence,
    }
}

/// Relation graph of one table.
///
/// Composite-key members are linked pairwise one-to-many. Each tree edge
/// below the key gives one-to-one links from the parent's columns to the
/// child's; a single-column `↔` child also links back (equivalence).
/// Columns determined only by the whole composite key get one-to-many links
/// from every key member. Under a multi-column parent, children are linked
/// one-to-many from each parent member as well.
pub fn to_relation_graph(tree: &SchemaTree, table: &Table) -> RelationGraph {
    let cfg = ProfileConfig::default();
    let t = table.name();
    let nodes = table
        .columns()
        .iter()
        .map(|c| RelationNode {
            name: c.name.clone(),
            tables: vec![(t.to_string(), profile_column(c, &cfg).type_tag.top_level)],
        })
        .collect();
    let mut edges = Vec::new();
    for a in &tree.key {
        for b in &tree.key {
            if a != b {
                edges.push(edge(a, b, Cardinality::OneToMany, t, false));
            }
        }
    }
    for e in &tree.edges {
        let child = &tree.node(e.child).columns;
        if e.parent == 0 {
            if e.kind == EdgeKind::Directional {
                for k in &tree.key {
                    for c in child {
                        edges.push(edge(k, c, Cardinality::OneToMany, t, false));
                    }
                }
            }
            continue;
        }
        let parent = &tree.node(e.parent).columns;
        if parent.len() > 1 {
            for p in parent {
                for c in child {
                    edges.push(edge(p, c, Cardinality::OneToMany, t, false));
                }
            }
            continue;
        }
        let p = &parent[0];
        let equivalent = e.kind == EdgeKind::Bidirectional && child.len() == 1;
        for c in child {
            edges.push(edge(p, c, Cardinality::OneToOne, t, equivalent));
            if equivalent {
                edges.push(edge(c, p, Cardinality::OneToOne, t, true));
            }
        }
    }
    let mut g = RelationGraph {
        nodes,
        edges,
        keys: BTreeMap::from([(t.to_string(), tree.key.clone())]),
    };
    g.normalize();
    g
}

fn compatible(a: TopLevel, b: TopLevel) -> bool {
    let numeric = |t| matches!(t, TopLevel::Integer | TopLevel::Numeric);
    a == b || (numeric(a) && numeric(b))
}

/// Union of graphs keyed by column name. A column that is textual in one
/// table and numeric in another is a [`Error::NameCollision`] unless
/// `prefer_first` is set, in which case the later table's links through
/// that column are dropped.
pub fn merge_graphs(graphs: &[RelationGraph], prefer_first: bool) -> Result<RelationGraph> {
    let mut nodes: BTreeMap<String, Vec<(String, TopLevel)>> = BTreeMap::new();
    let mut rejected: BTreeSet<(String, String)> = BTreeSet::new();
    let mut keys = BTreeMap::new();
    for g in graphs {
        keys.extend(g.keys.iter().map(|(k, v)| (k.clone(), v.clone())));
        for n in &g.nodes {
            let entry = nodes.entry(n.name.clone()).or_default();
            for (table, ty) in &n.tables {
                if entry.iter().any(|(t, _)| t == table) {
                    continue;
                }
                if let Some((ft, fty)) = entry.first() {
                    if !compatible(*fty, *ty) {
                        if prefer_first {
                            rejected.insert((n.name.clone(), table.clone()));
                            continue;
                        }
                        return Err(Error::NameCollision {
                            name: n.name.clone(),
                            first: format!("{fty:?}").to_lowercase(),
                            first_table: ft.clone(),
                            second: format!("{ty:?}").to_lowercase(),
                            second_table: table.clone(),
                        });
                    }
                }
                entry.push((table.clone(), *ty));
            }
        }
    }
    let edges = graphs
        .iter()
        .flat_map(|g| g.edges.iter())
        .filter(|e| {
            !rejected.contains(&(e.from.clone(), e.table.clone()))
                && !rejected.contains(&(e.to.clone(), e.table.clone()))
        })
        .cloned()
        .collect();
    let mut g = RelationGraph {
        nodes: nodes
            .into_iter()
            .map(|(name, mut tables)| {
                tables.sort();
                RelationNode { name, tables }
            })
            .collect(),
        edges,
        keys,
    };
    g.normalize();
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub from: String,
    pub to: String,
    pub cardinality: Cardinality,
    /// Table whose rows realise the step.
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeaturePath {
    pub anchor: String,
    pub steps: Vec<PathStep>,
    pub many_count: usize,
    pub terminal: String,
}

impl FeaturePath {
    /// `anchor.step1...terminal`.
    pub fn dotted(&self) -> String {
        let mut s = self.anchor.clone();
        for st in &self.steps {
            s.push('.');
            s.push_str(&st.to);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathConfig {
    pub max_depth: usize,
    pub max_many: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            max_depth: 4,
            max_many: 2,
        }
    }
}

struct Traversal {
    card: Cardinality,
    table: String,
    equivalence: bool,
}

/// Outgoing traversable links of every node.
///
/// Stored links are followed as-is. A one-to-one link `v → u` is also
/// followed backwards as `u → v` one-to-many, but only when `u` is a key
/// column of some table: a key value fans out to the rows referencing it.
/// Parallel links collapse to one, preferring one-to-one, then the first
/// table by name.
fn adjacency(graph: &RelationGraph) -> BTreeMap<&str, BTreeMap<&str, Traversal>> {
    let mut adj: BTreeMap<&str, BTreeMap<&str, Traversal>> = BTreeMap::new();
    fn offer<'a>(adj: &mut BTreeMap<&'a str, BTreeMap<&'a str, Traversal>>, from: &'a str, to: &'a str, t: Traversal) {
        let slot = adj.entry(from).or_default();
        match slot.get(to) {
            Some(cur) if (cur.card, &cur.table) <= (t.card, &t.table) => {}
            _ => {
                slot.insert(to, t);
            }
        }
    }
    for e in &graph.edges {
        offer(
            &mut adj,
            &e.from,
            &e.to,
            Traversal {
                card: e.cardinality,
                table: e.table.clone(),
                equivalence: e.equivalence,
            },
        );
        if e.cardinality == Cardinality::OneToOne && !e.equivalence && graph.is_key_column(&e.to) {
            offer(
                &mut adj,
                &e.to,
                &e.from,
                Traversal {
                    card: Cardinality::OneToMany,
                    table: e.table.clone(),
                    equivalence: false,
                },
            );
        }
    }
    adj
}

/// Depth-first enumeration of simple anchor-rooted paths, children in
/// lexicographic order. Every prefix is itself reported. A link between
/// interchangeable keys may only be the final step.
pub fn enumerate_paths(graph: &RelationGraph, anchor: &str, config: &PathConfig) -> Result<Vec<FeaturePath>> {
    if graph.node(anchor).is_none() {
        return Err(Error::UnknownAnchor(anchor.to_string()));
    }
    let adj = adjacency(graph);
    let mut out = Vec::new();
    let mut steps: Vec<PathStep> = Vec::new();
    let mut visited: BTreeSet<&str> = BTreeSet::from([anchor]);

    #[allow(clippy::too_many_arguments)]
    fn walk<'a>(
        node: &'a str,
        anchor: &str,
        adj: &'a BTreeMap<&str, BTreeMap<&str, Traversal>>,
        config: &PathConfig,
        many: usize,
        steps: &mut Vec<PathStep>,
        visited: &mut BTreeSet<&'a str>,
        out: &mut Vec<FeaturePath>,
    ) {
        if steps.len() >= config.max_depth {
            return;
        }
        let Some(next) = adj.get(node) else { return };
        for (&to, t) in next {
            if visited.contains(to) {
                continue;
            }
            let m = many + (t.card == Cardinality::OneToMany) as usize;
            if m > config.max_many {
                continue;
            }
            steps.push(PathStep {
                from: node.to_string(),
                to: to.to_string(),
                cardinality: t.card,
                table: t.table.clone(),
            });
            out.push(FeaturePath {
                anchor: anchor.to_string(),
                steps: steps.clone(),
                many_count: m,
                terminal: to.to_string(),
            });
            if !t.equivalence {
                visited.insert(to);
                walk(to, anchor, adj, config, m, steps, visited, out);
                visited.remove(to);
            }
            steps.pop();
        }
    }

    walk(anchor, anchor, &adj, config, 0, &mut steps, &mut visited, &mut out);
    Ok(out)
}

/// DOT rendering: one-to-many links are drawn with a double arrowhead.
pub fn relation_dot(graph: &RelationGraph) -> String {
    let mut s = String::from("digraph relations {\n  rankdir=LR;\n  node [shape=box];\n");
    for n in &graph.nodes {
        let _ = writeln!(s, "  \"{}\";", n.name);
    }
    for e in &graph.edges {
        let head = match e.cardinality {
            Cardinality::OneToOne => "normal",
            Cardinality::OneToMany => "normalnormal",
        };
        let _ = writeln!(
            s,
            "  \"{}\" -> \"{}\" [arrowhead={head}, label=\"{}\"];",
            e.from, e.to, e.table
        );
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{build_schema_tree, FdConfig};
    use crate::table::Column;

    fn table(name: &str, cols: &[(&str, Vec<String>)]) -> Table {
        Table::new(
            name,
            cols.iter()
                .map(|(n, v)| Column::from_strs(*n, &v.iter().map(|s| Some(s.as_str())).collect::<Vec<_>>()))
                .collect(),
        )
        .unwrap()
    }

    fn graph_of(t: &Table) -> RelationGraph {
        to_relation_graph(&build_schema_tree(t, &FdConfig::default()).unwrap(), t)
    }

    fn strs(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_key_gives_star() {
        let t = table(
            "c",
            &[("id", strs(&["1", "2", "3", "4"])), ("x", strs(&["a", "a", "b", "b"])), ("y", strs(&["p", "q", "p", "p"]))],
        );
        let g = graph_of(&t);
        assert_eq!(g.edges.len(), 2);
        assert!(g.has_edge("id", "x", Cardinality::OneToOne));
        assert!(g.has_edge("id", "y", Cardinality::OneToOne));
    }

    #[test]
    fn key_only_table_links_pairwise() {
        let t = table("k", &[("a", strs(&["1", "1", "2", "2"])), ("b", strs(&["x", "y", "x", "y"]))]);
        let g = graph_of(&t);
        assert_eq!(g.edges.len(), 2);
        assert!(g.has_edge("a", "b", Cardinality::OneToMany));
        assert!(g.has_edge("b", "a", Cardinality::OneToMany));
    }

    #[test]
    fn merge_is_idempotent_and_detects_collisions() {
        let a = table("a", &[("id", strs(&["1", "2", "3"])), ("v", strs(&["x", "y", "x"]))]);
        let b = table("b", &[("id", strs(&["p", "q", "r"])), ("w", strs(&["1", "1", "2"]))]);
        let ga = graph_of(&a);
        assert_eq!(merge_graphs(&[ga.clone(), ga.clone()], false).unwrap(), ga);
        let gb = graph_of(&b);
        assert_eq!(merge_graphs(&[ga.clone(), gb.clone()], false).unwrap_err().code(), "NameCollision");
        let m = merge_graphs(&[ga.clone(), gb], true).unwrap();
        assert_eq!(m.node("id").unwrap().tables.len(), 1);
        assert!(!m.edges.iter().any(|e| e.table == "b" && (e.from == "id" || e.to == "id")));
    }

    #[test]
    fn paths_respect_caps_and_are_simple() {
        let parent = table("p", &[("pid", strs(&["1", "2", "3"])), ("region", strs(&["n", "s", "n"]))]);
        let child = table(
            "c",
            &[
                ("cid", strs(&["10", "11", "12", "13", "14", "15"])),
                ("pid", strs(&["1", "1", "2", "3", "3", "3"])),
                ("amt", strs(&["5", "7", "1", "2", "2", "9"])),
            ],
        );
        let g = merge_graphs(&[graph_of(&parent), graph_of(&child)], false).unwrap();
        let paths = enumerate_paths(&g, "pid", &PathConfig::default()).unwrap();
        let dotted: Vec<String> = paths.iter().map(FeaturePath::dotted).collect();
        assert!(dotted.contains(&"pid.cid".to_string()), "{dotted:?}");
        assert!(dotted.contains(&"pid.cid.amt".to_string()));
        assert!(dotted.contains(&"pid.region".to_string()));
        for p in &paths {
            let mut seen = BTreeSet::from([p.anchor.as_str()]);
            assert!(p.steps.iter().all(|s| seen.insert(s.to.as_str())));
            assert_eq!(
                p.many_count,
                p.steps.iter().filter(|s| s.cardinality == Cardinality::OneToMany).count()
            );
        }
        assert!(enumerate_paths(&g, "pid", &PathConfig { max_depth: 0, max_many: 2 }).unwrap().is_empty());
        let one = enumerate_paths(&g, "pid", &PathConfig { max_depth: 4, max_many: 0 }).unwrap();
        assert!(one.iter().all(|p| p.many_count == 0));
        assert_eq!(enumerate_paths(&g, "nope", &PathConfig::default()).unwrap_err().code(), "UnknownAnchor");
    }
}
