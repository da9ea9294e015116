//! DOT renderings of schema trees and association graphs.

use std::fmt::Write;

use crate::structure::{AssociationGraph, EdgeKind, SchemaTree, ROW_ID};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// One cluster per table; `↔` edges are drawn with arrowheads at both ends.
pub fn schema_dot(trees: &[SchemaTree]) -> String {
    let mut s = String::from("digraph schema {\n  node [shape=box];\n");
    for (t, tree) in trees.iter().enumerate() {
        let _ = writeln!(s, "  subgraph cluster_{t} {{\n    label={};", quote(&tree.table));
        for n in &tree.nodes {
            let label = if n.id == 0 { ROW_ID.to_string() } else { n.columns.join(", ") };
            let _ = writeln!(s, "    t{t}n{} [label={}];", n.id, quote(&label));
        }
        for e in &tree.edges {
            let dir = match e.kind {
                EdgeKind::Bidirectional => "both",
                EdgeKind::Directional => "forward",
            };
            let _ = writeln!(s, "    t{t}n{} -> t{t}n{} [dir={dir}];", e.parent, e.child);
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

/// Edges labelled with measure and score; nodes are prefixed by table.
pub fn association_dot(graphs: &[(String, AssociationGraph)]) -> String {
    let mut s = String::from("digraph associations {\n  node [shape=ellipse];\n");
    for (t, (table, g)) in graphs.iter().enumerate() {
        let _ = writeln!(s, "  subgraph cluster_{t} {{\n    label={};", quote(table));
        for n in &g.nodes {
            let _ = writeln!(s, "    {} [label={}];", quote(&format!("{table}.{n}")), quote(n));
        }
        for e in &g.edges {
            let _ = writeln!(
                s,
                "    {} -> {} [label={}];",
                quote(&format!("{table}.{}", e.from)),
                quote(&format!("{table}.{}", e.to)),
                quote(&format!("{} {:.3}", e.kind.label(), e.score))
            );
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{build_schema_tree, FdConfig};
    use crate::table::{Column, Table};

    #[test]
    fn schema_dot_marks_bidirectional_edges() {
        let t = Table::new(
            "t",
            vec![
                Column::from_strs("id", &["1", "2", "3"].map(Some)),
                Column::from_strs("code", &["a", "b", "c"].map(Some)),
            ],
        )
        .unwrap();
        let tree = build_schema_tree(&t, &FdConfig::default()).unwrap();
        let dot = schema_dot(&[tree]);
        assert!(dot.starts_with("digraph schema {"));
        assert!(dot.contains("dir=both"));
        assert!(dot.contains(&format!("label=\"{ROW_ID}\"")));
    }

    #[test]
    fn quoting_escapes() {
        assert_eq!(quote("a\"b"), "\"a\\\"b\"");
    }
}
