//! Multi-column structure: near-FDs, schema trees, associations, linear
//! constraints.

pub mod assoc;
pub mod constraints;
pub mod fd;
pub mod schema;

pub use assoc::{
    association_score, build_association_graph, goodman_kruskal_tau, AssocEdge, AssocKind,
    AssocScore, AssociationGraph,
};
pub use constraints::{mine_linear_constraints, ConstraintConfig, LinearConstraint};
pub use fd::{mine_near_fds, FdConfig, NearFd, ROW_ID};
pub use schema::{build_schema_tree, EdgeKind, SchemaEdge, SchemaNode, SchemaTree};
