//! Graphs as partially joinable finite maps, with everything built on top
//! executable and self-checking.
//!
//! The algebra ([`partial_graph`]) represents a graph as a finite map from
//! nodes to content/adjacency pairs, joinable only when domains are
//! disjoint, with combinators that distribute over that join. A simulated
//! tagged-cell heap ([`heap_model`]) lays graphs out as pointer structures
//! and abstracts them back. On top of the heap run two classic pointer
//! algorithms, each instrumented against its own correctness argument:
//! stackless marking by edge reversal ([`schorr_waite`]) with a six-clause
//! loop invariant audited at every loop head, and union-find by parent
//! pointers ([`union_find`]) with a per-operation set-shape check. The
//! [`oracles`] module cross-checks all of it with independent reference
//! implementations and deterministic generators, and [`laws`] packages the
//! algebra's equational theory as a runnable suite, including exhaustive
//! enumeration over a three-node universe.

pub mod examples;
pub mod heap_model;
pub mod laws;
pub mod oracles;
pub mod partial_graph;
pub mod schorr_waite;
pub mod union_find;

pub use partial_graph::{
    GraphError, Join, Kind, Mark, MarkGraph, Node, NodeSet, PartialGraph, UnitGraph, NULL,
};
