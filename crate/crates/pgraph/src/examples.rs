//! Small graphs and scripts used across the documentation, the unit tests,
//! and the acceptance suite.
//!
//! The fixtures are frozen: several tests pin exact entry tables, traces, and
//! register values against them, so changing a fixture here means revisiting
//! those expectations.

use crate::partial_graph::{Kind, Mark, MarkGraph, Node, PartialGraph, UnitGraph};
use crate::union_find::{UfOp, UfScript};

/// Build a general graph from `(id, mark, successors)` rows.
///
/// # Panics
///
/// Panics on invalid rows (null or duplicate ids); fixtures are static data,
/// so construction failures are programming errors.
pub fn general_graph(rows: &[(u64, Mark, &[u64])]) -> MarkGraph {
    PartialGraph::from_entries(
        Kind::General,
        rows.iter().map(|&(x, m, adj)| {
            (Node(x), m, adj.iter().copied().map(Node).collect())
        }),
    )
    .expect("fixture rows are well formed")
}

/// Build a binary graph from `(id, mark, left, right)` rows. Id 0 in a child
/// position stands for an absent child.
///
/// # Panics
///
/// Panics on invalid rows, as [`general_graph`] does.
pub fn binary_graph(rows: &[(u64, Mark, u64, u64)]) -> MarkGraph {
    PartialGraph::from_entries(
        Kind::Binary,
        rows.iter()
            .map(|&(x, m, l, r)| (Node(x), m, vec![Node(l), Node(r)])),
    )
    .expect("fixture rows are well formed")
}

/// Build a unary graph from `(id, successor)` rows.
///
/// # Panics
///
/// Panics on invalid rows, as [`general_graph`] does.
pub fn unary_graph(rows: &[(u64, u64)]) -> UnitGraph {
    PartialGraph::from_entries(
        Kind::Unary,
        rows.iter().map(|&(x, s)| (Node(x), (), vec![Node(s)])),
    )
    .expect("fixture rows are well formed")
}

/// The running four-node example: a graph over nodes 1..=4 split into two
/// disjoint pieces.
///
/// The left piece holds only node 1, marked `X`, with edges to 1, 2 and 3
/// (the latter two dangle). The right piece holds nodes 2, 3 and 4, all
/// unmarked, with an edge from 4 dangling back to 1. Neither piece is closed
/// on its own; their join is.
pub fn split_pair() -> (MarkGraph, MarkGraph) {
    let g1 = general_graph(&[(1, Mark::X, &[1, 2, 3])]);
    let g2 = general_graph(&[
        (2, Mark::O, &[]),
        (3, Mark::O, &[2, 4]),
        (4, Mark::O, &[1]),
    ]);
    (g1, g2)
}

/// Node `k` of the nine-node demo tree, for `k` in 1..=9. Ids are spaced
/// three apart (node `k` is id `3k`) so the tree can be laid out on the heap.
pub fn demo_node(k: u64) -> Node {
    assert!((1..=9).contains(&k), "the demo tree has nodes 1..=9");
    Node(3 * k)
}

/// A nine-node unmarked binary tree, the standard marking input.
///
/// Numbering follows depth-first, left-to-right order from the root, node 1:
///
/// ```text
///             1
///           /   \
///          2     9
///        /   \
///       3     5
///       |    / \
///       4   6   8
///           |
///           7
/// ```
pub fn demo_tree() -> MarkGraph {
    let n = demo_node;
    binary_graph(&[
        (n(1).0, Mark::O, n(2).0, n(9).0),
        (n(2).0, Mark::O, n(3).0, n(5).0),
        (n(3).0, Mark::O, n(4).0, 0),
        (n(4).0, Mark::O, 0, 0),
        (n(5).0, Mark::O, n(6).0, n(8).0),
        (n(6).0, Mark::O, n(7).0, 0),
        (n(7).0, Mark::O, 0, 0),
        (n(8).0, Mark::O, 0, 0),
        (n(9).0, Mark::O, 0, 0),
    ])
}

/// The demo tree eight operations into a marking run: nodes 3 and 4 are done
/// (`X`), the trail 1, 2, 5 is on the stack with its edges reversed, and the
/// subtree under node 6 plus node 8 and node 9 are still untouched.
///
/// At this point the traversal registers hold `t` = node 6 and `p` = node 5,
/// and the reversed-edge trail from `p` reads node 5, node 2, node 1.
pub fn demo_tree_midrun() -> MarkGraph {
    let n = demo_node;
    binary_graph(&[
        (n(1).0, Mark::L, 0, n(9).0),
        (n(2).0, Mark::R, n(3).0, n(1).0),
        (n(3).0, Mark::X, n(4).0, 0),
        (n(4).0, Mark::X, 0, 0),
        (n(5).0, Mark::L, n(2).0, n(8).0),
        (n(6).0, Mark::O, n(7).0, 0),
        (n(7).0, Mark::O, 0, 0),
        (n(8).0, Mark::O, 0, 0),
        (n(9).0, Mark::O, 0, 0),
    ])
}

/// The stack of the midrun state, bottom first, as node ids.
pub fn demo_tree_midrun_stack() -> Vec<Node> {
    vec![demo_node(1), demo_node(2), demo_node(5)]
}

/// Two flat inverted trees over nodes 1..=7: nodes 1, 2, 3 form one set with
/// representative 1, and nodes 4..=7 form another with representative 4.
/// Every member points directly at its root, and each root points at itself.
pub fn forest7() -> UnitGraph {
    unary_graph(&[
        (1, 1),
        (2, 1),
        (3, 1),
        (4, 4),
        (5, 4),
        (6, 4),
        (7, 4),
    ])
}

/// A union-find script that builds [`forest7`] from scratch (seven fresh
/// elements, then five unions), merges the two sets with `union a d`, and
/// looks up `b`. The final lookup must chase two parent links and answer the
/// representative of `d`'s tree.
pub fn forest7_script() -> UfScript {
    let new = |h: &str| UfOp::New(h.to_string());
    let union = |a: &str, b: &str| UfOp::Union(a.to_string(), b.to_string());
    let find = |h: &str| UfOp::Find(h.to_string());
    UfScript {
        ops: vec![
            new("a"),
            new("b"),
            new("c"),
            new("d"),
            new("e"),
            new("f"),
            new("g"),
            union("b", "a"),
            union("c", "a"),
            union("e", "d"),
            union("f", "d"),
            union("g", "d"),
            find("c"),
            union("a", "d"),
            find("b"),
        ],
    }
}
