//! Pointer-based union-find over the simulated heap, together with the graph
//! abstractions that make its set structure checkable: summits, loops,
//! cycles, dangling sinks, and preacyclicity.
//!
//! An element is one heap cell holding a parent pointer; a root points at
//! itself. A collection of elements represents a family of disjoint sets
//! exactly when the parent graph is an inverted forest, which the predicates
//! here can decide: the graph must be closed and preacyclic (every cycle is a
//! self-loop). [`check_set`] ties it together, abstracting the members' cells
//! back into a unary graph and testing that the set has exactly one summit,
//! the claimed representative.
//!
//! The operations are deliberately minimal: no ranks, no path compression,
//! and union always makes its second argument the new root.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::heap_model::{abstract_unary, AbstractionError, CellValue, Fault, Heap};
use crate::partial_graph::{Node, NodeSet, PartialGraph, NULL};

/// Unary graphs (one successor per node) as produced by [`abstract_unary`].
pub type UnaryGraph = PartialGraph<()>;

/// The summit of `x`: where chains starting at `x` can end up. Outside the
/// graph the chain is already stuck, so the summit is `x` itself; inside, it
/// is whatever the successors reach as summits once `x` is removed, so a
/// chain that loops back to a removed node stops there.
///
/// Like [`PartialGraph::reach`], this follows the recursive definition
/// directly, removing nodes on the way down and restoring them on backtrack.
pub fn summit<V: Clone>(g: &PartialGraph<V>, x: Node) -> NodeSet {
    let mut acc = NodeSet::new();
    let mut removed = HashSet::new();
    summit_go(g, x, &mut removed, &mut acc);
    acc
}

fn summit_go<V: Clone>(
    g: &PartialGraph<V>,
    x: Node,
    removed: &mut HashSet<Node>,
    acc: &mut NodeSet,
) {
    if removed.contains(&x) || !g.contains(x) {
        acc.insert(x);
        return;
    }
    removed.insert(x);
    for &y in g.adj(x).expect("x is in the graph") {
        summit_go(g, y, removed, acc);
    }
    removed.remove(&x);
}

/// Summits of every node in the graph.
pub fn summits<V: Clone>(g: &PartialGraph<V>) -> NodeSet {
    let mut acc = NodeSet::new();
    let mut removed = HashSet::new();
    for x in g.nodes().iter() {
        summit_go(g, x, &mut removed, &mut acc);
    }
    acc
}

/// Nodes that point directly at themselves.
pub fn loops<V: Clone>(g: &PartialGraph<V>) -> NodeSet {
    g.iter()
        .filter(|(x, _, adj)| adj.contains(x))
        .map(|(x, _, _)| x)
        .collect()
}

/// Nodes that lie on some cycle: `x` is cyclic when following any edge out
/// of `x` can come back around to `x`.
pub fn cycles<V: Clone>(g: &PartialGraph<V>) -> NodeSet {
    g.iter()
        .filter(|&(x, _, adj)| adj.iter().any(|&y| g.reach(y).contains(x)))
        .map(|(x, _, _)| x)
        .collect()
}

/// Edge targets that leave the graph. May contain null.
pub fn dangls<V: Clone>(g: &PartialGraph<V>) -> NodeSet {
    g.sinks().difference(&g.nodes())
}

/// Every cycle is a self-loop.
pub fn preacyclic<V: Clone>(g: &PartialGraph<V>) -> bool {
    cycles(g).is_subset(&loops(g))
}

/// A graph is an inverted forest when every summit is a self-loop: chasing
/// parent pointers from any node ends at a self-looped root, never dangling
/// (not even at null) and never entering a longer cycle. Equivalently, the
/// graph has no dangling targets at all and is preacyclic; mere closure is
/// weaker, since a closed graph may still point at null.
pub fn inverted_forest<V: Clone>(g: &PartialGraph<V>) -> bool {
    summits(g).is_subset(&loops(g))
}

/// Claim that the cells of `members` represent one set with the given
/// representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetWitness {
    pub members: NodeSet,
    pub representative: Node,
}

impl fmt::Display for SetWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (rep {})", self.members, self.representative)
    }
}

/// Why a [`SetWitness`] failed to check out against a heap.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetViolation {
    #[error("abstraction failed: {0}")]
    Abstraction(#[from] AbstractionError),
    #[error("summits are {got}, expected exactly {{{want}}}")]
    Summits { got: NodeSet, want: Node },
    #[error("self-looped roots are {got}, expected exactly {{{want}}}")]
    Loops { got: NodeSet, want: Node },
}

/// Check a set witness against the heap: abstract exactly the members' cells
/// into a unary graph, then require that both the summits and the self-loops
/// of that graph are exactly the claimed representative.
///
/// The abstracted graph's node set equals `members` by construction, so the
/// interesting content is in the two set comparisons.
pub fn check_set(h: &Heap, w: &SetWitness) -> Result<(), SetViolation> {
    let g = abstract_unary(h, &w.members)?;
    let want = NodeSet::singleton(w.representative);
    let got = summits(&g);
    if got != want {
        return Err(SetViolation::Summits { got, want: w.representative });
    }
    let got = loops(&g);
    if got != want {
        return Err(SetViolation::Loops { got, want: w.representative });
    }
    Ok(())
}

/// Allocate a fresh element: one cell, pointed at itself.
pub fn uf_new(h: &mut Heap) -> Node {
    let p = h.alloc(&[CellValue::Addr(NULL)]);
    h.write(p, CellValue::Addr(p)).expect("cell was just allocated");
    p
}

/// Chase parent pointers from `x` until they stabilize, and return the root.
///
/// # Panics
///
/// Panics if the chain does not stabilize within the heap size; the cells do
/// not form an inverted forest then, and the precondition is violated.
pub fn uf_find(h: &Heap, x: Node) -> Result<Node, Fault> {
    let mut steps = 0usize;
    let mut x = x;
    let mut p = h.read_addr(x)?;
    while p != x {
        steps += 1;
        assert!(
            steps <= h.len(),
            "parent chain from {x} does not stabilize: the heap is not an inverted forest"
        );
        x = p;
        p = h.read_addr(x)?;
    }
    Ok(x)
}

/// Graft the tree rooted at `x1` under `x2` and return `x2`, the new root.
/// Both arguments are expected to be roots of disjoint trees; the function
/// itself just redirects one parent pointer.
pub fn uf_union(h: &mut Heap, x1: Node, x2: Node) -> Result<Node, Fault> {
    h.write(x1, CellValue::Addr(x2))?;
    Ok(x2)
}

/// One scripted operation over named handles. Handles are bound by `New` and
/// refer to elements; `Find` and `Union` accept any member of a set, not just
/// its root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UfOp {
    New(String),
    Find(String),
    Union(String, String),
}

impl fmt::Display for UfOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UfOp::New(h) => write!(f, "new {h}"),
            UfOp::Find(h) => write!(f, "find {h}"),
            UfOp::Union(a, b) => write!(f, "union {a} {b}"),
        }
    }
}

/// A sequence of union-find operations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UfScript {
    pub ops: Vec<UfOp>,
}

/// A script that does not make sense, independent of any heap. Indices are
/// 1-based operation ordinals.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("op {index}: handle {handle} is not bound")]
    UnknownHandle { index: usize, handle: String },
    #[error("op {index}: handle {handle} is already bound")]
    HandleRebound { index: usize, handle: String },
    #[error("op {index}: union of two handles already in the same set")]
    UnionSameSet { index: usize },
}

/// Replay failure: either the script itself is ill-formed, or the heap
/// faulted (which, for scripts that pass [`ScriptError`] screening, would be
/// an implementation bug).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("op {index}: {fault}")]
    Fault { index: usize, fault: Fault },
}

/// What one replayed operation did. `result` is the node the operation
/// returned: the fresh element for `New`, the root found for `Find`, the new
/// root for `Union`. `witness` describes the affected set after the
/// operation, and `set_check` is the outcome of [`check_set`] on it.
#[derive(Debug, Clone)]
pub struct ReplayStep {
    pub op: UfOp,
    pub result: Node,
    pub witness: SetWitness,
    pub set_check: Result<(), SetViolation>,
}

/// A finished replay: the per-operation record, the final heap, the nodes in
/// order of allocation (for lining the run up against an oracle), and the
/// final family of sets.
#[derive(Debug, Clone)]
pub struct Replay {
    pub steps: Vec<ReplayStep>,
    pub heap: Heap,
    pub births: Vec<Node>,
    pub sets: Vec<SetWitness>,
}

impl Replay {
    /// True when every per-operation set check passed.
    pub fn all_sets_ok(&self) -> bool {
        self.steps.iter().all(|s| s.set_check.is_ok())
    }
}

/// Run a script against a fresh heap, checking the affected set's witness
/// after every operation.
///
/// The replay keeps its own handle and set bookkeeping purely to know which
/// witness to check and which handles are legal; all set semantics are read
/// back from the heap by [`check_set`] and by the recorded results.
///
/// Script-level `union` normalizes both handles with [`uf_find`] first, so
/// [`uf_union`] always sees two roots. A union of two handles that already
/// share a set is a [`ScriptError`], and generated scripts never contain one.
pub fn replay_script(script: &UfScript) -> Result<Replay, ReplayError> {
    let mut heap = Heap::new();
    let mut births = Vec::new();
    let mut steps = Vec::new();
    // Handle bindings and the member/representative bookkeeping, one entry
    // per live set.
    let mut handles: Vec<(String, Node)> = Vec::new();
    let mut sets: Vec<SetWitness> = Vec::new();

    let node_of = |handles: &[(String, Node)], index: usize, h: &str| {
        handles
            .iter()
            .find(|(name, _)| name == h)
            .map(|&(_, x)| x)
            .ok_or(ScriptError::UnknownHandle { index, handle: h.to_string() })
    };
    let set_of = |sets: &[SetWitness], x: Node| {
        sets.iter()
            .position(|w| w.members.contains(x))
            .expect("every bound node is in exactly one set")
    };
    let fault_at = |index: usize| move |fault: Fault| ReplayError::Fault { index, fault };

    for (i, op) in script.ops.iter().enumerate() {
        let index = i + 1;
        let (result, witness) = match op {
            UfOp::New(name) => {
                if handles.iter().any(|(n, _)| n == name) {
                    return Err(ScriptError::HandleRebound {
                        index,
                        handle: name.clone(),
                    }
                    .into());
                }
                let x = uf_new(&mut heap);
                births.push(x);
                handles.push((name.clone(), x));
                sets.push(SetWitness {
                    members: NodeSet::singleton(x),
                    representative: x,
                });
                (x, sets.last().unwrap().clone())
            }
            UfOp::Find(name) => {
                let x = node_of(&handles, index, name)?;
                let root = uf_find(&heap, x).map_err(fault_at(index))?;
                (root, sets[set_of(&sets, x)].clone())
            }
            UfOp::Union(name1, name2) => {
                let x1 = node_of(&handles, index, name1)?;
                let x2 = node_of(&handles, index, name2)?;
                let (i1, i2) = (set_of(&sets, x1), set_of(&sets, x2));
                if i1 == i2 {
                    return Err(ScriptError::UnionSameSet { index }.into());
                }
                let r1 = uf_find(&heap, x1).map_err(fault_at(index))?;
                let r2 = uf_find(&heap, x2).map_err(fault_at(index))?;
                let root = uf_union(&mut heap, r1, r2).map_err(fault_at(index))?;
                let merged = SetWitness {
                    members: sets[i1].members.union(&sets[i2].members),
                    representative: root,
                };
                sets.remove(i1.max(i2));
                sets.remove(i1.min(i2));
                sets.push(merged.clone());
                (root, merged)
            }
        };
        let set_check = check_set(&heap, &witness);
        steps.push(ReplayStep {
            op: op.clone(),
            result,
            witness,
            set_check,
        });
    }

    Ok(Replay { steps, heap, births, sets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{forest7, forest7_script, unary_graph};
    use crate::heap_model::layout_unary;
    use crate::partial_graph::Node;

    fn ids(xs: &[u64]) -> NodeSet {
        NodeSet::from_ids(xs.iter().copied())
    }

    #[test]
    fn summit_climbs_to_the_root() {
        let g = forest7();
        assert_eq!(summit(&g, Node(3)), ids(&[1]));
        assert_eq!(summit(&g, Node(5)), ids(&[4]));
        assert_eq!(summit(&g, Node(1)), ids(&[1]));
        // Outside the graph the chain is already stuck.
        assert_eq!(summit(&g, Node(9)), ids(&[9]));
        assert_eq!(summits(&g), ids(&[1, 4]));
    }

    #[test]
    fn abstractions_on_the_forest() {
        let g = forest7();
        assert_eq!(loops(&g), ids(&[1, 4]));
        assert_eq!(cycles(&g), ids(&[1, 4]));
        assert!(dangls(&g).is_empty());
        assert!(preacyclic(&g));
        assert!(inverted_forest(&g));
    }

    #[test]
    fn two_cycles_are_not_loops() {
        let g = unary_graph(&[(1, 2), (2, 1)]);
        assert!(loops(&g).is_empty());
        assert_eq!(cycles(&g), ids(&[1, 2]));
        assert!(!preacyclic(&g));
        // Each node's chain wraps around to itself once the other is removed.
        assert_eq!(summit(&g, Node(1)), ids(&[1]));
        assert_eq!(summits(&g), ids(&[1, 2]));
    }

    #[test]
    fn dangling_chains_summit_outside_the_graph() {
        let g = unary_graph(&[(3, 9)]);
        assert_eq!(dangls(&g), ids(&[9]));
        assert_eq!(summit(&g, Node(3)), ids(&[9]));
        assert_eq!(summits(&g), ids(&[9]));
        // Null is an ordinary dangling target here.
        let g = unary_graph(&[(3, 0)]);
        assert_eq!(dangls(&g), ids(&[0]));
        assert_eq!(summits(&g), ids(&[0]));
    }

    /// Preacyclicity of two pieces does not survive their join: one edge each
    /// way builds a two-cycle that neither piece can see, and the subtractive
    /// summit arithmetic that holds for inverted forests fails here.
    #[test]
    fn component_preacyclicity_is_not_enough() {
        let g1 = unary_graph(&[(1, 2)]);
        let g2 = unary_graph(&[(2, 1)]);
        assert!(preacyclic(&g1));
        assert!(preacyclic(&g2));

        let g = g1.join(&g2).unwrap().expect("disjoint");
        assert!(!preacyclic(&g));
        assert_eq!(summits(&g), ids(&[1, 2]));

        let subtractive = summits(&g1)
            .difference(&g2.nodes())
            .union(&summits(&g2).difference(&g1.nodes()));
        assert_eq!(subtractive, ids(&[]));
        assert_ne!(summits(&g), subtractive);
    }

    #[test]
    fn new_allocates_a_self_loop() {
        let mut h = Heap::new();
        let a = uf_new(&mut h);
        assert_eq!(a, Node(1));
        assert_eq!(h.read_addr(a), Ok(a));
        assert_eq!(uf_find(&h, a), Ok(a));
    }

    #[test]
    fn union_makes_the_second_argument_the_root() {
        let mut h = Heap::new();
        let a = uf_new(&mut h);
        let b = uf_new(&mut h);
        let root = uf_union(&mut h, a, b).unwrap();
        assert_eq!(root, b);
        assert_eq!(uf_find(&h, a), Ok(b));
        assert_eq!(uf_find(&h, b), Ok(b));
    }

    #[test]
    #[should_panic(expected = "not an inverted forest")]
    fn find_detects_a_parent_cycle() {
        let g = unary_graph(&[(1, 2), (2, 1)]);
        let h = layout_unary(&g).unwrap();
        let _ = uf_find(&h, Node(1));
    }

    #[test]
    fn check_set_accepts_the_forest_sets() {
        let h = layout_unary(&forest7()).unwrap();
        let left = SetWitness { members: ids(&[1, 2, 3]), representative: Node(1) };
        let right = SetWitness { members: ids(&[4, 5, 6, 7]), representative: Node(4) };
        assert_eq!(check_set(&h, &left), Ok(()));
        assert_eq!(check_set(&h, &right), Ok(()));
    }

    #[test]
    fn check_set_rejects_wrong_claims() {
        let h = layout_unary(&forest7()).unwrap();
        // Wrong representative.
        let w = SetWitness { members: ids(&[1, 2, 3]), representative: Node(2) };
        assert!(matches!(check_set(&h, &w), Err(SetViolation::Summits { .. })));
        // Two sets claimed as one: two summits.
        let w = SetWitness { members: ids(&[1, 2, 3, 4]), representative: Node(1) };
        assert!(matches!(check_set(&h, &w), Err(SetViolation::Summits { .. })));
        // A member with no cell at all.
        let w = SetWitness { members: ids(&[1, 2, 99]), representative: Node(1) };
        assert!(matches!(check_set(&h, &w), Err(SetViolation::Abstraction(_))));

        // A two-cycle has the right summits count but no root.
        let h = layout_unary(&unary_graph(&[(1, 2), (2, 1)])).unwrap();
        let w = SetWitness { members: ids(&[1, 2]), representative: Node(1) };
        assert!(matches!(check_set(&h, &w), Err(SetViolation::Summits { .. })));
    }

    #[test]
    fn replay_builds_the_forest_and_finds_across_the_merge() {
        let replay = replay_script(&forest7_script()).unwrap();
        assert!(replay.all_sets_ok());
        assert_eq!(replay.births, (1..=7).map(Node).collect::<Vec<_>>());

        // Before the final merge, c resolves to the root of the first tree.
        let find_c = &replay.steps[12];
        assert_eq!(find_c.op, UfOp::Find("c".to_string()));
        assert_eq!(find_c.result, Node(1));

        // After union a d, everything resolves to d's root.
        let find_b = replay.steps.last().unwrap();
        assert_eq!(find_b.op, UfOp::Find("b".to_string()));
        assert_eq!(find_b.result, Node(4));

        assert_eq!(replay.sets.len(), 1);
        assert_eq!(replay.sets[0].members, ids(&[1, 2, 3, 4, 5, 6, 7]));
        assert_eq!(replay.sets[0].representative, Node(4));
    }

    #[test]
    fn replay_rejects_bad_scripts() {
        let s = UfScript { ops: vec![UfOp::Find("a".to_string())] };
        assert!(matches!(
            replay_script(&s),
            Err(ReplayError::Script(ScriptError::UnknownHandle { index: 1, .. }))
        ));

        let s = UfScript {
            ops: vec![UfOp::New("a".to_string()), UfOp::New("a".to_string())],
        };
        assert!(matches!(
            replay_script(&s),
            Err(ReplayError::Script(ScriptError::HandleRebound { index: 2, .. }))
        ));

        let s = UfScript {
            ops: vec![
                UfOp::New("a".to_string()),
                UfOp::New("b".to_string()),
                UfOp::Union("a".to_string(), "b".to_string()),
                UfOp::Union("b".to_string(), "a".to_string()),
            ],
        };
        assert!(matches!(
            replay_script(&s),
            Err(ReplayError::Script(ScriptError::UnionSameSet { index: 4 }))
        ));
    }
}
