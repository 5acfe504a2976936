//! A simulated pointer heap, and the correspondence between graphs and their
//! pointer representations.
//!
//! The heap is a finite map from positive addresses to tagged cells. Node ids
//! double as base addresses: a binary node `x` occupies the triple `x` (mark),
//! `x+1` (left child), `x+2` (right child); a unary node occupies the single
//! cell `x` (successor); a general node occupies `x` (mark) and `x+1` (head of
//! its adjacency list), with the list itself stored as `(value, next)` cell
//! pairs placed immediately after the header.
//!
//! Every layout function has an inverse abstraction function, and
//! [`check_layout`] audits a heap against a graph cell by cell, attributing
//! each cell to the node that owns it. Memory misuse (absent address, wrong
//! tag, null dereference) is a structured [`Fault`], never a silent wrong
//! answer, so algorithm runners can assert that no fault occurs when their
//! preconditions hold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::partial_graph::{Kind, Mark, MarkGraph, Node, NodeSet, PartialGraph, UnitGraph, NULL};

/// Contents of one heap cell: a mark or an address. The tag is part of the
/// value, and reading a cell with the wrong expectation faults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellValue {
    Mark(Mark),
    Addr(Node),
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::Mark(m) => write!(f, "{m}"),
            CellValue::Addr(a) => write!(f, "{a}"),
        }
    }
}

/// A memory safety violation. Faults are test failures by design: any code
/// path that produces one under satisfied preconditions is a bug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum Fault {
    #[error("null pointer dereference")]
    NullDeref,
    #[error("address {0} is not allocated")]
    Unallocated(Node),
    #[error("cell {0} holds an address, expected a mark")]
    NotAMark(Node),
    #[error("cell {0} holds a mark, expected an address")]
    NotAnAddress(Node),
}

/// Error from laying a graph out into cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("expected a {expected} graph, got {got}")]
    WrongKind { expected: Kind, got: Kind },
    #[error("cell {addr} of node {node} collides with an already placed cell")]
    Collision { node: Node, addr: Node },
}

/// Error from reading a graph back out of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AbstractionError {
    #[error("the null node has no cells to abstract")]
    NullInSet,
    #[error("missing cell {addr} while abstracting node {node}")]
    MissingCell { node: Node, addr: Node },
    #[error("cell {addr} of node {node} holds an address, expected a mark")]
    ExpectedMark { node: Node, addr: Node },
    #[error("cell {addr} of node {node} holds a mark, expected an address")]
    ExpectedAddr { node: Node, addr: Node },
    #[error("adjacency list of node {node} revisits cell {addr}")]
    ListCycle { node: Node, addr: Node },
}

/// A finite map from positive addresses to cells. Address 0 is the null
/// pointer and is never allocated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Heap {
    cells: BTreeMap<Node, CellValue>,
}

impl Heap {
    /// The empty heap.
    pub fn new() -> Heap {
        Heap::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, a: Node) -> bool {
        self.cells.contains_key(&a)
    }

    /// The allocated addresses, ascending.
    pub fn dom(&self) -> BTreeSet<Node> {
        self.cells.keys().copied().collect()
    }

    /// Cells in ascending address order.
    pub fn iter(&self) -> impl Iterator<Item = (Node, CellValue)> + '_ {
        self.cells.iter().map(|(&a, &v)| (a, v))
    }

    /// Read the cell at `a`.
    pub fn read(&self, a: Node) -> Result<CellValue, Fault> {
        if a.is_null() {
            return Err(Fault::NullDeref);
        }
        self.cells.get(&a).copied().ok_or(Fault::Unallocated(a))
    }

    /// Read the cell at `a`, which must hold a mark.
    pub fn read_mark(&self, a: Node) -> Result<Mark, Fault> {
        match self.read(a)? {
            CellValue::Mark(m) => Ok(m),
            CellValue::Addr(_) => Err(Fault::NotAMark(a)),
        }
    }

    /// Read the cell at `a`, which must hold an address.
    pub fn read_addr(&self, a: Node) -> Result<Node, Fault> {
        match self.read(a)? {
            CellValue::Addr(x) => Ok(x),
            CellValue::Mark(_) => Err(Fault::NotAnAddress(a)),
        }
    }

    /// Overwrite the cell at `a`, which must already be allocated.
    pub fn write(&mut self, a: Node, v: CellValue) -> Result<(), Fault> {
        if a.is_null() {
            return Err(Fault::NullDeref);
        }
        match self.cells.get_mut(&a) {
            Some(cell) => {
                *cell = v;
                Ok(())
            }
            None => Err(Fault::Unallocated(a)),
        }
    }

    /// Allocate `vs.len()` consecutive fresh cells, first fit from the lowest
    /// unused address at or above 1, and return the base address.
    ///
    /// # Panics
    ///
    /// Panics if `vs` is empty; zero-length allocations have no address.
    pub fn alloc(&mut self, vs: &[CellValue]) -> Node {
        assert!(!vs.is_empty(), "cannot allocate zero cells");
        let len = vs.len() as u64;
        let mut base = 1u64;
        for &Node(k) in self.cells.keys() {
            if k >= base + len {
                break;
            }
            if k >= base {
                base = k + 1;
            }
        }
        for (i, &v) in vs.iter().enumerate() {
            self.cells.insert(Node(base + i as u64), v);
        }
        Node(base)
    }

    /// Disjoint union of heaps, or `None` when the domains overlap.
    pub fn join(&self, other: &Heap) -> Option<Heap> {
        if self.cells.keys().any(|a| other.cells.contains_key(a)) {
            return None;
        }
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().map(|(&a, &v)| (a, v)));
        Some(Heap { cells })
    }

    /// Debug rendering: one `address: value` line per cell, ascending.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (a, v) in self.iter() {
            out.push_str(&format!("{a}: {v}\n"));
        }
        out
    }

    fn place(&mut self, node: Node, a: Node, v: CellValue) -> Result<(), LayoutError> {
        if self.cells.insert(a, v).is_some() {
            return Err(LayoutError::Collision { node, addr: a });
        }
        Ok(())
    }
}

/// Lay a binary graph out as one cell triple per node: mark, left, right.
/// Node ids must be at least 3 apart for the triples to be disjoint.
pub fn layout_binary(g: &MarkGraph) -> Result<Heap, LayoutError> {
    expect_kind(Kind::Binary, g.kind())?;
    let mut h = Heap::new();
    for (x, &m, adj) in g.iter() {
        h.place(x, x, CellValue::Mark(m))?;
        h.place(x, x.offset(1), CellValue::Addr(adj[0]))?;
        h.place(x, x.offset(2), CellValue::Addr(adj[1]))?;
    }
    Ok(h)
}

/// Read a binary graph for the nodes `ns` back out of a heap.
pub fn abstract_binary(h: &Heap, ns: &NodeSet) -> Result<MarkGraph, AbstractionError> {
    let mut g = PartialGraph::empty(Kind::Binary);
    for x in ns.iter() {
        if x.is_null() {
            return Err(AbstractionError::NullInSet);
        }
        let m = cell_mark(h, x, x)?;
        let l = cell_addr(h, x, x.offset(1))?;
        let r = cell_addr(h, x, x.offset(2))?;
        g.insert(x, m, vec![l, r]).expect("ns is a set of nonzero nodes");
    }
    Ok(g)
}

/// Lay a unary graph out as one cell per node holding its successor.
pub fn layout_unary(g: &UnitGraph) -> Result<Heap, LayoutError> {
    expect_kind(Kind::Unary, g.kind())?;
    let mut h = Heap::new();
    for (x, (), adj) in g.iter() {
        h.place(x, x, CellValue::Addr(adj[0]))?;
    }
    Ok(h)
}

/// Read a unary graph for the nodes `ns` back out of a heap.
pub fn abstract_unary(h: &Heap, ns: &NodeSet) -> Result<UnitGraph, AbstractionError> {
    let mut g = PartialGraph::empty(Kind::Unary);
    for x in ns.iter() {
        if x.is_null() {
            return Err(AbstractionError::NullInSet);
        }
        let s = cell_addr(h, x, x)?;
        g.insert(x, (), vec![s]).expect("ns is a set of nonzero nodes");
    }
    Ok(g)
}

/// Lay a value sequence out as a linked list segment of `(value, next)` cell
/// pairs at consecutive addresses starting at `i`. Returns the cells and the
/// segment's terminal: the address stored in the final next cell (0, since
/// the segment is complete), or `i` itself for the empty sequence, whose
/// segment starts and ends at the same place and occupies no cells.
pub fn layout_list(alpha: &[Node], i: Node) -> (Heap, Node) {
    let mut h = Heap::new();
    if alpha.is_empty() {
        return (h, i);
    }
    for (k, &v) in alpha.iter().enumerate() {
        let pair = i.offset(2 * k as u64);
        let next = if k + 1 == alpha.len() {
            NULL
        } else {
            pair.offset(2)
        };
        h.cells.insert(pair, CellValue::Addr(v));
        h.cells.insert(pair.offset(1), CellValue::Addr(next));
    }
    (h, NULL)
}

/// Lay a general graph out as a header pair per node (mark at `x`, list head
/// at `x+1`) with the adjacency list cells placed immediately after the
/// header, at `x+2` onward.
///
/// Placing each node's list next to its own header keeps the whole layout a
/// per-node function, so laying out a join of graphs equals joining their
/// layouts whenever the cells fit together at all. Nodes packed too tightly
/// for their lists collide, which is a [`LayoutError`].
pub fn layout_general(g: &MarkGraph) -> Result<Heap, LayoutError> {
    expect_kind(Kind::General, g.kind())?;
    let mut h = Heap::new();
    for (x, &m, adj) in g.iter() {
        let head = if adj.is_empty() { NULL } else { x.offset(2) };
        h.place(x, x, CellValue::Mark(m))?;
        h.place(x, x.offset(1), CellValue::Addr(head))?;
        let (list, _) = layout_list(adj, x.offset(2));
        for (a, v) in list.iter() {
            h.place(x, a, v)?;
        }
    }
    Ok(h)
}

/// Read a general graph for the nodes `ns` back out of a heap, walking each
/// node's adjacency list wherever its cells actually sit.
pub fn abstract_general(h: &Heap, ns: &NodeSet) -> Result<MarkGraph, AbstractionError> {
    let mut g = PartialGraph::empty(Kind::General);
    for x in ns.iter() {
        if x.is_null() {
            return Err(AbstractionError::NullInSet);
        }
        let m = cell_mark(h, x, x)?;
        let mut adj = Vec::new();
        let mut pair = cell_addr(h, x, x.offset(1))?;
        let mut seen = BTreeSet::new();
        while !pair.is_null() {
            if !seen.insert(pair) {
                return Err(AbstractionError::ListCycle { node: x, addr: pair });
            }
            adj.push(cell_addr(h, x, pair)?);
            pair = cell_addr(h, x, pair.offset(1))?;
        }
        g.insert(x, m, adj).expect("ns is a set of nonzero nodes");
    }
    Ok(g)
}

/// Result of auditing a heap against a graph: whether every node's cells are
/// present and correct, which cells belong to which node (the footprint), and
/// which cells of the heap are left over (the residual).
///
/// When `matched` holds, `footprint` and `residual` are disjoint and together
/// cover the heap's domain exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutReport {
    pub matched: bool,
    pub footprint: BTreeSet<Node>,
    pub residual: BTreeSet<Node>,
    pub failure: Option<String>,
}

struct Audit<'h> {
    h: &'h Heap,
    claimed: BTreeSet<Node>,
    failure: Option<String>,
}

impl<'h> Audit<'h> {
    fn new(h: &'h Heap) -> Audit<'h> {
        Audit {
            h,
            claimed: BTreeSet::new(),
            failure: None,
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failure.is_none() {
            self.failure = Some(msg);
        }
    }

    /// Claim cell `a` for `node` and check it holds `want`.
    fn claim(&mut self, node: Node, a: Node, want: CellValue) {
        let Ok(got) = self.h.read(a) else {
            self.fail(format!("cell {a} of node {node} is missing"));
            return;
        };
        if !self.claimed.insert(a) {
            self.fail(format!("cell {a} of node {node} is claimed twice"));
            return;
        }
        if got != want {
            self.fail(format!(
                "cell {a} of node {node} holds {got}, expected {want}"
            ));
        }
    }

    /// Claim cell `a` for `node`, requiring only that it holds an address.
    fn claim_addr(&mut self, node: Node, a: Node) -> Option<Node> {
        let got = match self.h.read(a) {
            Ok(CellValue::Addr(v)) => v,
            Ok(CellValue::Mark(_)) => {
                self.fail(format!(
                    "cell {a} of node {node} holds a mark, expected an address"
                ));
                return None;
            }
            Err(_) => {
                self.fail(format!("cell {a} of node {node} is missing"));
                return None;
            }
        };
        if !self.claimed.insert(a) {
            self.fail(format!("cell {a} of node {node} is claimed twice"));
            return None;
        }
        Some(got)
    }

    fn report(self) -> LayoutReport {
        let footprint = self.claimed;
        let residual: BTreeSet<Node> = self
            .h
            .dom()
            .into_iter()
            .filter(|a| !footprint.contains(a))
            .collect();
        LayoutReport {
            matched: self.failure.is_none(),
            footprint,
            residual,
            failure: self.failure,
        }
    }
}

/// Audit a heap against a marked (binary or general) graph, attributing each
/// cell to the node it belongs to. For general graphs the audit follows each
/// node's list pointers through the heap as stored, rather than assuming any
/// particular placement, so it independently cross-checks [`layout_general`]
/// and [`layout_list`].
pub fn check_layout(h: &Heap, g: &MarkGraph) -> LayoutReport {
    let mut audit = Audit::new(h);
    match g.kind() {
        Kind::Binary => {
            for (x, &m, adj) in g.iter() {
                audit.claim(x, x, CellValue::Mark(m));
                audit.claim(x, x.offset(1), CellValue::Addr(adj[0]));
                audit.claim(x, x.offset(2), CellValue::Addr(adj[1]));
            }
        }
        Kind::General => {
            for (x, &m, adj) in g.iter() {
                audit.claim(x, x, CellValue::Mark(m));
                let Some(mut pair) = audit.claim_addr(x, x.offset(1)) else {
                    continue;
                };
                for (k, &want) in adj.iter().enumerate() {
                    if pair.is_null() {
                        audit.fail(format!(
                            "adjacency list of node {x} ends after {k} of {} entries",
                            adj.len()
                        ));
                        break;
                    }
                    audit.claim(x, pair, CellValue::Addr(want));
                    match audit.claim_addr(x, pair.offset(1)) {
                        Some(next) => pair = next,
                        None => break,
                    }
                }
                if !pair.is_null() && audit.failure.is_none() {
                    audit.fail(format!(
                        "adjacency list of node {x} continues past its {} entries",
                        adj.len()
                    ));
                }
            }
        }
        Kind::Unary => {
            audit.fail("unary graphs carry no marks, use check_layout_unary".to_string());
        }
    }
    audit.report()
}

/// Audit a heap against a unary graph, one successor cell per node.
pub fn check_layout_unary(h: &Heap, g: &UnitGraph) -> LayoutReport {
    let mut audit = Audit::new(h);
    if g.kind() != Kind::Unary {
        audit.fail(format!("expected a unary graph, got {}", g.kind()));
        return audit.report();
    }
    for (x, (), adj) in g.iter() {
        audit.claim(x, x, CellValue::Addr(adj[0]));
    }
    audit.report()
}

fn expect_kind(expected: Kind, got: Kind) -> Result<(), LayoutError> {
    if expected == got {
        Ok(())
    } else {
        Err(LayoutError::WrongKind { expected, got })
    }
}

fn cell_mark(h: &Heap, node: Node, a: Node) -> Result<Mark, AbstractionError> {
    match h.read(a) {
        Ok(CellValue::Mark(m)) => Ok(m),
        Ok(CellValue::Addr(_)) => Err(AbstractionError::ExpectedMark { node, addr: a }),
        Err(_) => Err(AbstractionError::MissingCell { node, addr: a }),
    }
}

fn cell_addr(h: &Heap, node: Node, a: Node) -> Result<Node, AbstractionError> {
    match h.read(a) {
        Ok(CellValue::Addr(v)) => Ok(v),
        Ok(CellValue::Mark(_)) => Err(AbstractionError::ExpectedAddr { node, addr: a }),
        Err(_) => Err(AbstractionError::MissingCell { node, addr: a }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{binary_graph, demo_tree, forest7, general_graph, unary_graph};
    use CellValue::{Addr, Mark as MarkCell};

    fn heap_of(cells: &[(u64, CellValue)]) -> Heap {
        let mut h = Heap::new();
        for &(a, v) in cells {
            h.cells.insert(Node(a), v);
        }
        h
    }

    #[test]
    fn read_after_write_sees_the_new_value() {
        let mut h = Heap::new();
        let base = h.alloc(&[MarkCell(Mark::O)]);
        h.write(base, MarkCell(Mark::X)).unwrap();
        assert_eq!(h.read_mark(base), Ok(Mark::X));
    }

    #[test]
    fn reads_and_writes_outside_the_domain_fault() {
        let mut h = Heap::new();
        assert_eq!(h.read(Node(1)), Err(Fault::Unallocated(Node(1))));
        assert_eq!(h.write(Node(1), Addr(NULL)), Err(Fault::Unallocated(Node(1))));
        assert_eq!(h.read(NULL), Err(Fault::NullDeref));
    }

    #[test]
    fn tagged_reads_enforce_the_tag() {
        let h = heap_of(&[(1, MarkCell(Mark::O)), (2, Addr(Node(1)))]);
        assert_eq!(h.read_addr(Node(1)), Err(Fault::NotAnAddress(Node(1))));
        assert_eq!(h.read_mark(Node(2)), Err(Fault::NotAMark(Node(2))));
    }

    #[test]
    fn alloc_is_first_fit_from_one() {
        let mut h = Heap::new();
        let a = h.alloc(&[MarkCell(Mark::O), Addr(NULL), Addr(NULL)]);
        assert_eq!(a, Node(1));
        assert_eq!(h.dom(), BTreeSet::from([Node(1), Node(2), Node(3)]));

        // A three-cell gap at 4..=6 takes two cells but not four.
        let mut h = heap_of(&[(1, Addr(NULL)), (2, Addr(NULL)), (3, Addr(NULL)), (7, Addr(NULL))]);
        assert_eq!(h.alloc(&[Addr(NULL), Addr(NULL)]), Node(4));
        assert_eq!(h.alloc(&[Addr(NULL); 4]), Node(8));
    }

    #[test]
    fn heap_join_is_disjoint_union() {
        let h1 = heap_of(&[(1, Addr(NULL))]);
        let h2 = heap_of(&[(2, Addr(Node(1)))]);
        let joined = h1.join(&h2).unwrap();
        assert_eq!(joined.len(), 2);
        assert_eq!(h1.join(&h1), None);
        assert_eq!(h1.join(&Heap::new()).unwrap(), h1);
        assert_eq!(h1.join(&h2), h2.join(&h1));
    }

    #[test]
    fn binary_layout_places_one_triple_per_node() {
        let e = layout_binary(&binary_graph(&[])).unwrap();
        assert!(e.is_empty());

        let g = binary_graph(&[(3, Mark::O, 0, 0)]);
        let h = layout_binary(&g).unwrap();
        assert_eq!(
            h,
            heap_of(&[(3, MarkCell(Mark::O)), (4, Addr(NULL)), (5, Addr(NULL))])
        );
    }

    #[test]
    fn binary_layout_rejects_tight_ids() {
        let g = binary_graph(&[(3, Mark::O, 0, 0), (4, Mark::O, 0, 0)]);
        assert_eq!(
            layout_binary(&g).unwrap_err(),
            LayoutError::Collision { node: Node(4), addr: Node(4) }
        );
    }

    #[test]
    fn binary_layout_distributes_over_join() {
        let g = demo_tree();
        let left = g.filter_nodes(&NodeSet::from_ids([3, 6, 9]));
        let right = g.filter_nodes(&g.nodes().difference(&left.nodes()));
        let whole = layout_binary(&g).unwrap();
        let split = layout_binary(&left)
            .unwrap()
            .join(&layout_binary(&right).unwrap())
            .unwrap();
        assert_eq!(whole, split);
    }

    #[test]
    fn binary_abstraction_inverts_layout() {
        let g = demo_tree();
        let h = layout_binary(&g).unwrap();
        assert_eq!(abstract_binary(&h, &g.nodes()).unwrap(), g);
        assert_eq!(
            abstract_binary(&Heap::new(), &NodeSet::new()).unwrap(),
            binary_graph(&[])
        );
    }

    #[test]
    fn binary_abstraction_wants_the_whole_triple() {
        let h = heap_of(&[(3, MarkCell(Mark::O)), (4, Addr(NULL))]);
        assert_eq!(
            abstract_binary(&h, &NodeSet::from_ids([3])).unwrap_err(),
            AbstractionError::MissingCell { node: Node(3), addr: Node(5) }
        );
    }

    #[test]
    fn unary_layout_is_one_cell_per_node() {
        assert!(layout_unary(&unary_graph(&[])).unwrap().is_empty());
        let g = unary_graph(&[(1, 1), (2, 1)]);
        let h = layout_unary(&g).unwrap();
        assert_eq!(h, heap_of(&[(1, Addr(Node(1))), (2, Addr(Node(1)))]));
        assert_eq!(abstract_unary(&h, &g.nodes()).unwrap(), g);
    }

    #[test]
    fn unary_round_trip_on_the_forest() {
        let g = forest7();
        let h = layout_unary(&g).unwrap();
        assert_eq!(abstract_unary(&h, &g.nodes()).unwrap(), g);
        let report = check_layout_unary(&h, &g);
        assert!(report.matched);
        assert!(report.residual.is_empty());
    }

    #[test]
    fn list_segments_sit_at_consecutive_pairs() {
        let (h, terminal) = layout_list(&[], Node(9));
        assert!(h.is_empty());
        assert_eq!(terminal, Node(9));

        let (h, terminal) = layout_list(&[Node(7)], Node(4));
        assert_eq!(h, heap_of(&[(4, Addr(Node(7))), (5, Addr(NULL))]));
        assert_eq!(terminal, NULL);

        let (h, _) = layout_list(&[Node(7), Node(1)], Node(4));
        assert_eq!(
            h,
            heap_of(&[
                (4, Addr(Node(7))),
                (5, Addr(Node(6))),
                (6, Addr(Node(1))),
                (7, Addr(NULL)),
            ])
        );
    }

    #[test]
    fn general_layout_keeps_each_list_behind_its_header() {
        assert!(layout_general(&general_graph(&[])).unwrap().is_empty());

        let g = general_graph(&[(2, Mark::X, &[5, 2]), (8, Mark::O, &[])]);
        let h = layout_general(&g).unwrap();
        assert_eq!(
            h,
            heap_of(&[
                (2, MarkCell(Mark::X)),
                (3, Addr(Node(4))),
                (4, Addr(Node(5))),
                (5, Addr(Node(6))),
                (6, Addr(Node(2))),
                (7, Addr(NULL)),
                (8, MarkCell(Mark::O)),
                (9, Addr(NULL)),
            ])
        );
        assert_eq!(abstract_general(&h, &g.nodes()).unwrap(), g);
    }

    #[test]
    fn general_layout_detects_overlapping_nodes() {
        // Node 2 needs cells 2..=5 for its one-entry list, node 4's header
        // sits in the middle.
        let g = general_graph(&[(2, Mark::O, &[5]), (4, Mark::O, &[])]);
        assert!(matches!(
            layout_general(&g),
            Err(LayoutError::Collision { .. })
        ));
    }

    #[test]
    fn general_abstraction_guards_against_list_cycles() {
        let h = heap_of(&[
            (2, MarkCell(Mark::O)),
            (3, Addr(Node(4))),
            (4, Addr(Node(9))),
            (5, Addr(Node(4))),
        ]);
        assert_eq!(
            abstract_general(&h, &NodeSet::from_ids([2])).unwrap_err(),
            AbstractionError::ListCycle { node: Node(2), addr: Node(4) }
        );
    }

    #[test]
    fn layout_audit_attributes_every_cell() {
        let g = general_graph(&[(2, Mark::X, &[5, 2]), (8, Mark::O, &[])]);
        let mut h = layout_general(&g).unwrap();
        let report = check_layout(&h, &g);
        assert!(report.matched, "{:?}", report.failure);
        assert!(report.residual.is_empty());
        assert_eq!(report.footprint, h.dom());

        // An unrelated extra cell is residual, not a failure.
        h.cells.insert(Node(50), Addr(NULL));
        let report = check_layout(&h, &g);
        assert!(report.matched);
        assert_eq!(report.residual, BTreeSet::from([Node(50)]));

        // A wrong stored child is a failure.
        h.write(Node(4), Addr(Node(1))).unwrap();
        let report = check_layout(&h, &g);
        assert!(!report.matched);
        assert!(report.failure.unwrap().contains("cell 4"));
    }

    #[test]
    fn dump_lists_cells_ascending() {
        let h = heap_of(&[(4, Addr(Node(6))), (3, MarkCell(Mark::L))]);
        assert_eq!(h.dump(), "3: L\n4: 6\n");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn alloc_never_overlaps_existing_cells(
                taken in proptest::collection::btree_set(1u64..40, 0..12),
                len in 1usize..5,
            ) {
                let mut h = Heap::new();
                for &a in &taken {
                    h.cells.insert(Node(a), Addr(NULL));
                }
                let before = h.dom();
                let base = h.alloc(&vec![Addr(NULL); len]);
                prop_assert!(base.0 >= 1);
                for i in 0..len as u64 {
                    prop_assert!(!before.contains(&base.offset(i)));
                }
                // First fit: every address below the base is blocked, in that
                // no run of `len` cells starting there was free.
                for cand in 1..base.0 {
                    let blocked = (0..len as u64).any(|i| before.contains(&Node(cand + i)));
                    prop_assert!(blocked, "candidate {cand} was free but skipped");
                }
            }
        }
    }
}
