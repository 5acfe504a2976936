//! Partial graphs: finite maps from nonzero nodes to a content value and an
//! adjacency sequence, combined by disjoint union.
//!
//! Graphs here are deliberately partial in two ways. A graph describes only
//! the nodes it maps (its domain), and edges may dangle: an adjacency entry
//! can name a node the graph does not define, or the null node 0. Partiality
//! is what makes graphs compose. Two graphs with disjoint domains join into a
//! bigger one, and a graph can be split into pieces that are reasoned about
//! separately.
//!
//! Under [`PartialGraph::join`] the graphs of each [`Kind`] form a partial
//! commutative monoid: join is commutative and associative, the empty graph
//! is the unit, and joining graphs with overlapping domains yields the
//! explicit [`Join::Undefined`] value rather than an error. Several
//! abstractions ([`PartialGraph::nodes`], the two filters, erasure, mapping,
//! [`PartialGraph::sinks`]) distribute over join; global properties
//! ([`PartialGraph::closed`], [`PartialGraph::reach`]) do not, and that
//! difference is exactly what the law suite in [`crate::laws`] exercises.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// A node identifier. Node 0 is the null pointer: it may appear in adjacency
/// sequences and node sets, but no graph ever defines an entry for it.
///
/// Nodes double as heap addresses in [`crate::heap_model`], where a node's
/// cells live at consecutive addresses starting at the node id itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node(pub u64);

/// The null node.
pub const NULL: Node = Node(0);

impl Node {
    /// True for the null node 0.
    pub fn is_null(self) -> bool {
        self.0 == 0
    }

    /// The address `d` cells past this one.
    pub fn offset(self, d: u64) -> Node {
        Node(self.0 + d)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Node marks used by the marking algorithms. `O` is unmarked; `L` and `R`
/// record which child edge of a node is currently reversed; `X` is fully
/// marked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mark {
    O,
    L,
    R,
    X,
}

/// All four marks in a fixed order, handy for enumeration.
pub const ALL_MARKS: [Mark; 4] = [Mark::O, Mark::L, Mark::R, Mark::X];

impl Mark {
    /// One-letter spelling, as used in graph files and traces.
    pub fn symbol(self) -> &'static str {
        match self {
            Mark::O => "O",
            Mark::L => "L",
            Mark::R => "R",
            Mark::X => "X",
        }
    }

    /// Inverse of [`Mark::symbol`].
    pub fn from_symbol(s: &str) -> Option<Mark> {
        match s {
            "O" => Some(Mark::O),
            "L" => Some(Mark::L),
            "R" => Some(Mark::R),
            "X" => Some(Mark::X),
            _ => None,
        }
    }

    /// Exchange `O` and `X`, leaving `L` and `R` alone. This is the standard
    /// content toggle used by the worked examples and the law suite.
    pub fn flip(self) -> Mark {
        match self {
            Mark::O => Mark::X,
            Mark::X => Mark::O,
            m => m,
        }
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Structural discipline of a graph. The kind rides on every graph value and
/// is checked wherever graphs meet, so that a binary graph can never be
/// joined with, say, a unary one by accident.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    /// Arbitrary adjacency sequences.
    General,
    /// Exactly two successors per node (left, right); null stands for an
    /// absent child.
    Binary,
    /// Exactly one successor per node.
    Unary,
}

impl Kind {
    /// Required adjacency length, if the kind fixes one.
    pub fn arity(self) -> Option<usize> {
        match self {
            Kind::General => None,
            Kind::Binary => Some(2),
            Kind::Unary => Some(1),
        }
    }

    fn check_adj(self, node: Node, adj: &[Node]) -> Result<(), GraphError> {
        match self.arity() {
            Some(want) if adj.len() != want => Err(GraphError::Arity {
                kind: self,
                node,
                want,
                got: adj.len(),
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::General => "general",
            Kind::Binary => "binary",
            Kind::Unary => "unary",
        })
    }
}

/// Error raised by graph constructors and combinators on misuse. Note that
/// joining overlapping graphs is not an error; it produces
/// [`Join::Undefined`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node 0 is the null pointer and cannot carry an entry")]
    NullNode,
    #[error("graph kinds differ: {0} vs {1}")]
    KindMismatch(Kind, Kind),
    #[error("{kind} graphs need {want} successors per node, node {node} has {got}")]
    Arity {
        kind: Kind,
        node: Node,
        want: usize,
        got: usize,
    },
    #[error("node {0} is defined twice")]
    DuplicateNode(Node),
}

/// A finite set of nodes, ordered for stable display and iteration. Unlike
/// graph domains, a node set may contain the null node.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeSet(BTreeSet<Node>);

impl NodeSet {
    pub fn new() -> NodeSet {
        NodeSet(BTreeSet::new())
    }

    pub fn singleton(x: Node) -> NodeSet {
        NodeSet(BTreeSet::from([x]))
    }

    /// Build from raw ids, a convenience for tests and fixtures.
    pub fn from_ids<I: IntoIterator<Item = u64>>(ids: I) -> NodeSet {
        ids.into_iter().map(Node).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: Node) -> bool {
        self.0.contains(&x)
    }

    pub fn insert(&mut self, x: Node) -> bool {
        self.0.insert(x)
    }

    pub fn remove(&mut self, x: Node) -> bool {
        self.0.remove(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = Node> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.union(&other.0).copied().collect())
    }

    /// Union defined only when the operands share no element. This is the
    /// join of the target monoid that `nodes` maps into.
    pub fn disjoint_union(&self, other: &NodeSet) -> Option<NodeSet> {
        if self.0.is_disjoint(&other.0) {
            Some(self.union(other))
        } else {
            None
        }
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.intersection(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl FromIterator<Node> for NodeSet {
    fn from_iter<I: IntoIterator<Item = Node>>(iter: I) -> NodeSet {
        NodeSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = Node;
    type IntoIter = std::iter::Copied<std::collections::btree_set::Iter<'a, Node>>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter().copied()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// Result of joining two graphs. Overlapping domains make the join undefined,
/// and undefinedness is a first-class outcome that the algebraic laws
/// quantify over, so it is a value here rather than an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Join<V> {
    Defined(PartialGraph<V>),
    Undefined,
}

impl<V: Clone> Join<V> {
    pub fn is_undefined(&self) -> bool {
        matches!(self, Join::Undefined)
    }

    /// The graph, if the join was defined.
    pub fn defined(self) -> Option<PartialGraph<V>> {
        match self {
            Join::Defined(g) => Some(g),
            Join::Undefined => None,
        }
    }

    /// Unwrap a join that is known to be defined.
    ///
    /// # Panics
    ///
    /// Panics with `msg` if the join is undefined.
    pub fn expect(self, msg: &str) -> PartialGraph<V> {
        match self {
            Join::Defined(g) => g,
            Join::Undefined => panic!("{msg}: join is undefined"),
        }
    }

    /// Join one more graph on, with undefinedness absorbing: once a join has
    /// collapsed to `Undefined` it stays undefined.
    pub fn then_join(&self, g: &PartialGraph<V>) -> Result<Join<V>, GraphError> {
        match self {
            Join::Undefined => Ok(Join::Undefined),
            Join::Defined(h) => h.join(g),
        }
    }
}

/// A partial graph of the given kind: a finite map from nonzero nodes to
/// `(content, adjacency)` entries.
///
/// Equality is structural and includes the kind, so the empty binary graph
/// and the empty general graph are distinct unit elements, one per kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialGraph<V> {
    kind: Kind,
    entries: BTreeMap<Node, (V, Vec<Node>)>,
}

/// Graphs whose content is a [`Mark`].
pub type MarkGraph = PartialGraph<Mark>;

/// Graphs with unit content, the image of [`PartialGraph::erase`].
pub type UnitGraph = PartialGraph<()>;

impl<V: Clone> PartialGraph<V> {
    /// The empty graph, the unit of join for its kind.
    pub fn empty(kind: Kind) -> PartialGraph<V> {
        PartialGraph {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// The one-node graph `x -> (v, adj)`.
    pub fn singleton(kind: Kind, x: Node, v: V, adj: Vec<Node>) -> Result<PartialGraph<V>, GraphError> {
        let mut g = PartialGraph::empty(kind);
        g.insert(x, v, adj)?;
        Ok(g)
    }

    /// Build a graph from an entry list, rejecting duplicate nodes.
    pub fn from_entries<I>(kind: Kind, entries: I) -> Result<PartialGraph<V>, GraphError>
    where
        I: IntoIterator<Item = (Node, V, Vec<Node>)>,
    {
        let mut g = PartialGraph::empty(kind);
        for (x, v, adj) in entries {
            g.insert(x, v, adj)?;
        }
        Ok(g)
    }

    /// Add one entry during construction. Fails on the null node, on a
    /// duplicate entry, and on an adjacency sequence of the wrong length for
    /// this kind.
    pub fn insert(&mut self, x: Node, v: V, adj: Vec<Node>) -> Result<(), GraphError> {
        if x.is_null() {
            return Err(GraphError::NullNode);
        }
        self.kind.check_adj(x, &adj)?;
        if self.entries.contains_key(&x) {
            return Err(GraphError::DuplicateNode(x));
        }
        self.entries.insert(x, (v, adj));
        Ok(())
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, x: Node) -> bool {
        self.entries.contains_key(&x)
    }

    /// The entry at `x`, if `x` is in the domain.
    pub fn get(&self, x: Node) -> Option<(&V, &[Node])> {
        self.entries.get(&x).map(|(v, adj)| (v, adj.as_slice()))
    }

    /// Content at `x`.
    pub fn value(&self, x: Node) -> Option<&V> {
        self.entries.get(&x).map(|(v, _)| v)
    }

    /// Adjacency at `x`.
    pub fn adj(&self, x: Node) -> Option<&[Node]> {
        self.entries.get(&x).map(|(_, adj)| adj.as_slice())
    }

    /// Entries in ascending node order.
    pub fn iter(&self) -> impl Iterator<Item = (Node, &V, &[Node])> {
        self.entries.iter().map(|(&x, (v, adj))| (x, v, adj.as_slice()))
    }

    /// The domain of the graph.
    pub fn nodes(&self) -> NodeSet {
        self.entries.keys().copied().collect()
    }

    /// The domain extended with the null node.
    pub fn nodes0(&self) -> NodeSet {
        let mut s = self.nodes();
        s.insert(NULL);
        s
    }

    /// Every node that appears in some adjacency sequence, dangling or not.
    /// May contain null.
    pub fn sinks(&self) -> NodeSet {
        self.entries
            .values()
            .flat_map(|(_, adj)| adj.iter().copied())
            .collect()
    }

    /// A graph is closed when every edge lands inside the graph or on null.
    pub fn closed(&self) -> bool {
        self.sinks().is_subset(&self.nodes0())
    }

    /// Disjoint union. Kinds must agree; overlapping domains give
    /// [`Join::Undefined`].
    pub fn join(&self, other: &PartialGraph<V>) -> Result<Join<V>, GraphError> {
        if self.kind != other.kind {
            return Err(GraphError::KindMismatch(self.kind, other.kind));
        }
        if self.entries.keys().any(|x| other.entries.contains_key(x)) {
            return Ok(Join::Undefined);
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().map(|(&x, e)| (x, e.clone())));
        Ok(Join::Defined(PartialGraph {
            kind: self.kind,
            entries,
        }))
    }

    /// The graph without node `x` (a no-op if `x` is not in the domain).
    /// Edges into `x` remain and dangle.
    pub fn remove(&self, x: Node) -> PartialGraph<V> {
        let mut g = self.clone();
        g.entries.remove(&x);
        g
    }

    /// Restrict the domain to `s`.
    pub fn filter_nodes(&self, s: &NodeSet) -> PartialGraph<V> {
        PartialGraph {
            kind: self.kind,
            entries: self
                .entries
                .iter()
                .filter(|(x, _)| s.contains(**x))
                .map(|(&x, e)| (x, e.clone()))
                .collect(),
        }
    }

    /// Keep only the nodes whose content is listed in `vs`.
    pub fn filter_marks(&self, vs: &[V]) -> PartialGraph<V>
    where
        V: PartialEq,
    {
        PartialGraph {
            kind: self.kind,
            entries: self
                .entries
                .iter()
                .filter(|(_, (v, _))| vs.contains(v))
                .map(|(&x, e)| (x, e.clone()))
                .collect(),
        }
    }

    /// Forget the content, keeping the shape.
    pub fn erase(&self) -> UnitGraph {
        PartialGraph {
            kind: self.kind,
            entries: self
                .entries
                .iter()
                .map(|(&x, (_, adj))| (x, ((), adj.clone())))
                .collect(),
        }
    }

    /// Rewrite every entry through `f`, which sees the node and its current
    /// entry. The domain is unchanged; the new adjacency must respect this
    /// kind's arity.
    pub fn map_graph<W, F>(&self, f: F) -> Result<PartialGraph<W>, GraphError>
    where
        W: Clone,
        F: Fn(Node, &V, &[Node]) -> (W, Vec<Node>),
    {
        let mut entries = BTreeMap::new();
        for (&x, (v, adj)) in &self.entries {
            let (w, new_adj) = f(x, v, adj);
            self.kind.check_adj(x, &new_adj)?;
            entries.insert(x, (w, new_adj));
        }
        Ok(PartialGraph {
            kind: self.kind,
            entries,
        })
    }

    /// Nodes reachable from `x`, by the recursion: nothing if `x` is outside
    /// the graph, otherwise `x` together with whatever each successor reaches
    /// in the graph with `x` removed.
    ///
    /// The recursion explores simple paths and backtracks, which is faithful
    /// to that definition but exponential in the worst case. It is kept this
    /// way on purpose; the independent breadth-first implementation lives in
    /// [`crate::oracles::reach_oracle`] and the two are compared by the law
    /// suite.
    pub fn reach(&self, x: Node) -> NodeSet {
        let mut acc = BTreeSet::new();
        let mut removed = HashSet::new();
        self.reach_go(x, &mut removed, &mut acc);
        NodeSet(acc)
    }

    fn reach_go(&self, x: Node, removed: &mut HashSet<Node>, acc: &mut BTreeSet<Node>) {
        if removed.contains(&x) || !self.entries.contains_key(&x) {
            return;
        }
        acc.insert(x);
        removed.insert(x);
        let (_, adj) = &self.entries[&x];
        for &y in adj {
            self.reach_go(y, removed, acc);
        }
        removed.remove(&x);
    }

    /// First node where the two graphs disagree (absent on one side or mapped
    /// to a different entry), if any. Useful for diagnostics.
    pub fn first_difference(&self, other: &PartialGraph<V>) -> Option<Node>
    where
        V: PartialEq,
    {
        let keys: BTreeSet<Node> = self
            .entries
            .keys()
            .chain(other.entries.keys())
            .copied()
            .collect();
        keys.into_iter()
            .find(|x| self.entries.get(x) != other.entries.get(x))
    }
}

/// Join a whole sequence of graphs of one kind, starting from the empty
/// graph. Any overlap collapses the result to [`Join::Undefined`].
pub fn join_all<V, I>(kind: Kind, parts: I) -> Result<Join<V>, GraphError>
where
    V: Clone,
    I: IntoIterator<Item = PartialGraph<V>>,
{
    let mut acc = Join::Defined(PartialGraph::empty(kind));
    for g in parts {
        acc = acc.then_join(&g)?;
    }
    Ok(acc)
}

fn fmt_entries<V>(
    g: &PartialGraph<V>,
    f: &mut fmt::Formatter<'_>,
    show: impl Fn(&V) -> Option<String>,
) -> fmt::Result {
    write!(f, "{} {{", g.kind)?;
    let entries = g.entries.iter().map(|(&x, (v, adj))| (x, v, adj.as_slice()));
    for (i, (x, v, adj)) in entries.enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        match show(v) {
            Some(s) => write!(f, "{x}: {s} [")?,
            None => write!(f, "{x}: [")?,
        }
        for (j, y) in adj.iter().enumerate() {
            if j > 0 {
                write!(f, " ")?;
            }
            write!(f, "{y}")?;
        }
        write!(f, "]")?;
    }
    write!(f, "}}")
}

impl fmt::Display for PartialGraph<Mark> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_entries(self, f, |m| Some(m.to_string()))
    }
}

impl fmt::Display for PartialGraph<()> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_entries(self, f, |_| None)
    }
}
