//! The algebra's equational theory as a runnable suite.
//!
//! Each law is a named check over one randomized case; a run draws cases
//! from a law-specific deterministic stream (seed xor a hash of the law
//! name), so failures reproduce from the seed alone and adding a law never
//! shifts another law's cases. Failures carry the case index and a rendered
//! counterexample.
//!
//! [`exhaustive_tiny`] complements the randomized suite by enumerating every
//! binary graph over the three-node universe `{1, 2, 3}` (each node absent
//! or carrying any of the four marks and children drawn from `{null, 1, 2,
//! 3}`), and every disjoint pair of such graphs, checking the join and
//! distribution laws on all of them with fixed parameter families.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::heap_model::{
    abstract_binary, abstract_general, abstract_unary, layout_binary, layout_general,
    layout_unary,
};
use crate::oracles::{dfs_mark, gen_graph, reach_oracle, summit_oracle, summits_oracle, GenConfig, GenGraph};
use crate::partial_graph::{
    join_all, Join, Kind, Mark, MarkGraph, Node, NodeSet, PartialGraph, UnitGraph, ALL_MARKS,
    NULL,
};
use crate::schorr_waite::{if_mark, inset, restore, sw_run, SwOptions};
use crate::union_find::{
    cycles, dangls, inverted_forest, loops, preacyclic, summit, summits,
};

/// One registered law: a name and a single-case check.
#[derive(Clone, Copy)]
pub struct Law {
    pub name: &'static str,
    pub check: fn(&mut ChaCha8Rng) -> Result<(), String>,
}

/// The first failing case of a law run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawFailure {
    pub case: usize,
    pub detail: String,
}

/// The result of running one law for a number of cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawOutcome {
    pub name: &'static str,
    /// Cases actually executed (stops at the first failure).
    pub cases: usize,
    pub failure: Option<LawFailure>,
}

impl LawOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for LawOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "{}: ok ({} cases)", self.name, self.cases),
            Some(fail) => write!(f, "{}: FAIL at case {}: {}", self.name, fail.case, fail.detail),
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Run one law for `cases` cases from its seed-derived stream.
pub fn run_law(law: &Law, seed: u64, cases: usize) -> LawOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(law.name));
    for case in 0..cases {
        if let Err(detail) = (law.check)(&mut rng) {
            return LawOutcome {
                name: law.name,
                cases: case + 1,
                failure: Some(LawFailure { case, detail }),
            };
        }
    }
    LawOutcome { name: law.name, cases, failure: None }
}

/// Run the whole registry.
pub fn run_all(seed: u64, cases: usize) -> Vec<LawOutcome> {
    registry().iter().map(|law| run_law(law, seed, cases)).collect()
}

/// Every registered law.
pub fn registry() -> Vec<Law> {
    macro_rules! laws {
        ($($name:literal => $f:ident),* $(,)?) => {
            vec![$(Law { name: $name, check: $f }),*]
        };
    }
    laws![
        "join-unit" => law_join_unit,
        "join-commutative" => law_join_commutative,
        "join-associative" => law_join_associative,
        "nodes-distribute" => law_nodes_distribute,
        "filter-nodes-distributes" => law_filter_nodes_distributes,
        "filter-marks-distributes" => law_filter_marks_distributes,
        "erase-distributes" => law_erase_distributes,
        "map-distributes" => law_map_distributes,
        "sinks-distribute" => law_sinks_distribute,
        "filter-splits-on-disjoint-sets" => law_filter_splits_on_disjoint_sets,
        "filter-splits-on-disjoint-marks" => law_filter_splits_on_disjoint_marks,
        "filter-intersection-composes" => law_filter_intersection_composes,
        "disjoint-mark-filters-annihilate" => law_disjoint_mark_filters_annihilate,
        "map-extensional" => law_map_extensional,
        "map-discriminates" => law_map_discriminates,
        "reach-ignores-content" => law_reach_ignores_content,
        "reach-drops-unreached-node" => law_reach_drops_unreached_node,
        "reach-splits-at-reached-node" => law_reach_splits_at_reached_node,
        "reach-agrees-with-worklist" => law_reach_agrees_with_worklist,
        "closed-survives-reachable-restriction" => law_closed_survives_reachable_restriction,
        "closed-reachable-decomposition" => law_closed_reachable_decomposition,
        "closed-survives-child-redirect" => law_closed_survives_child_redirect,
        "graph-rebuilds-from-singletons" => law_graph_rebuilds_from_singletons,
        "unstacked-graphs-erase" => law_unstacked_graphs_erase,
        "if-mark-extensional" => law_if_mark_extensional,
        "covered-stack-absorbs-extension-inset" => law_covered_stack_absorbs_extension_inset,
        "covered-stack-absorbs-extension-restore" => law_covered_stack_absorbs_extension_restore,
        "marking-ops-meet-contracts" => law_marking_ops_meet_contracts,
        "marking-agrees-with-traversal" => law_marking_agrees_with_traversal,
        "dangls-split-subtractively" => law_dangls_split_subtractively,
        "loops-within-cycles-within-nodes" => law_loops_within_cycles_within_nodes,
        "dangls-outside-nodes" => law_dangls_outside_nodes,
        "summits-are-cycles-plus-dangls" => law_summits_are_cycles_plus_dangls,
        "equal-summits-absorb-join" => law_equal_summits_absorb_join,
        "loop-removal-shrinks-summits" => law_loop_removal_shrinks_summits,
        "inverted-forests-are-closed-and-preacyclic" => law_inverted_forests_are_closed_and_preacyclic,
        "forest-summits-split-subtractively" => law_forest_summits_split_subtractively,
        "preacyclic-summits-split-subtractively" => law_preacyclic_summits_split_subtractively,
        "summit-climbs-to-parent" => law_summit_climbs_to_parent,
        "preacyclic-survives-redirect-out" => law_preacyclic_survives_redirect_out,
        "summit-agrees-with-path-enumeration" => law_summit_agrees_with_path_enumeration,
        "layout-binary-roundtrip" => law_layout_binary_roundtrip,
        "layout-unary-roundtrip" => law_layout_unary_roundtrip,
        "layout-general-roundtrip" => law_layout_general_roundtrip,
        "layout-binary-distributes" => law_layout_binary_distributes,
        "layout-unary-distributes" => law_layout_unary_distributes,
        "layout-general-distributes" => law_layout_general_distributes,
    ]
}

// ---------------------------------------------------------------------------
// Input generation helpers. Sizes stay at or below eight nodes so even the
// deliberately exponential definitional recursions stay fast.

fn rand_kind(rng: &mut ChaCha8Rng) -> Kind {
    [Kind::General, Kind::Binary, Kind::Unary][rng.gen_range(0..3)]
}

fn gen_cfg(rng: &mut ChaCha8Rng, kind: Kind) -> GenConfig {
    GenConfig::new(kind, rng.gen_range(0..=8), rng.gen())
        .density([0.2, 0.5, 0.8][rng.gen_range(0..3)])
}

fn gen_any(rng: &mut ChaCha8Rng) -> GenGraph {
    let kind = rand_kind(rng);
    let mut cfg = gen_cfg(rng, kind);
    if rng.gen_bool(0.5) {
        cfg = cfg.closed();
    }
    gen_graph(&cfg)
}

fn gen_marked(rng: &mut ChaCha8Rng) -> MarkGraph {
    let kind = if rng.gen_bool(0.5) { Kind::General } else { Kind::Binary };
    let mut cfg = gen_cfg(rng, kind);
    if rng.gen_bool(0.5) {
        cfg = cfg.closed();
    }
    gen_graph(&cfg).expect_marked()
}

fn gen_marked_closed(rng: &mut ChaCha8Rng) -> MarkGraph {
    let kind = if rng.gen_bool(0.5) { Kind::General } else { Kind::Binary };
    gen_graph(&gen_cfg(rng, kind).closed()).expect_marked()
}

fn gen_binary(rng: &mut ChaCha8Rng) -> MarkGraph {
    let mut cfg = gen_cfg(rng, Kind::Binary);
    if rng.gen_bool(0.5) {
        cfg = cfg.closed();
    }
    gen_graph(&cfg).expect_marked()
}

fn gen_unary(rng: &mut ChaCha8Rng) -> UnitGraph {
    let mut cfg = gen_cfg(rng, Kind::Unary);
    if rng.gen_bool(0.5) {
        cfg = cfg.closed();
    }
    gen_graph(&cfg).expect_unary()
}

fn gen_forest(rng: &mut ChaCha8Rng) -> UnitGraph {
    gen_graph(&gen_cfg(rng, Kind::Unary).forest()).expect_unary()
}

/// A unary graph whose every non-self edge strictly increases the node id or
/// leaves the graph, so the composite has no cycles beyond self-loops.
fn gen_preacyclic(rng: &mut ChaCha8Rng) -> UnitGraph {
    let n = rng.gen_range(0..=8u64);
    let mut g = PartialGraph::empty(Kind::Unary);
    for i in 1..=n {
        let succ = match rng.gen_range(0..4) {
            0 => Node(i),
            1 if i < n => Node(rng.gen_range(i + 1..=n)),
            2 => NULL,
            _ => Node(n + 1 + rng.gen_range(0..2)),
        };
        g.insert(Node(i), (), vec![succ]).expect("distinct ids");
    }
    g
}

/// Split a graph into two disjoint halves by a coin per node. Rejoining
/// always yields the original.
fn split<V: Clone>(
    rng: &mut ChaCha8Rng,
    g: &PartialGraph<V>,
) -> (PartialGraph<V>, PartialGraph<V>) {
    let mut left = NodeSet::new();
    for x in g.nodes().iter() {
        if rng.gen_bool(0.5) {
            left.insert(x);
        }
    }
    let right = g.nodes().difference(&left);
    (g.filter_nodes(&left), g.filter_nodes(&right))
}

/// Interesting node arguments: everything in the graph, null, the dangling
/// targets, and a couple of ids no one mentions.
fn node_pool<V: Clone>(g: &PartialGraph<V>) -> Vec<Node> {
    let mut pool: Vec<Node> = g.nodes0().union(&g.sinks()).iter().collect();
    let top = pool.iter().map(|x| x.0).max().unwrap_or(0);
    pool.push(Node(top + 1));
    pool.push(Node(top + 2));
    pool
}

fn pick(rng: &mut ChaCha8Rng, pool: &[Node]) -> Node {
    pool[rng.gen_range(0..pool.len())]
}

fn fresh_node<V: Clone>(g: &PartialGraph<V>) -> Node {
    let top = g.nodes0().union(&g.sinks()).iter().map(|x| x.0).max().unwrap_or(0);
    Node(top + 1)
}

fn rand_subset(rng: &mut ChaCha8Rng, pool: &[Node]) -> NodeSet {
    pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
}

fn rand_marks(rng: &mut ChaCha8Rng) -> Vec<Mark> {
    ALL_MARKS.iter().copied().filter(|_| rng.gen_bool(0.5)).collect()
}

fn rand_mark_partition(rng: &mut ChaCha8Rng) -> (Vec<Mark>, Vec<Mark>) {
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &m in &ALL_MARKS {
        if rng.gen_bool(0.5) {
            left.push(m);
        } else {
            right.push(m);
        }
    }
    (left, right)
}

fn mark_index(m: Mark) -> usize {
    match m {
        Mark::O => 0,
        Mark::L => 1,
        Mark::R => 2,
        Mark::X => 3,
    }
}

fn cycle_mark(m: Mark) -> Mark {
    match m {
        Mark::O => Mark::L,
        Mark::L => Mark::R,
        Mark::R => Mark::X,
        Mark::X => Mark::O,
    }
}

fn rotate(adj: &[Node], k: usize) -> Vec<Node> {
    if adj.is_empty() {
        return Vec::new();
    }
    let k = k % adj.len();
    let mut v = adj[k..].to_vec();
    v.extend_from_slice(&adj[..k]);
    v
}

/// A content- and shape-shuffling map function: recolor marks through a
/// random table and rotate the adjacency, preserving its length.
fn structural_map(
    rng: &mut ChaCha8Rng,
) -> impl Fn(Node, &Mark, &[Node]) -> (Mark, Vec<Node>) {
    let table: [Mark; 4] = std::array::from_fn(|_| ALL_MARKS[rng.gen_range(0..4)]);
    let k = rng.gen_range(0..4);
    move |_, &m, adj| (table[mark_index(m)], rotate(adj, k))
}

fn expect_defined<V: Clone>(j: Result<Join<V>, crate::partial_graph::GraphError>) -> Result<PartialGraph<V>, String> {
    match j {
        Ok(Join::Defined(g)) => Ok(g),
        Ok(Join::Undefined) => Err("join of disjoint parts came out undefined".into()),
        Err(e) => Err(format!("join failed: {e}")),
    }
}

// ---------------------------------------------------------------------------
// Join is a commutative, associative partial operation with the empty graph
// as unit; undefined results absorb further joins.

fn law_join_unit(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let e: PartialGraph<V> = PartialGraph::empty(g.kind());
        let left = expect_defined(e.join(g))?;
        let right = expect_defined(g.join(&e))?;
        if left != *g || right != *g {
            return Err(format!("joining the empty graph changed {g}"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(&g),
        GenGraph::Unary(g) => body(&g),
    }
}

fn law_join_commutative(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(g1: &PartialGraph<V>, g2: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let a = g1.join(g2).map_err(|e| e.to_string())?;
        let b = g2.join(g1).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("join is not symmetric on {g1} and {g2}"));
        }
        Ok(())
    }
    // Same id scheme on both draws makes overlap (and so the undefined
    // result) common.
    let kind = rand_kind(rng);
    if kind == Kind::Unary {
        let g1 = gen_unary(rng);
        let g2 = gen_unary(rng);
        body(&g1, &g2)
    } else {
        let g1 = gen_graph(&gen_cfg(rng, kind)).expect_marked();
        let g2 = gen_graph(&gen_cfg(rng, kind)).expect_marked();
        body(&g1, &g2)
    }
}

fn law_join_associative(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(
        g1: &PartialGraph<V>,
        g2: &PartialGraph<V>,
        g3: &PartialGraph<V>,
    ) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let a = g1
            .join(g2)
            .and_then(|j| j.then_join(g3))
            .map_err(|e| e.to_string())?;
        let b = g2
            .join(g3)
            .and_then(|j| j.then_join(g1))
            .map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!(
                "grouping changed the join of {g1}, {g2}, {g3}"
            ));
        }
        Ok(())
    }
    let kind = rand_kind(rng);
    if kind == Kind::Unary {
        let (g1, g2, g3) = (gen_unary(rng), gen_unary(rng), gen_unary(rng));
        body(&g1, &g2, &g3)
    } else {
        let g1 = gen_graph(&gen_cfg(rng, kind)).expect_marked();
        let g2 = gen_graph(&gen_cfg(rng, kind)).expect_marked();
        let g3 = gen_graph(&gen_cfg(rng, kind)).expect_marked();
        body(&g1, &g2, &g3)
    }
}

// ---------------------------------------------------------------------------
// The combinators distribute over join (each is a morphism into its target
// monoid) and map the empty graph to that monoid's unit.

fn law_nodes_distribute(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(rng: &mut ChaCha8Rng, g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let (g1, g2) = split(rng, g);
        let joined = g1
            .nodes()
            .disjoint_union(&g2.nodes())
            .ok_or("split halves share a node")?;
        if g.nodes() != joined {
            return Err(format!("node sets do not split for {g}"));
        }
        let e: PartialGraph<V> = PartialGraph::empty(g.kind());
        if !e.nodes().is_empty() {
            return Err("the empty graph claims nodes".into());
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(rng, &g),
        GenGraph::Unary(g) => body(rng, &g),
    }
}

fn law_filter_nodes_distributes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(rng: &mut ChaCha8Rng, g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let (g1, g2) = split(rng, g);
        let s = rand_subset(rng, &node_pool(g));
        let parts = expect_defined(g1.filter_nodes(&s).join(&g2.filter_nodes(&s)))?;
        if g.filter_nodes(&s) != parts {
            return Err(format!("restriction to {s} does not split for {g}"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(rng, &g),
        GenGraph::Unary(g) => body(rng, &g),
    }
}

fn law_filter_marks_distributes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let (g1, g2) = split(rng, &g);
    let vs = rand_marks(rng);
    let parts = expect_defined(g1.filter_marks(&vs).join(&g2.filter_marks(&vs)))?;
    if g.filter_marks(&vs) != parts {
        return Err(format!("mark restriction to {vs:?} does not split for {g}"));
    }
    Ok(())
}

fn law_erase_distributes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(rng: &mut ChaCha8Rng, g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let (g1, g2) = split(rng, g);
        let parts = expect_defined(g1.erase().join(&g2.erase()))?;
        if g.erase() != parts {
            return Err(format!("erasure does not split for {g}"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(rng, &g),
        GenGraph::Unary(g) => body(rng, &g),
    }
}

fn law_map_distributes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let (g1, g2) = split(rng, &g);
    let f = structural_map(rng);
    let whole = g.map_graph(&f).map_err(|e| e.to_string())?;
    let parts = expect_defined(
        g1.map_graph(&f)
            .map_err(|e| e.to_string())?
            .join(&g2.map_graph(&f).map_err(|e| e.to_string())?),
    )?;
    if whole != parts {
        return Err(format!("mapping does not split for {g}"));
    }
    let e: MarkGraph = PartialGraph::empty(g.kind());
    if !e.map_graph(&f).map_err(|e| e.to_string())?.is_empty() {
        return Err("mapping the empty graph produced nodes".into());
    }
    Ok(())
}

fn law_sinks_distribute(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(rng: &mut ChaCha8Rng, g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let (g1, g2) = split(rng, g);
        if g.sinks() != g1.sinks().union(&g2.sinks()) {
            return Err(format!("sink sets do not combine by plain union for {g}"));
        }
        let e: PartialGraph<V> = PartialGraph::empty(g.kind());
        if !e.sinks().is_empty() {
            return Err("the empty graph claims sinks".into());
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(rng, &g),
        GenGraph::Unary(g) => body(rng, &g),
    }
}

// ---------------------------------------------------------------------------
// Filtering: splitting the restriction set or the mark set splits the graph;
// intersecting sets composes; disjoint mark sets annihilate.

fn law_filter_splits_on_disjoint_sets(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(rng: &mut ChaCha8Rng, g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let pool = node_pool(g);
        let s1 = rand_subset(rng, &pool);
        let rest: Vec<Node> = pool.iter().copied().filter(|x| !s1.contains(*x)).collect();
        let s2 = rand_subset(rng, &rest);
        let both = s1.disjoint_union(&s2).expect("constructed disjoint");
        let parts = expect_defined(g.filter_nodes(&s1).join(&g.filter_nodes(&s2)))?;
        if g.filter_nodes(&both) != parts {
            return Err(format!("restriction does not split over {s1} + {s2} for {g}"));
        }
        if !g.filter_nodes(&NodeSet::new()).is_empty() {
            return Err(format!("restriction to the empty set kept nodes of {g}"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(rng, &g),
        GenGraph::Unary(g) => body(rng, &g),
    }
}

fn law_filter_splits_on_disjoint_marks(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let (vs, ws) = rand_mark_partition(rng);
    let all: Vec<Mark> = vs.iter().chain(ws.iter()).copied().collect();
    let parts = expect_defined(g.filter_marks(&vs).join(&g.filter_marks(&ws)))?;
    if g.filter_marks(&all) != parts {
        return Err(format!(
            "mark restriction does not split over {vs:?} + {ws:?} for {g}"
        ));
    }
    Ok(())
}

fn law_filter_intersection_composes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(rng: &mut ChaCha8Rng, g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let pool = node_pool(g);
        let s1 = rand_subset(rng, &pool);
        let s2 = rand_subset(rng, &pool);
        if g.filter_nodes(&s1.intersection(&s2)) != g.filter_nodes(&s1).filter_nodes(&s2) {
            return Err(format!(
                "restricting to {s1} then {s2} differs from their intersection for {g}"
            ));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(rng, &g),
        GenGraph::Unary(g) => body(rng, &g),
    }
}

fn law_disjoint_mark_filters_annihilate(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let (vs, ws) = rand_mark_partition(rng);
    if !g.filter_marks(&vs).filter_marks(&ws).is_empty() {
        return Err(format!(
            "disjoint mark restrictions {vs:?} then {ws:?} kept nodes of {g}"
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Mapping consults the function only on the graph's own entries, and two
// functions differing on an entry produce different graphs.

type EntryTable = BTreeMap<Node, (Mark, Vec<Node>)>;

fn rand_entry_table(rng: &mut ChaCha8Rng, g: &MarkGraph) -> EntryTable {
    g.iter()
        .map(|(x, _, adj)| {
            let m = ALL_MARKS[rng.gen_range(0..4)];
            let k = rng.gen_range(0..4);
            (x, (m, rotate(adj, k)))
        })
        .collect()
}

fn apply_table(g: &MarkGraph, t: &EntryTable) -> MarkGraph {
    g.map_graph(|x, &m, adj| t.get(&x).cloned().unwrap_or((m, adj.to_vec())))
        .expect("tables preserve adjacency length")
}

fn law_map_extensional(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let t1 = rand_entry_table(rng, &g);
    let mut t2 = t1.clone();
    // Junk behavior at ids the graph never mentions must be invisible.
    let fresh = fresh_node(&g);
    t2.insert(fresh, (Mark::X, vec![fresh]));
    t2.insert(fresh.offset(1), (Mark::L, vec![]));
    if apply_table(&g, &t1) != apply_table(&g, &t2) {
        return Err(format!("map consulted its function outside {g}"));
    }
    Ok(())
}

fn law_map_discriminates(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    if g.is_empty() {
        return Ok(());
    }
    let t1 = rand_entry_table(rng, &g);
    let nodes: Vec<Node> = g.nodes().iter().collect();
    let z = pick(rng, &nodes);
    let mut t2 = t1.clone();
    let (m, adj) = t2.get(&z).cloned().expect("table covers the graph");
    t2.insert(z, (cycle_mark(m), adj));
    if apply_table(&g, &t1) == apply_table(&g, &t2) {
        return Err(format!(
            "maps with different outputs at {z} coincided on {g}"
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Reachability ignores contents, is unaffected by removing unreached nodes,
// and splits around a reached one; the definitional recursion matches the
// worklist oracle.

fn law_reach_ignores_content(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let x = pick(rng, &node_pool(&g));
    if g.reach(x) != g.erase().reach(x) {
        return Err(format!("erasing contents changed reach from {x} in {g}"));
    }
    Ok(())
}

fn law_reach_drops_unreached_node(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let x = pick(rng, &node_pool(&g));
    let r = g.reach(x);
    let outside: Vec<Node> = g.nodes().iter().filter(|y| !r.contains(*y)).collect();
    if outside.is_empty() {
        return Ok(());
    }
    let y = pick(rng, &outside);
    if g.remove(y).reach(x) != r {
        return Err(format!("removing unreached {y} changed reach from {x} in {g}"));
    }
    Ok(())
}

fn law_reach_splits_at_reached_node(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let x = pick(rng, &node_pool(&g));
    let r = g.reach(x);
    if r.is_empty() {
        return Ok(());
    }
    let members: Vec<Node> = r.iter().collect();
    let y = pick(rng, &members);
    if r != g.remove(y).reach(x).union(&g.reach(y)) {
        return Err(format!("reach from {x} does not split at {y} in {g}"));
    }
    Ok(())
}

fn law_reach_agrees_with_worklist(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked(rng);
    let pool = node_pool(&g);
    for _ in 0..3 {
        let x = pick(rng, &pool);
        if g.reach(x) != reach_oracle(&g, x) {
            return Err(format!("recursive and worklist reach differ from {x} in {g}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Closure: restriction to a reachable set stays closed, decomposes cleanly,
// and closure survives redirecting a child within the graph.

fn law_closed_survives_reachable_restriction(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked_closed(rng);
    let x = pick(rng, &node_pool(&g));
    let sub = g.filter_nodes(&g.reach(x));
    if !sub.closed() {
        return Err(format!("reachable part from {x} of closed {g} is open: {sub}"));
    }
    Ok(())
}

fn law_closed_reachable_decomposition(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_marked_closed(rng);
    if g.is_empty() {
        return Ok(());
    }
    let nodes: Vec<Node> = g.nodes().iter().collect();
    let x = pick(rng, &nodes);
    let r = g.reach(x);
    let g1 = g.filter_nodes(&r);
    let g2 = g.filter_nodes(&g.nodes().difference(&r));
    let rejoined = expect_defined(g1.join(&g2))?;
    if rejoined != g {
        return Err(format!("reachable split of {g} does not rejoin"));
    }
    if !g1.closed() {
        return Err(format!("reachable part from {x} of {g} is open"));
    }
    if !g1.contains(x) {
        return Err(format!("reachable part from {x} of {g} lost its start"));
    }
    if g1.reach(x) != g1.nodes() {
        return Err(format!("reachable part from {x} of {g} is not spanned by {x}"));
    }
    Ok(())
}

fn law_closed_survives_child_redirect(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_graph(&gen_cfg(rng, Kind::Binary).closed()).expect_marked();
    if g.is_empty() {
        return Ok(());
    }
    let nodes: Vec<Node> = g.nodes().iter().collect();
    let x = pick(rng, &nodes);
    let targets: Vec<Node> = g.nodes0().iter().collect();
    let y = pick(rng, &targets);
    let slot = rng.gen_range(0..2);
    let redirected = g
        .map_graph(|n, &m, adj| {
            let mut adj = adj.to_vec();
            if n == x {
                adj[slot] = y;
            }
            (m, adj)
        })
        .expect("arity preserved");
    if !redirected.closed() {
        return Err(format!(
            "redirecting a child of {x} to in-graph {y} opened {g}"
        ));
    }
    Ok(())
}

fn law_graph_rebuilds_from_singletons(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let singletons: Vec<PartialGraph<V>> = g
            .iter()
            .map(|(x, v, adj)| {
                PartialGraph::singleton(g.kind(), x, v.clone(), adj.to_vec())
                    .expect("entries are valid singletons")
            })
            .collect();
        let rebuilt = expect_defined(join_all(g.kind(), singletons))?;
        if rebuilt != *g {
            return Err(format!("{g} is not the join of its singletons"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(&g),
        GenGraph::Unary(g) => body(&g),
    }
}

// ---------------------------------------------------------------------------
// The marking transformations: without partially marked nodes they are
// erasure; they only consult the redirect function on partially marked
// nodes; and a stack already covering those nodes absorbs one extension.

fn random_sequence(rng: &mut ChaCha8Rng, pool: &[Node], len: usize) -> Vec<Node> {
    (0..len).map(|_| pick(rng, pool)).collect()
}

fn law_unstacked_graphs_erase(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_binary(rng)
        .map_graph(|_, &m, adj| {
            let m = match m {
                Mark::L => Mark::O,
                Mark::R => Mark::X,
                other => other,
            };
            (m, adj.to_vec())
        })
        .expect("arity preserved");
    let pool = node_pool(&g);
    let len = rng.gen_range(0..5);
    let alpha = random_sequence(rng, &pool, len);
    let t = pick(rng, &pool);
    if inset(&alpha, &g) != g.erase() {
        return Err(format!("inset moved edges of the fully marked {g}"));
    }
    if restore(t, &alpha, &g) != g.erase() {
        return Err(format!("restore moved edges of the fully marked {g}"));
    }
    Ok(())
}

fn law_if_mark_extensional(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_binary(rng);
    let partial = g.filter_marks(&[Mark::L, Mark::R]).nodes();
    let pool = node_pool(&g);
    let f1: BTreeMap<Node, Node> = pool
        .iter()
        .map(|&x| (x, pick(rng, &pool)))
        .collect();
    let mut f2 = f1.clone();
    for &x in pool.iter().filter(|x| !partial.contains(**x)) {
        f2.insert(x, pick(rng, &pool));
    }
    let apply = |table: &BTreeMap<Node, Node>| {
        let f = |y: Node| table.get(&y).copied().unwrap_or(y);
        g.map_graph(|x, &m, adj| ((), if_mark(f, x, m, adj)))
            .expect("if_mark preserves arity")
    };
    if apply(&f1) != apply(&f2) {
        return Err(format!(
            "redirect functions differing only off the partially marked nodes disagreed on {g}"
        ));
    }
    Ok(())
}

fn covered_stack(rng: &mut ChaCha8Rng, g: &MarkGraph) -> Vec<Node> {
    let mut alpha: Vec<Node> = g.filter_marks(&[Mark::L, Mark::R]).nodes().iter().collect();
    for x in g.nodes().iter() {
        if !alpha.contains(&x) && rng.gen_bool(0.3) {
            alpha.push(x);
        }
    }
    alpha.shuffle(rng);
    alpha
}

fn law_covered_stack_absorbs_extension_inset(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_binary(rng);
    let alpha = covered_stack(rng, &g);
    let p = fresh_node(&g);
    let mut extended = alpha.clone();
    extended.push(p);
    if inset(&extended, &g) != inset(&alpha, &g) {
        return Err(format!(
            "a fresh node {p} on top of a covering stack changed inset for {g}"
        ));
    }
    Ok(())
}

fn law_covered_stack_absorbs_extension_restore(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_binary(rng);
    let alpha = covered_stack(rng, &g);
    let p = fresh_node(&g);
    let t = pick(rng, &node_pool(&g));
    let mut extended = alpha.clone();
    extended.push(p);
    if restore(t, &extended, &g) != restore(p, &alpha, &g) {
        return Err(format!(
            "handing the covering stack's extension {p} to the tip changed restore for {g}"
        ));
    }
    Ok(())
}

fn gen_marking_input(rng: &mut ChaCha8Rng) -> (MarkGraph, Node) {
    let size = rng.gen_range(1..=8);
    let cfg = GenConfig::new(Kind::Binary, size, rng.gen())
        .density([0.2, 0.5, 0.8][rng.gen_range(0..3)])
        .closed()
        .unmarked();
    let g = gen_graph(&cfg).expect_marked();
    let nodes: Vec<Node> = g.nodes().iter().collect();
    let root = pick(rng, &nodes);
    (g, root)
}

fn law_marking_ops_meet_contracts(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (g, root) = gen_marking_input(rng);
    let opts = SwOptions {
        check_each_iteration: false,
        trace: false,
        debug_ops: true,
        require_connected: false,
    };
    sw_run(&g, root, &opts)
        .map(|_| ())
        .map_err(|f| format!("marking {g} from {root}: {f}"))
}

fn law_marking_agrees_with_traversal(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (g, root) = gen_marking_input(rng);
    let run = sw_run(&g, root, &SwOptions::default())
        .map_err(|f| format!("marking {g} from {root}: {f}"))?;
    if run.marked != dfs_mark(&g, root) {
        return Err(format!(
            "marked set from {root} disagrees with recursive traversal on {g}"
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The path-end algebra: dangling targets and cycles distribute and
// characterize summits; forests make the subtractive split exact.

fn law_dangls_split_subtractively(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(rng: &mut ChaCha8Rng, g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        let (g1, g2) = split(rng, g);
        let want = dangls(&g1)
            .difference(&g2.nodes())
            .union(&dangls(&g2).difference(&g1.nodes()));
        if dangls(g) != want {
            return Err(format!("dangling targets do not split subtractively for {g}"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(rng, &g),
        GenGraph::Unary(g) => body(rng, &g),
    }
}

fn law_loops_within_cycles_within_nodes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        if !loops(g).is_subset(&cycles(g)) {
            return Err(format!("a self-loop fell outside the cycle set for {g}"));
        }
        if !cycles(g).is_subset(&g.nodes()) {
            return Err(format!("a cycle member fell outside the graph for {g}"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(&g),
        GenGraph::Unary(g) => body(&g),
    }
}

fn law_dangls_outside_nodes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    fn body<V>(g: &PartialGraph<V>) -> Result<(), String>
    where
        V: Clone + PartialEq + fmt::Debug,
        PartialGraph<V>: fmt::Display,
    {
        if !dangls(g).is_disjoint(&g.nodes()) {
            return Err(format!("a dangling target is also a node in {g}"));
        }
        Ok(())
    }
    match gen_any(rng) {
        GenGraph::Marked(g) => body(&g),
        GenGraph::Unary(g) => body(&g),
    }
}

fn law_summits_are_cycles_plus_dangls(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_unary(rng);
    let c = cycles(&g);
    let d = dangls(&g);
    if !c.is_disjoint(&d) {
        return Err(format!("cycles and dangling targets overlap in {g}"));
    }
    if summits(&g) != c.union(&d) {
        return Err(format!("summits differ from cycles plus dangling targets for {g}"));
    }
    Ok(())
}

fn law_equal_summits_absorb_join(rng: &mut ChaCha8Rng) -> Result<(), String> {
    // Two disjoint components whose every path dangles at the same target
    // have equal summit sets by construction.
    fn chains_to(rng: &mut ChaCha8Rng, z: Node, base: u64, n: u64) -> UnitGraph {
        let mut g = PartialGraph::empty(Kind::Unary);
        for k in 0..n {
            let succ = if k + 1 < n && rng.gen_bool(0.6) {
                Node(base + rng.gen_range(k + 1..n))
            } else {
                z
            };
            g.insert(Node(base + k), (), vec![succ]).expect("distinct ids");
        }
        g
    }
    let z = Node(100);
    let (n1, n2) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
    let g1 = chains_to(rng, z, 1, n1);
    let g2 = chains_to(rng, z, 50, n2);
    if summits(&g1) != summits(&g2) {
        return Err(format!("construction broke: {g1} and {g2} differ in summits"));
    }
    let joined = expect_defined(g1.join(&g2))?;
    if summits(&joined) != summits(&g1) {
        return Err(format!(
            "joining graphs with equal summits changed them: {g1} + {g2}"
        ));
    }
    Ok(())
}

fn law_loop_removal_shrinks_summits(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_unary(rng);
    let looped: Vec<Node> = loops(&g).iter().collect();
    if looped.is_empty() {
        return Ok(());
    }
    let x = pick(rng, &looped);
    if !summits(&g.remove(x)).is_subset(&summits(&g)) {
        return Err(format!("removing the self-looped {x} grew the summits of {g}"));
    }
    Ok(())
}

fn law_inverted_forests_are_closed_and_preacyclic(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = if rng.gen_bool(0.5) { gen_forest(rng) } else { gen_unary(rng) };
    let forest = inverted_forest(&g);
    if forest && !(g.closed() && preacyclic(&g)) {
        return Err(format!("the inverted forest {g} is open or has a long cycle"));
    }
    // The exact characterization: no dangling targets at all (null included)
    // and no cycles beyond self-loops. Closure alone is weaker — a closed
    // graph may point at null.
    let characterized = dangls(&g).is_empty() && preacyclic(&g);
    if forest != characterized {
        return Err(format!(
            "forest-ness is {forest} but the dangling/cycle characterization says {characterized} for {g}"
        ));
    }
    Ok(())
}

fn law_forest_summits_split_subtractively(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_forest(rng);
    let (g1, g2) = split(rng, &g);
    let left = summits(&g1).difference(&g2.nodes());
    let right = summits(&g2).difference(&g1.nodes());
    if !left.is_disjoint(&right) {
        return Err(format!("the subtracted summit sides overlap for forest {g}"));
    }
    if summits(&g) != left.union(&right) {
        return Err(format!("summits do not split subtractively for forest {g}"));
    }
    Ok(())
}

fn law_preacyclic_summits_split_subtractively(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_preacyclic(rng);
    if !preacyclic(&g) {
        return Err(format!("construction broke: {g} has a non-trivial cycle"));
    }
    let (g1, g2) = split(rng, &g);
    let want = summits(&g1)
        .difference(&g2.nodes())
        .union(&summits(&g2).difference(&g1.nodes()));
    if summits(&g) != want {
        return Err(format!("summits do not split subtractively for {g}"));
    }
    Ok(())
}

fn law_summit_climbs_to_parent(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_forest(rng);
    if g.is_empty() {
        return Ok(());
    }
    let nodes: Vec<Node> = g.nodes().iter().collect();
    let x = pick(rng, &nodes);
    let parent = g.adj(x).expect("x is in the graph")[0];
    if summit(&g, x) != summit(&g, parent) {
        return Err(format!("stepping from {x} to its parent changed the summit in {g}"));
    }
    Ok(())
}

fn law_preacyclic_survives_redirect_out(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_preacyclic(rng);
    if g.is_empty() {
        return Ok(());
    }
    let nodes: Vec<Node> = g.nodes().iter().collect();
    let x = pick(rng, &nodes);
    let y = if rng.gen_bool(0.3) { NULL } else { fresh_node(&g) };
    let redirected = g
        .map_graph(|n, &v, adj| {
            let adj = if n == x { vec![y] } else { adj.to_vec() };
            (v, adj)
        })
        .expect("arity preserved");
    if !preacyclic(&redirected) {
        return Err(format!(
            "redirecting {x} out of the graph to {y} created a cycle in {g}"
        ));
    }
    Ok(())
}

fn law_summit_agrees_with_path_enumeration(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_unary(rng);
    if summits(&g) != summits_oracle(&g) {
        return Err(format!("summit sets differ from path enumeration for {g}"));
    }
    let pool = node_pool(&g);
    for _ in 0..3 {
        let x = pick(rng, &pool);
        if summit(&g, x) != summit_oracle(&g, x) {
            return Err(format!("summit of {x} differs from path enumeration for {g}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Heap layouts: abstraction inverts layout, and laying out a join equals
// joining the layouts.

fn law_layout_binary_roundtrip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_binary(rng);
    let h = layout_binary(&g).map_err(|e| format!("layout of {g}: {e}"))?;
    let back = abstract_binary(&h, &g.nodes()).map_err(|e| format!("abstraction of {g}: {e}"))?;
    if back != g {
        return Err(format!("binary layout round-trip changed {g}"));
    }
    Ok(())
}

fn law_layout_unary_roundtrip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_unary(rng);
    let h = layout_unary(&g).map_err(|e| format!("layout of {g}: {e}"))?;
    let back = abstract_unary(&h, &g.nodes()).map_err(|e| format!("abstraction of {g}: {e}"))?;
    if back != g {
        return Err(format!("unary layout round-trip changed {g}"));
    }
    Ok(())
}

fn law_layout_general_roundtrip(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_graph(&gen_cfg(rng, Kind::General)).expect_marked();
    let h = layout_general(&g).map_err(|e| format!("layout of {g}: {e}"))?;
    let back = abstract_general(&h, &g.nodes()).map_err(|e| format!("abstraction of {g}: {e}"))?;
    if back != g {
        return Err(format!("general layout round-trip changed {g}"));
    }
    Ok(())
}

fn law_layout_binary_distributes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_binary(rng);
    let (g1, g2) = split(rng, &g);
    let whole = layout_binary(&g).map_err(|e| e.to_string())?;
    let h1 = layout_binary(&g1).map_err(|e| e.to_string())?;
    let h2 = layout_binary(&g2).map_err(|e| e.to_string())?;
    match h1.join(&h2) {
        Some(joined) if joined == whole => Ok(()),
        Some(_) => Err(format!("binary layout of halves joins to a different heap for {g}")),
        None => Err(format!("binary layouts of disjoint halves collide for {g}")),
    }
}

fn law_layout_unary_distributes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_unary(rng);
    let (g1, g2) = split(rng, &g);
    let whole = layout_unary(&g).map_err(|e| e.to_string())?;
    let h1 = layout_unary(&g1).map_err(|e| e.to_string())?;
    let h2 = layout_unary(&g2).map_err(|e| e.to_string())?;
    match h1.join(&h2) {
        Some(joined) if joined == whole => Ok(()),
        Some(_) => Err(format!("unary layout of halves joins to a different heap for {g}")),
        None => Err(format!("unary layouts of disjoint halves collide for {g}")),
    }
}

fn law_layout_general_distributes(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let g = gen_graph(&gen_cfg(rng, Kind::General)).expect_marked();
    let (g1, g2) = split(rng, &g);
    let whole = layout_general(&g).map_err(|e| e.to_string())?;
    let h1 = layout_general(&g1).map_err(|e| e.to_string())?;
    let h2 = layout_general(&g2).map_err(|e| e.to_string())?;
    match h1.join(&h2) {
        Some(joined) if joined == whole => Ok(()),
        Some(_) => Err(format!("general layout of halves joins to a different heap for {g}")),
        None => Err(format!("general layouts of disjoint halves collide for {g}")),
    }
}

// ---------------------------------------------------------------------------
// Exhaustive sweep over the three-node universe.

/// The result of the tiny-universe sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TinyReport {
    /// Single graphs enumerated.
    pub graphs: usize,
    /// Disjoint pairs enumerated.
    pub pairs: usize,
    pub failure: Option<String>,
}

impl TinyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for TinyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "tiny universe: ok ({} graphs, {} pairs)", self.graphs, self.pairs),
            Some(detail) => write!(f, "tiny universe: FAIL: {detail}"),
        }
    }
}

/// Node states in the single-graph enumeration: absent, or any of four marks
/// times four left children times four right children.
const TINY_STATES: u8 = 65;

fn tiny_entry(state: u8) -> Option<(Mark, Node, Node)> {
    if state == 0 {
        return None;
    }
    let s = state - 1;
    Some((
        ALL_MARKS[(s / 16) as usize],
        Node(u64::from((s / 4) % 4)),
        Node(u64::from(s % 4)),
    ))
}

fn tiny_graph(code: [u8; 3]) -> MarkGraph {
    let entries = code.iter().enumerate().filter_map(|(i, &state)| {
        tiny_entry(state).map(|(m, l, r)| (Node(i as u64 + 1), m, vec![l, r]))
    });
    PartialGraph::from_entries(Kind::Binary, entries).expect("tiny ids are distinct and nonzero")
}

fn tiny_single_checks(g: &MarkGraph) -> Result<(), String> {
    let e: MarkGraph = PartialGraph::empty(Kind::Binary);
    if expect_defined(e.join(g))? != *g || expect_defined(g.join(&e))? != *g {
        return Err(format!("joining the empty graph changed {g}"));
    }
    if !g.is_empty() && g.join(g).map_err(|e| e.to_string())? != Join::Undefined {
        return Err(format!("self-join of {g} was defined"));
    }

    let s_a = NodeSet::from_ids([1]);
    let s_b = NodeSet::from_ids([2, 3]);
    let s_c = NodeSet::from_ids([1, 3]);
    let both = s_a.disjoint_union(&s_b).unwrap();
    if g.filter_nodes(&both) != expect_defined(g.filter_nodes(&s_a).join(&g.filter_nodes(&s_b)))? {
        return Err(format!("restriction does not split on the fixed sets for {g}"));
    }
    if !g.filter_nodes(&NodeSet::new()).is_empty() {
        return Err(format!("restriction to the empty set kept nodes of {g}"));
    }
    if g.filter_nodes(&s_c.intersection(&s_b)) != g.filter_nodes(&s_c).filter_nodes(&s_b) {
        return Err(format!("intersection filtering does not compose for {g}"));
    }
    if g.filter_marks(&ALL_MARKS) != *g {
        return Err(format!("filtering by every mark changed {g}"));
    }
    let lo = [Mark::O, Mark::L];
    let hi = [Mark::R, Mark::X];
    if *g != expect_defined(g.filter_marks(&lo).join(&g.filter_marks(&hi)))? {
        return Err(format!("mark restriction does not split on the fixed partition for {g}"));
    }
    if !g.filter_marks(&[Mark::O]).filter_marks(&[Mark::X]).is_empty() {
        return Err(format!("disjoint mark restrictions kept nodes of {g}"));
    }

    let identity = g
        .map_graph(|_, &m, adj| (m, adj.to_vec()))
        .expect("arity preserved");
    if identity != *g {
        return Err(format!("identity map changed {g}"));
    }
    if !g.is_empty() {
        let cycled = g
            .map_graph(|_, &m, adj| (cycle_mark(m), adj.to_vec()))
            .expect("arity preserved");
        if cycled == *g {
            return Err(format!("recoloring every mark left {g} unchanged"));
        }
    }

    for x in [Node(1), Node(2)] {
        if g.reach(x) != reach_oracle(g, x) {
            return Err(format!("recursive and worklist reach differ from {x} in {g}"));
        }
    }
    if g.reach(Node(1)) != g.erase().reach(Node(1)) {
        return Err(format!("erasure changed reach in {g}"));
    }
    for (x, y) in [(Node(1), Node(2)), (Node(2), Node(3))] {
        let r = g.reach(x);
        if r.contains(y) {
            if r != g.remove(y).reach(x).union(&g.reach(y)) {
                return Err(format!("reach from {x} does not split at {y} in {g}"));
            }
        } else if g.remove(y).reach(x) != r {
            return Err(format!("removing unreached {y} changed reach from {x} in {g}"));
        }
    }

    let singletons: Vec<MarkGraph> = g
        .iter()
        .map(|(x, &m, adj)| {
            PartialGraph::singleton(Kind::Binary, x, m, adj.to_vec()).expect("valid entries")
        })
        .collect();
    if expect_defined(join_all(Kind::Binary, singletons))? != *g {
        return Err(format!("{g} is not the join of its singletons"));
    }

    if g.closed() {
        if !g.filter_nodes(&g.reach(Node(1))).closed() {
            return Err(format!("reachable restriction of closed {g} is open"));
        }
        if let Some(x) = g.nodes().iter().next() {
            for y in [NULL, x] {
                let redirected = g
                    .map_graph(|n, &m, adj| {
                        let mut adj = adj.to_vec();
                        if n == x {
                            adj[0] = y;
                        }
                        (m, adj)
                    })
                    .expect("arity preserved");
                if !redirected.closed() {
                    return Err(format!("child redirect to {y} opened closed {g}"));
                }
            }
        }
    }
    Ok(())
}

/// Pair states: each universe node is absent, in the first graph, or in the
/// second, with any mark and children when present.
const TINY_PAIR_STATES: u8 = 129;

fn tiny_pair(code: [u8; 3]) -> (MarkGraph, MarkGraph) {
    let mut first = [0u8; 3];
    let mut second = [0u8; 3];
    for (i, &state) in code.iter().enumerate() {
        if state == 0 {
            continue;
        } else if state <= 64 {
            first[i] = state;
        } else {
            second[i] = state - 64;
        }
    }
    (tiny_graph(first), tiny_graph(second))
}

fn tiny_pair_checks(g1: &MarkGraph, g2: &MarkGraph, sample: bool) -> Result<(), String> {
    let g = expect_defined(g1.join(g2))?;
    if g1.join(g2).map_err(|e| e.to_string())? != g2.join(g1).map_err(|e| e.to_string())? {
        return Err(format!("join is not symmetric on {g1} and {g2}"));
    }
    let nodes = g1
        .nodes()
        .disjoint_union(&g2.nodes())
        .ok_or_else(|| format!("disjoint pair shares nodes: {g1} and {g2}"))?;
    if g.nodes() != nodes {
        return Err(format!("node sets do not split for {g1} and {g2}"));
    }
    if g.sinks() != g1.sinks().union(&g2.sinks()) {
        return Err(format!("sink sets do not combine for {g1} and {g2}"));
    }
    if g.erase() != expect_defined(g1.erase().join(&g2.erase()))? {
        return Err(format!("erasure does not split for {g1} and {g2}"));
    }
    let s = NodeSet::from_ids([1, 3]);
    if g.filter_nodes(&s) != expect_defined(g1.filter_nodes(&s).join(&g2.filter_nodes(&s)))? {
        return Err(format!("restriction does not split for {g1} and {g2}"));
    }
    let vs = [Mark::O, Mark::X];
    if g.filter_marks(&vs) != expect_defined(g1.filter_marks(&vs).join(&g2.filter_marks(&vs)))? {
        return Err(format!("mark restriction does not split for {g1} and {g2}"));
    }
    let f = |_: Node, m: &Mark, adj: &[Node]| (cycle_mark(*m), rotate(adj, 1));
    let mapped = g.map_graph(f).expect("arity preserved");
    let mapped_parts = expect_defined(
        g1.map_graph(f)
            .expect("arity preserved")
            .join(&g2.map_graph(f).expect("arity preserved")),
    )?;
    if mapped != mapped_parts {
        return Err(format!("mapping does not split for {g1} and {g2}"));
    }

    if sample {
        // A third operand drawn from a fixed family, overlapping often, to
        // exercise associativity with undefined absorption.
        for third in [[9u8, 0, 0], [0, 33, 0], [17, 0, 49]] {
            let g3 = tiny_graph(third);
            let a = g1
                .join(g2)
                .and_then(|j| j.then_join(&g3))
                .map_err(|e| e.to_string())?;
            let b = g2
                .join(&g3)
                .and_then(|j| j.then_join(g1))
                .map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("grouping changed the join of {g1}, {g2}, {g3}"));
            }
        }
    }
    Ok(())
}

/// Enumerate every graph and every disjoint pair over the universe
/// `{1, 2, 3}` and check the join and distribution laws on all of them.
/// Parameter families (restriction sets, mark sets, map functions, reach
/// arguments) are fixed rather than enumerated, and the three-operand
/// associativity check runs on a deterministic subsample of pairs.
pub fn exhaustive_tiny() -> TinyReport {
    let mut graphs = 0usize;
    let mut pairs = 0usize;

    for c1 in 0..TINY_STATES {
        for c2 in 0..TINY_STATES {
            for c3 in 0..TINY_STATES {
                let g = tiny_graph([c1, c2, c3]);
                graphs += 1;
                if let Err(detail) = tiny_single_checks(&g) {
                    return TinyReport { graphs, pairs, failure: Some(detail) };
                }
            }
        }
    }

    for c1 in 0..TINY_PAIR_STATES {
        for c2 in 0..TINY_PAIR_STATES {
            for c3 in 0..TINY_PAIR_STATES {
                let (g1, g2) = tiny_pair([c1, c2, c3]);
                pairs += 1;
                let sample = pairs.is_multiple_of(64);
                if let Err(detail) = tiny_pair_checks(&g1, &g2, sample) {
                    return TinyReport { graphs, pairs, failure: Some(detail) };
                }
            }
        }
    }

    TinyReport { graphs, pairs, failure: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn registry_names_are_unique() {
        let names: Vec<&str> = registry().iter().map(|l| l.name).collect();
        let unique: BTreeSet<&str> = names.iter().copied().collect();
        assert_eq!(names.len(), unique.len());
    }

    #[test]
    fn every_law_passes_a_smoke_run() {
        for outcome in run_all(7, 40) {
            assert!(outcome.passed(), "{outcome}");
        }
    }

    #[test]
    fn law_runs_are_deterministic() {
        let a = run_all(11, 10);
        let b = run_all(11, 10);
        assert_eq!(a, b);
    }

    #[test]
    fn failures_carry_case_and_detail() {
        fn always_fails(_: &mut ChaCha8Rng) -> Result<(), String> {
            Err("broken on purpose".into())
        }
        let law = Law { name: "self-test-failure", check: always_fails };
        let outcome = run_law(&law, 1, 10);
        assert!(!outcome.passed());
        assert_eq!(outcome.cases, 1);
        let failure = outcome.failure.as_ref().unwrap();
        assert_eq!(failure.case, 0);
        assert_eq!(outcome.to_string(), "self-test-failure: FAIL at case 0: broken on purpose");
    }

    #[test]
    fn tiny_graphs_decode_every_state() {
        assert_eq!(tiny_graph([0, 0, 0]).node_count(), 0);
        let g = tiny_graph([1, 0, 64]);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.get(Node(1)), Some((&Mark::O, [NULL, NULL].as_slice())));
        assert_eq!(g.get(Node(3)), Some((&Mark::X, [Node(3), Node(3)].as_slice())));
        let (g1, g2) = tiny_pair([1, 65, 0]);
        assert_eq!(g1.nodes(), NodeSet::from_ids([1]));
        assert_eq!(g2.nodes(), NodeSet::from_ids([2]));
        assert_eq!(g2.get(Node(2)), Some((&Mark::O, [NULL, NULL].as_slice())));
    }
}
