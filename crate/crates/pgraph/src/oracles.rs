//! Independent reference implementations and input generators.
//!
//! Everything here exists to cross-check another module, so each oracle is
//! written in a deliberately different style from the code it checks and
//! never calls it: [`reach_oracle`] is a breadth-first worklist where
//! [`PartialGraph::reach`] is a backtracking recursion, [`dfs_mark`] is a
//! plain recursive traversal where the marking runner is a pointer machine,
//! [`summit_oracle`] enumerates explicit path vectors where the summit
//! recursion removes and restores nodes, and [`partition_oracle`] tracks sets
//! of sets with stored representatives where the replayed algorithm chases
//! parent pointers through a heap.
//!
//! Generation is pseudo-random but fully deterministic: a fixed, seedable
//! stream cipher generator (ChaCha with 8 rounds) and a documented drawing
//! order, so a failing case reproduces from its config alone, on any
//! platform.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::partial_graph::{
    Kind, Mark, MarkGraph, Node, NodeSet, PartialGraph, UnitGraph, ALL_MARKS, NULL,
};
use crate::union_find::{ScriptError, UfOp, UfScript};

/// Nodes reachable from `r` by a recursive depth-first, left-to-right walk
/// with an explicit visited set. The marking runner's final `X` set is
/// checked against exactly this.
pub fn dfs_mark(g: &MarkGraph, r: Node) -> NodeSet {
    let mut visited = NodeSet::new();
    dfs_go(g, r, &mut visited);
    visited
}

fn dfs_go(g: &MarkGraph, x: Node, visited: &mut NodeSet) {
    if x.is_null() || !g.contains(x) || visited.contains(x) {
        return;
    }
    visited.insert(x);
    for &y in g.adj(x).expect("x is in the graph") {
        dfs_go(g, y, visited);
    }
}

/// Reachability by breadth-first worklist, the cross-check for
/// [`PartialGraph::reach`]. Starting outside the graph reaches nothing.
pub fn reach_oracle<V: Clone>(g: &PartialGraph<V>, x: Node) -> NodeSet {
    if !g.contains(x) {
        return NodeSet::new();
    }
    let mut seen = NodeSet::singleton(x);
    let mut queue = VecDeque::from([x]);
    while let Some(v) = queue.pop_front() {
        for &y in g.adj(v).expect("v came off the worklist") {
            if g.contains(y) && !seen.contains(y) {
                seen.insert(y);
                queue.push_back(y);
            }
        }
    }
    seen
}

/// The summit of `x` by explicit path enumeration: walk every simple path
/// from `x` and collect each child `z` of a path end with `z` outside the
/// graph or already on the path. Cross-check for [`crate::union_find::summit`].
pub fn summit_oracle<V: Clone>(g: &PartialGraph<V>, x: Node) -> NodeSet {
    let mut acc = NodeSet::new();
    if !g.contains(x) {
        acc.insert(x);
        return acc;
    }
    let mut path = Vec::new();
    path_walk(g, x, &mut path, &mut acc);
    acc
}

fn path_walk<V: Clone>(g: &PartialGraph<V>, v: Node, path: &mut Vec<Node>, acc: &mut NodeSet) {
    path.push(v);
    for &z in g.adj(v).expect("v is on the path") {
        if !g.contains(z) || path.contains(&z) {
            acc.insert(z);
        } else {
            path_walk(g, z, path, acc);
        }
    }
    path.pop();
}

/// Summits of all nodes, by path enumeration.
pub fn summits_oracle<V: Clone>(g: &PartialGraph<V>) -> NodeSet {
    let mut acc = NodeSet::new();
    for x in g.nodes().iter() {
        let mut path = Vec::new();
        path_walk(g, x, &mut path, &mut acc);
    }
    acc
}

/// A family of disjoint sets, each with a stored representative. Element
/// names are allocation ordinals: the `k`-th created element is `Node(k)`,
/// counting from 1. To compare against a heap replay, translate through the
/// replay's allocation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub sets: Vec<(NodeSet, Node)>,
}

impl Partition {
    /// All elements across all sets.
    pub fn universe(&self) -> NodeSet {
        self.sets
            .iter()
            .fold(NodeSet::new(), |acc, (s, _)| acc.union(s))
    }

    /// Pairwise disjointness, and every representative a member of its set.
    pub fn invariant_ok(&self) -> bool {
        let disjoint = self
            .sets
            .iter()
            .enumerate()
            .all(|(i, (s, _))| self.sets[i + 1..].iter().all(|(t, _)| s.is_disjoint(t)));
        disjoint && self.sets.iter().all(|(s, rep)| s.contains(*rep))
    }

    /// The stored representative of the set containing `x`.
    pub fn rep_of(&self, x: Node) -> Option<Node> {
        self.sets
            .iter()
            .find(|(s, _)| s.contains(x))
            .map(|&(_, rep)| rep)
    }

    /// Sets ordered by smallest member, for stable comparison.
    pub fn normalized(mut self) -> Partition {
        self.sets.sort_by_key(|(s, _)| s.iter().next());
        self
    }
}

/// What the partition oracle says one operation did: the element a `new`
/// created, the representative a `find` reported, or the representative a
/// `union` left in charge. All in allocation-ordinal space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStep {
    Born(Node),
    Rep(Node),
    Merged(Node),
}

impl OracleStep {
    /// The node the step reported, whatever its flavor.
    pub fn node(self) -> Node {
        match self {
            OracleStep::Born(x) | OracleStep::Rep(x) | OracleStep::Merged(x) => x,
        }
    }
}

/// Run a script over an explicit set-of-sets model: `new` adds a singleton,
/// `union` merges two sets and stores the second set's representative as the
/// merged set's representative, `find` reports the stored representative.
/// No pointers are involved anywhere.
pub fn partition_run(script: &UfScript) -> Result<(Vec<OracleStep>, Partition), ScriptError> {
    let mut handles: Vec<(String, Node)> = Vec::new();
    let mut sets: Vec<(NodeSet, Node)> = Vec::new();
    let mut steps = Vec::new();

    let node_of = |handles: &[(String, Node)], index: usize, h: &str| {
        handles
            .iter()
            .find(|(name, _)| name == h)
            .map(|&(_, x)| x)
            .ok_or(ScriptError::UnknownHandle { index, handle: h.to_string() })
    };

    for (i, op) in script.ops.iter().enumerate() {
        let index = i + 1;
        match op {
            UfOp::New(name) => {
                if handles.iter().any(|(n, _)| n == name) {
                    return Err(ScriptError::HandleRebound { index, handle: name.clone() });
                }
                let x = Node(handles.len() as u64 + 1);
                handles.push((name.clone(), x));
                sets.push((NodeSet::singleton(x), x));
                steps.push(OracleStep::Born(x));
            }
            UfOp::Find(name) => {
                let x = node_of(&handles, index, name)?;
                let (_, rep) = sets
                    .iter()
                    .find(|(s, _)| s.contains(x))
                    .expect("every element is in a set");
                steps.push(OracleStep::Rep(*rep));
            }
            UfOp::Union(name1, name2) => {
                let x1 = node_of(&handles, index, name1)?;
                let x2 = node_of(&handles, index, name2)?;
                let i1 = sets.iter().position(|(s, _)| s.contains(x1)).unwrap();
                let i2 = sets.iter().position(|(s, _)| s.contains(x2)).unwrap();
                if i1 == i2 {
                    return Err(ScriptError::UnionSameSet { index });
                }
                let rep = sets[i2].1;
                let members = sets[i1].0.union(&sets[i2].0);
                sets.remove(i1.max(i2));
                sets.remove(i1.min(i2));
                sets.push((members, rep));
                steps.push(OracleStep::Merged(rep));
            }
        }
    }

    Ok((steps, Partition { sets }.normalized()))
}

/// The final partition a script produces. See [`partition_run`] for the
/// per-operation view.
pub fn partition_oracle(script: &UfScript) -> Result<Partition, ScriptError> {
    partition_run(script).map(|(_, p)| p)
}

/// Parameters for graph generation. Output is a pure function of the config.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub kind: Kind,
    pub node_count: usize,
    /// Probability that a child slot points at an existing node. In forest
    /// mode it instead steers the root count: denser means fewer, larger
    /// trees.
    pub edge_density: f64,
    pub seed: u64,
    /// Force every child into the graph or null, so the output is closed.
    pub closed_only: bool,
    /// Leave every node unmarked (`O`) instead of drawing random marks.
    pub unmarked: bool,
    /// Unary only: build an inverted forest (self-looped roots, every other
    /// node pointing at an earlier node in a shuffled order).
    pub forest: bool,
}

impl GenConfig {
    pub fn new(kind: Kind, node_count: usize, seed: u64) -> GenConfig {
        GenConfig {
            kind,
            node_count,
            edge_density: 0.6,
            seed,
            closed_only: false,
            unmarked: false,
            forest: false,
        }
    }

    pub fn density(mut self, d: f64) -> GenConfig {
        self.edge_density = d;
        self
    }

    pub fn closed(mut self) -> GenConfig {
        self.closed_only = true;
        self
    }

    pub fn unmarked(mut self) -> GenConfig {
        self.unmarked = true;
        self
    }

    pub fn forest(mut self) -> GenConfig {
        self.forest = true;
        self
    }
}

/// A generated graph: marked for binary and general kinds, unit for unary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenGraph {
    Marked(MarkGraph),
    Unary(UnitGraph),
}

impl GenGraph {
    pub fn kind(&self) -> Kind {
        match self {
            GenGraph::Marked(g) => g.kind(),
            GenGraph::Unary(g) => g.kind(),
        }
    }

    pub fn closed(&self) -> bool {
        match self {
            GenGraph::Marked(g) => g.closed(),
            GenGraph::Unary(g) => g.closed(),
        }
    }

    /// The marked graph inside.
    ///
    /// # Panics
    ///
    /// Panics if the generated graph was unary.
    pub fn expect_marked(self) -> MarkGraph {
        match self {
            GenGraph::Marked(g) => g,
            GenGraph::Unary(_) => panic!("generated graph is unary, not marked"),
        }
    }

    /// The unary graph inside.
    ///
    /// # Panics
    ///
    /// Panics if the generated graph was binary or general.
    pub fn expect_unary(self) -> UnitGraph {
        match self {
            GenGraph::Unary(g) => g,
            GenGraph::Marked(g) => panic!("generated graph is {}, not unary", g.kind()),
        }
    }
}

/// Generate a pseudo-random graph.
///
/// Node ids: binary nodes sit at 3, 6, ..., 3n (their heap triples need the
/// spacing); unary nodes at 1..=n; general nodes are packed so that each
/// node's header and list cells end exactly where the next node begins, which
/// keeps the general layout collision free by construction.
///
/// Each child slot points at a uniformly chosen node with probability
/// `edge_density`; otherwise it is null, or (when the graph need not be
/// closed, with an even chance) one of three dangling ids past the used
/// range. General adjacency lengths are uniform on `0..=1 + round(3 *
/// edge_density)`.
pub fn gen_graph(cfg: &GenConfig) -> GenGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.kind {
        Kind::Binary => GenGraph::Marked(gen_binary(cfg, &mut rng)),
        Kind::General => GenGraph::Marked(gen_general(cfg, &mut rng)),
        Kind::Unary if cfg.forest => GenGraph::Unary(gen_forest(cfg, &mut rng)),
        Kind::Unary => GenGraph::Unary(gen_unary(cfg, &mut rng)),
    }
}

fn pick_child(rng: &mut ChaCha8Rng, ids: &[Node], fresh: &[Node], cfg: &GenConfig) -> Node {
    if !ids.is_empty() && rng.gen::<f64>() < cfg.edge_density {
        ids[rng.gen_range(0..ids.len())]
    } else if cfg.closed_only || rng.gen_bool(0.5) {
        NULL
    } else {
        fresh[rng.gen_range(0..fresh.len())]
    }
}

fn pick_mark(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Mark {
    if cfg.unmarked {
        Mark::O
    } else {
        ALL_MARKS[rng.gen_range(0..ALL_MARKS.len())]
    }
}

fn gen_binary(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> MarkGraph {
    let n = cfg.node_count as u64;
    let ids: Vec<Node> = (1..=n).map(|k| Node(3 * k)).collect();
    let fresh: Vec<Node> = (1..=3).map(|k| Node(3 * n + 3 * k)).collect();
    let mut g = PartialGraph::empty(Kind::Binary);
    for &x in &ids {
        let m = pick_mark(rng, cfg);
        let l = pick_child(rng, &ids, &fresh, cfg);
        let r = pick_child(rng, &ids, &fresh, cfg);
        g.insert(x, m, vec![l, r]).expect("generated ids are distinct");
    }
    g
}

fn gen_general(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> MarkGraph {
    let max_len = 1 + (3.0 * cfg.edge_density).round() as usize;
    let lens: Vec<usize> = (0..cfg.node_count).map(|_| rng.gen_range(0..=max_len)).collect();
    let mut ids = Vec::with_capacity(lens.len());
    let mut next = 1u64;
    for &len in &lens {
        ids.push(Node(next));
        next += 2 + 2 * len as u64;
    }
    let fresh: Vec<Node> = (0..3).map(|k| Node(next + k)).collect();
    let mut g = PartialGraph::empty(Kind::General);
    for (i, &x) in ids.iter().enumerate() {
        let m = pick_mark(rng, cfg);
        let adj = (0..lens[i])
            .map(|_| pick_child(rng, &ids, &fresh, cfg))
            .collect();
        g.insert(x, m, adj).expect("generated ids are distinct");
    }
    g
}

fn gen_unary(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> UnitGraph {
    let n = cfg.node_count as u64;
    let ids: Vec<Node> = (1..=n).map(Node).collect();
    let fresh: Vec<Node> = (1..=3).map(|k| Node(n + k)).collect();
    let mut g = PartialGraph::empty(Kind::Unary);
    for &x in &ids {
        let s = pick_child(rng, &ids, &fresh, cfg);
        g.insert(x, (), vec![s]).expect("generated ids are distinct");
    }
    g
}

fn gen_forest(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> UnitGraph {
    let n = cfg.node_count;
    if n == 0 {
        return PartialGraph::empty(Kind::Unary);
    }
    let mut order: Vec<Node> = (1..=n as u64).map(Node).collect();
    order.shuffle(rng);
    let roots = (((n as f64) * (1.0 - cfg.edge_density)).round() as usize).clamp(1, n);
    let mut g = PartialGraph::empty(Kind::Unary);
    for (i, &x) in order.iter().enumerate() {
        let parent = if i < roots {
            x
        } else {
            order[rng.gen_range(0..i)]
        };
        g.insert(x, (), vec![parent]).expect("generated ids are distinct");
    }
    g
}

/// Generate a well-formed script: handles `h1`, `h2`, ... bound in order, a
/// mix of news, finds, and unions, and never a union within one set (tracked
/// with a local partition, so generated scripts always replay cleanly).
pub fn gen_script(op_count: usize, seed: u64) -> UfScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = Vec::with_capacity(op_count);
    // Sets of handle ordinals; handle k is "h{k+1}".
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut n_handles = 0usize;
    let name = |k: usize| format!("h{}", k + 1);

    for _ in 0..op_count {
        let roll: f64 = rng.gen();
        if n_handles == 0 || roll < 0.35 {
            ops.push(UfOp::New(name(n_handles)));
            sets.push(vec![n_handles]);
            n_handles += 1;
        } else if roll < 0.70 || sets.len() < 2 {
            let k = rng.gen_range(0..n_handles);
            ops.push(UfOp::Find(name(k)));
        } else {
            let i1 = rng.gen_range(0..sets.len());
            let mut i2 = rng.gen_range(0..sets.len() - 1);
            if i2 >= i1 {
                i2 += 1;
            }
            let h1 = sets[i1][rng.gen_range(0..sets[i1].len())];
            let h2 = sets[i2][rng.gen_range(0..sets[i2].len())];
            ops.push(UfOp::Union(name(h1), name(h2)));
            let merged = sets[i2].iter().chain(sets[i1].iter()).copied().collect();
            sets.remove(i1.max(i2));
            sets.remove(i1.min(i2));
            sets.push(merged);
        }
    }

    UfScript { ops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{demo_node, demo_tree, forest7, forest7_script, split_pair};
    use crate::union_find::replay_script;

    fn ids(xs: &[u64]) -> NodeSet {
        NodeSet::from_ids(xs.iter().copied())
    }

    #[test]
    fn dfs_mark_visits_exactly_the_reachable_nodes() {
        let g = demo_tree();
        assert_eq!(dfs_mark(&g, demo_node(1)), g.nodes());
        assert_eq!(
            dfs_mark(&g, demo_node(5)),
            ids(&[15, 18, 21, 24])
        );
        assert!(dfs_mark(&g, NULL).is_empty());
        assert!(dfs_mark(&g, Node(999)).is_empty());
    }

    #[test]
    fn dfs_mark_stays_in_the_root_component() {
        let far = crate::examples::binary_graph(&[(100, Mark::O, 0, 0)]);
        let g = demo_tree().join(&far).unwrap().expect("disjoint");
        assert_eq!(dfs_mark(&g, demo_node(1)), demo_tree().nodes());
    }

    #[test]
    fn reach_oracle_agrees_on_the_worked_rows() {
        let (g1, g2) = split_pair();
        let g = g1.join(&g2).unwrap().expect("disjoint");
        let a = Node(1);
        assert_eq!(reach_oracle(&g1, a), ids(&[1]));
        assert!(reach_oracle(&g2, a).is_empty());
        assert_eq!(reach_oracle(&g, a), ids(&[1, 2, 3, 4]));
        for x in [0u64, 1, 2, 3, 4, 9] {
            assert_eq!(reach_oracle(&g, Node(x)), g.reach(Node(x)), "start {x}");
        }
    }

    #[test]
    fn summit_oracles_agree_with_the_recursive_definitions() {
        let g = forest7();
        assert_eq!(summits_oracle(&g), ids(&[1, 4]));
        assert_eq!(summit_oracle(&g, Node(3)), ids(&[1]));
        assert_eq!(summit_oracle(&g, Node(9)), ids(&[9]));
        let e: UnitGraph = PartialGraph::empty(Kind::Unary);
        assert!(summits_oracle(&e).is_empty());

        for seed in 0..30 {
            let g = gen_graph(&GenConfig::new(Kind::Unary, 6, seed)).expect_unary();
            assert_eq!(summits_oracle(&g), crate::union_find::summits(&g), "seed {seed}");
            for x in g.nodes0().iter() {
                assert_eq!(
                    summit_oracle(&g, x),
                    crate::union_find::summit(&g, x),
                    "seed {seed}, node {x}"
                );
            }
        }
    }

    #[test]
    fn partition_oracle_follows_the_stored_representatives() {
        let s = UfScript {
            ops: vec![
                UfOp::New("a".into()),
                UfOp::New("b".into()),
                UfOp::Union("a".into(), "b".into()),
                UfOp::Find("a".into()),
                UfOp::Find("b".into()),
            ],
        };
        let (steps, p) = partition_run(&s).unwrap();
        assert_eq!(steps[2], OracleStep::Merged(Node(2)));
        assert_eq!(steps[3], OracleStep::Rep(Node(2)));
        assert_eq!(steps[4], OracleStep::Rep(Node(2)));
        assert!(p.invariant_ok());
        assert_eq!(p.sets, vec![(ids(&[1, 2]), Node(2))]);
    }

    #[test]
    fn partition_oracle_reproduces_the_forest_scenario() {
        let (steps, p) = partition_run(&forest7_script()).unwrap();
        // a..g are born as 1..7; the pre-merge lookup of c answers a's set,
        // the post-merge lookup of b answers d.
        assert_eq!(steps[12], OracleStep::Rep(Node(1)));
        assert_eq!(*steps.last().unwrap(), OracleStep::Rep(Node(4)));
        assert_eq!(p.sets, vec![(ids(&[1, 2, 3, 4, 5, 6, 7]), Node(4))]);
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in [Kind::Binary, Kind::General, Kind::Unary] {
            let cfg = GenConfig::new(kind, 12, 7);
            assert_eq!(gen_graph(&cfg), gen_graph(&cfg));
            let empty = gen_graph(&GenConfig::new(kind, 0, 7));
            assert_eq!(empty.kind(), kind);
            assert!(empty.closed());
        }
        let forest_cfg = GenConfig::new(Kind::Unary, 9, 3).forest();
        assert_eq!(gen_graph(&forest_cfg), gen_graph(&forest_cfg));
    }

    #[test]
    fn closed_only_output_is_closed() {
        for kind in [Kind::Binary, Kind::General, Kind::Unary] {
            for seed in 0..25 {
                let g = gen_graph(&GenConfig::new(kind, 10, seed).closed());
                assert!(g.closed(), "kind {kind}, seed {seed}");
            }
        }
    }

    #[test]
    fn binary_ids_are_spaced_for_layout() {
        let g = gen_graph(&GenConfig::new(Kind::Binary, 8, 11)).expect_marked();
        assert_eq!(g.node_count(), 8);
        assert!(g.nodes().iter().all(|x| x.0 % 3 == 0));
        assert!(crate::heap_model::layout_binary(&g).is_ok());
    }

    #[test]
    fn general_ids_leave_room_for_their_lists() {
        for seed in 0..25 {
            let g = gen_graph(&GenConfig::new(Kind::General, 10, seed)).expect_marked();
            assert!(crate::heap_model::layout_general(&g).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn forests_are_inverted_forests() {
        for seed in 0..25 {
            for density in [0.1, 0.5, 0.9] {
                let g = gen_graph(&GenConfig::new(Kind::Unary, 9, seed).density(density).forest())
                    .expect_unary();
                assert!(crate::union_find::inverted_forest(&g), "seed {seed}");
                assert!(g.sinks().is_subset(&g.nodes()), "seed {seed}");
            }
        }
    }

    #[test]
    fn generated_scripts_replay_cleanly() {
        for seed in 0..10 {
            let s = gen_script(40, seed);
            assert_eq!(s, gen_script(40, seed));
            let replay = replay_script(&s).expect("generated scripts are well formed");
            assert_eq!(replay.steps.len(), 40);
            partition_run(&s).expect("oracle accepts generated scripts");
        }
    }
}
