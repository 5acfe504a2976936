//! Stackless graph marking by pointer reversal, instrumented to the hilt.
//!
//! The marker walks a binary graph laid out in the simulated heap, encoding
//! its backtracking path by temporarily reversing edges: pushing into a node
//! stores the predecessor in the left slot and marks it `L`, swinging to the
//! right subtree rotates the slots and remarks `R`, popping restores both
//! children and finalizes the mark as `X`. The register machine ([`MachineState`],
//! [`op_push`], [`op_swing`], [`op_pop`], [`compute_tm`]) touches the heap
//! only through tagged reads and writes, so any pointer abuse surfaces as a
//! [`Fault`].
//!
//! The instrumentation half reconstructs the implicit traversal stack from
//! the reversed edges ([`reconstruct_stack`]) and audits a six-part loop
//! invariant over the abstracted graph ([`check_inv`]): the stack chain is
//! sound, the graph stays closed, the partially marked nodes are exactly the
//! stack, the reversed edges point where the stack says they must
//! ([`inset`]), undoing the reversal recovers the original graph
//! ([`restore`]), and every unmarked node is still reachable. A debug mode
//! additionally checks each operation's exact pre/post shape at its
//! boundaries.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::heap_model::{
    abstract_binary, layout_binary, AbstractionError, CellValue, Fault, Heap, LayoutError,
};
use crate::partial_graph::{Kind, Mark, MarkGraph, Node, NodeSet, UnitGraph, NULL};

/// The traversal stack, bottom to top, as reconstructed from reversed edges.
pub type Stack = Vec<Node>;

/// Nodes carrying any non-`O` mark, plus null. The tip test `tm` computed by
/// the machine must always agree with membership here.
pub fn marked0(g: &MarkGraph) -> NodeSet {
    g.filter_marks(&[Mark::L, Mark::R, Mark::X]).nodes0()
}

/// Rewrite a binary adjacency according to its node's mark: `L` applies `f`
/// to the node and replaces the left child, `R` the right child, and any
/// other mark leaves the pair alone.
///
/// # Panics
///
/// Panics if `adj` is not a pair.
pub fn if_mark(f: impl Fn(Node) -> Node, x: Node, mark: Mark, adj: &[Node]) -> Vec<Node> {
    assert_eq!(adj.len(), 2, "if_mark rewrites binary adjacencies");
    match mark {
        Mark::L => vec![f(x), adj[1]],
        Mark::R => vec![adj[0], f(x)],
        Mark::O | Mark::X => adj.to_vec(),
    }
}

/// The element before the first occurrence of `x` in `alpha`, with null
/// fencing the bottom: null if `x` is first or absent.
pub fn prev_in(alpha: &[Node], x: Node) -> Node {
    match alpha.iter().position(|&y| y == x) {
        Some(0) | None => NULL,
        Some(i) => alpha[i - 1],
    }
}

/// The element after the first occurrence of `x` in `alpha`, with `t`
/// fencing the top: `t` if `x` is last or absent.
pub fn next_in(alpha: &[Node], t: Node, x: Node) -> Node {
    match alpha.iter().position(|&y| y == x) {
        Some(i) if i + 1 < alpha.len() => alpha[i + 1],
        Some(_) => t,
        None => t,
    }
}

/// Redirect each partially marked node's reversed slot at its stack
/// predecessor and erase the marks. Equal to plain erasure exactly when the
/// reversed edges encode `alpha` as the traversal stack, which makes this
/// the executable test for that claim.
pub fn inset(alpha: &[Node], g: &MarkGraph) -> UnitGraph {
    g.map_graph(|x, &m, adj| ((), if_mark(|y| prev_in(alpha, y), x, m, adj)))
        .expect("if_mark preserves adjacency length")
}

/// Undo the path reversal: point each partially marked node's reversed slot
/// at its stack successor (the tip `t` for the top) and erase the marks.
/// Recovers the original graph shape when `alpha`, `t` describe the
/// traversal honestly.
pub fn restore(t: Node, alpha: &[Node], g: &MarkGraph) -> UnitGraph {
    g.map_graph(|x, &m, adj| ((), if_mark(|y| next_in(alpha, t, y), x, m, adj)))
        .expect("if_mark preserves adjacency length")
}

/// Why a stack chase from `p` failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StackFailure {
    #[error("stack chase revisited node {0}")]
    Cycle(Node),
    #[error("stack chase reached node {node} marked {mark}")]
    BadMark { node: Node, mark: Mark },
    #[error("stack chase left the graph at node {0}")]
    OffGraph(Node),
}

/// Recover the traversal stack by chasing reversed edges from `p`: follow
/// the left child of an `L` node, the right child of an `R` node, prepending
/// each visited node, until null. Fails on a revisit or on any node that is
/// unmarked, fully marked, or missing — each a useful diagnostic in itself.
pub fn reconstruct_stack(g: &MarkGraph, p: Node) -> Result<Stack, StackFailure> {
    let mut alpha = Vec::new();
    let mut seen = NodeSet::new();
    let mut x = p;
    while !x.is_null() {
        if seen.contains(x) {
            return Err(StackFailure::Cycle(x));
        }
        let (&mark, adj) = g.get(x).ok_or(StackFailure::OffGraph(x))?;
        let slot = match mark {
            Mark::L => 0,
            Mark::R => 1,
            Mark::O | Mark::X => return Err(StackFailure::BadMark { node: x, mark }),
        };
        seen.insert(x);
        alpha.push(x);
        x = adj[slot];
    }
    alpha.reverse();
    Ok(alpha)
}

/// One audited clause of the loop invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjunct {
    pub pass: bool,
    /// On failure, what went wrong and where.
    pub witness: Option<String>,
}

impl Conjunct {
    fn ok() -> Conjunct {
        Conjunct { pass: true, witness: None }
    }

    fn fail(witness: String) -> Conjunct {
        Conjunct { pass: false, witness: Some(witness) }
    }

    fn check(pass: bool, witness: impl FnOnce() -> String) -> Conjunct {
        if pass {
            Conjunct::ok()
        } else {
            Conjunct::fail(witness())
        }
    }

    fn skipped() -> Conjunct {
        Conjunct::fail("not evaluated: stack reconstruction failed".into())
    }
}

/// The six loop-invariant clauses, each with a pass/fail verdict and a
/// failure witness, plus the reconstructed stack when the chase succeeded.
///
/// - `a`: the stack chain is duplicate- and null-free, `p` is its top, and
///   the tip `t` is a node or null.
/// - `b`: the graph is closed.
/// - `c`: the partially marked nodes are exactly the stack.
/// - `d`: redirecting reversed slots at stack predecessors reproduces the
///   current shape (the reversal encodes this very stack).
/// - `e`: redirecting them at stack successors reproduces the original
///   graph's shape (the reversal is undoable).
/// - `f`: every unmarked node is reachable through unmarked nodes from the
///   tip or from a stack node's right child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub stack: Option<Stack>,
    pub a: Conjunct,
    pub b: Conjunct,
    pub c: Conjunct,
    pub d: Conjunct,
    pub e: Conjunct,
    pub f: Conjunct,
}

impl InvariantReport {
    /// Label/clause pairs in audit order.
    pub fn conjuncts(&self) -> [(char, &Conjunct); 6] {
        [
            ('a', &self.a),
            ('b', &self.b),
            ('c', &self.c),
            ('d', &self.d),
            ('e', &self.e),
            ('f', &self.f),
        ]
    }

    /// Whether every clause passed.
    pub fn pass(&self) -> bool {
        self.conjuncts().iter().all(|(_, c)| c.pass)
    }

    /// All failing clauses with their witnesses, as one line.
    pub fn failure_summary(&self) -> String {
        self.conjuncts()
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(label, c)| match &c.witness {
                Some(w) => format!("({label}): {w}"),
                None => format!("({label})"),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pass() {
            write!(f, "ok")
        } else {
            let labels: Vec<String> = self
                .conjuncts()
                .iter()
                .filter(|(_, c)| !c.pass)
                .map(|(label, _)| label.to_string())
                .collect();
            write!(f, "FAIL({})", labels.join(","))
        }
    }
}

/// Audit the loop invariant at a machine state abstracted to `g`, with `g0`
/// the original input graph. The stack is recovered from the reversed edges
/// first; if that chase fails, the failure is attributed to clause `a` (a
/// cycle) or `c` (a wrong mark or missing node), closure is still audited,
/// and the stack-dependent clauses are reported unevaluated.
pub fn check_inv(g0: &MarkGraph, g: &MarkGraph, t: Node, p: Node) -> InvariantReport {
    match reconstruct_stack(g, p) {
        Ok(alpha) => check_inv_with_stack(g0, g, t, p, &alpha),
        Err(failure) => {
            let attributed = Conjunct::fail(failure.to_string());
            let (a, c) = match failure {
                StackFailure::Cycle(_) => (attributed, Conjunct::skipped()),
                StackFailure::BadMark { .. } | StackFailure::OffGraph(_) => {
                    (Conjunct::skipped(), attributed)
                }
            };
            InvariantReport {
                stack: None,
                a,
                b: closed_conjunct(g),
                c,
                d: Conjunct::skipped(),
                e: Conjunct::skipped(),
                f: Conjunct::skipped(),
            }
        }
    }
}

fn closed_conjunct(g: &MarkGraph) -> Conjunct {
    let dangling = g.sinks().difference(&g.nodes0());
    Conjunct::check(dangling.is_empty(), || {
        format!("edge dangles at {}", dangling.iter().next().unwrap())
    })
}

/// Audit the loop invariant against a caller-supplied stack instead of a
/// reconstructed one — useful for probing states whose reversed edges no
/// longer chase cleanly.
pub fn check_inv_with_stack(
    g0: &MarkGraph,
    g: &MarkGraph,
    t: Node,
    p: Node,
    alpha: &[Node],
) -> InvariantReport {
    let a = stack_shape_conjunct(g, t, p, alpha);
    let b = closed_conjunct(g);

    let partial = g.filter_marks(&[Mark::L, Mark::R]).nodes();
    let stack_set: NodeSet = alpha.iter().copied().collect();
    let c = Conjunct::check(partial == stack_set, || {
        let extra = partial.difference(&stack_set).iter().next();
        match extra {
            Some(x) => format!("node {x} is partially marked but not on the stack"),
            None => {
                let x = stack_set.difference(&partial).iter().next().unwrap();
                format!("stack node {x} is not partially marked")
            }
        }
    });

    let d = graphs_agree_conjunct(&inset(alpha, g), &g.erase(), "reversed slot");
    let e = graphs_agree_conjunct(&restore(t, alpha, g), &g0.erase(), "restored slot");
    let f = unmarked_reachability_conjunct(g, t, alpha);

    InvariantReport { stack: Some(alpha.to_vec()), a, b, c, d, e, f }
}

fn stack_shape_conjunct(g: &MarkGraph, t: Node, p: Node, alpha: &[Node]) -> Conjunct {
    let mut seen = NodeSet::new();
    for &x in alpha {
        if x.is_null() {
            return Conjunct::fail("null on the stack".into());
        }
        if !seen.insert(x) {
            return Conjunct::fail(format!("duplicate stack node {x}"));
        }
    }
    let top = alpha.last().copied().unwrap_or(NULL);
    if top != p {
        return Conjunct::fail(format!("stack top is {top} but p = {p}"));
    }
    Conjunct::check(g.nodes0().contains(t), || format!("tip {t} is outside the graph"))
}

fn graphs_agree_conjunct(got: &UnitGraph, want: &UnitGraph, what: &str) -> Conjunct {
    Conjunct::check(got == want, || match got.first_difference(want) {
        Some(x) => format!("{what} disagrees at node {x}"),
        None => format!("{what} disagrees"),
    })
}

fn unmarked_reachability_conjunct(g: &MarkGraph, t: Node, alpha: &[Node]) -> Conjunct {
    let unmarked = g.filter_marks(&[Mark::O]);
    let mut seeds = vec![t];
    for &y in alpha {
        if let Some((_, adj)) = g.get(y) {
            seeds.extend(adj.get(1).copied());
        }
    }
    let covered = reachable_from(&unmarked, seeds);
    let missed = unmarked.nodes().difference(&covered);
    Conjunct::check(missed.is_empty(), || {
        format!(
            "unmarked node {} is unreachable from the tip and the stack's right children",
            missed.iter().next().unwrap()
        )
    })
}

/// Worklist reachability, used by the invariant audit and the final
/// postcondition check where a linear pass is required even on dense graphs.
fn reachable_from(g: &MarkGraph, seeds: impl IntoIterator<Item = Node>) -> NodeSet {
    let mut seen = NodeSet::new();
    let mut queue: VecDeque<Node> = VecDeque::new();
    for x in seeds {
        if g.contains(x) && seen.insert(x) {
            queue.push_back(x);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &y in g.adj(v).expect("v came off the worklist") {
            if g.contains(y) && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// The marker's registers plus the heap it mutates. `t` is the tip being
/// explored, `p` the top of the reversed-edge stack, `tm` the cached "tip is
/// marked or null" test, and `pm`/`tmp`/`tmp1`/`tmp2` the scratch registers
/// the three operations spill through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineState {
    pub heap: Heap,
    pub t: Node,
    pub p: Node,
    pub tm: bool,
    pub pm: Mark,
    pub tmp: Node,
    pub tmp1: Node,
    pub tmp2: Node,
}

impl MachineState {
    /// A machine over `heap` about to start marking from `root`. `tm` is
    /// uninitialized until the first [`compute_tm`].
    pub fn new(heap: Heap, root: Node) -> MachineState {
        MachineState {
            heap,
            t: root,
            p: NULL,
            tm: false,
            pm: Mark::O,
            tmp: NULL,
            tmp1: NULL,
            tmp2: NULL,
        }
    }
}

fn left(x: Node) -> Node {
    x.offset(1)
}

fn right(x: Node) -> Node {
    x.offset(2)
}

/// Recompute the cached tip test: `tm` becomes true iff `t` is null or
/// carries a non-`O` mark. Run once before the loop and after every
/// operation, never implicitly.
pub fn compute_tm(st: &mut MachineState) -> Result<(), Fault> {
    st.tm = st.t.is_null() || st.heap.read_mark(st.t)? != Mark::O;
    Ok(())
}

/// Descend into the tip: stash its left child, reverse the left slot onto
/// the old stack top, mark `L`, and shift `p`/`t` down.
pub fn op_push(st: &mut MachineState) -> Result<(), Fault> {
    if st.t.is_null() {
        return Err(Fault::NullDeref);
    }
    st.tmp = st.heap.read_addr(left(st.t))?;
    st.heap.write(left(st.t), CellValue::Addr(st.p))?;
    st.heap.write(st.t, CellValue::Mark(Mark::L))?;
    st.p = st.t;
    st.t = st.tmp;
    Ok(())
}

/// Rotate the stack top from its finished left subtree to its right: the
/// predecessor moves from the left slot to the right, the finished subtree
/// root takes the left slot, the mark advances to `R`, and the tip becomes
/// the old right child.
pub fn op_swing(st: &mut MachineState) -> Result<(), Fault> {
    if st.p.is_null() {
        return Err(Fault::NullDeref);
    }
    st.tmp1 = st.heap.read_addr(right(st.p))?;
    st.tmp2 = st.heap.read_addr(left(st.p))?;
    st.heap.write(right(st.p), CellValue::Addr(st.tmp2))?;
    st.heap.write(left(st.p), CellValue::Addr(st.t))?;
    st.heap.write(st.p, CellValue::Mark(Mark::R))?;
    st.t = st.tmp1;
    Ok(())
}

/// Retreat from a finished node: restore its right child from the tip,
/// finalize the mark as `X`, and shift `t`/`p` back up the stack.
pub fn op_pop(st: &mut MachineState) -> Result<(), Fault> {
    if st.p.is_null() {
        return Err(Fault::NullDeref);
    }
    st.tmp = st.heap.read_addr(right(st.p))?;
    st.heap.write(right(st.p), CellValue::Addr(st.t))?;
    st.heap.write(st.p, CellValue::Mark(Mark::X))?;
    st.t = st.p;
    st.p = st.tmp;
    Ok(())
}

/// Which pointer rotation an iteration performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwOp {
    Push,
    Swing,
    Pop,
}

impl fmt::Display for SwOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwOp::Push => "PUSH",
            SwOp::Swing => "SWING",
            SwOp::Pop => "POP",
        })
    }
}

/// One executed operation with its register movement and, when loop-head
/// checking is on, the invariant audit of the state it produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub iter: usize,
    pub op: SwOp,
    pub pre_t: Node,
    pub pre_p: Node,
    pub post_t: Node,
    pub post_p: Node,
    pub report: Option<InvariantReport>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={} op={} t={} p={}",
            self.iter, self.op, self.post_t, self.post_p
        )?;
        if let Some(report) = &self.report {
            write!(f, " inv={report}")?;
        }
        Ok(())
    }
}

/// Instrumentation switches for [`sw_run`]. Everything defaults to off: a
/// bare run executes the machine and verifies only its preconditions and
/// final postconditions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SwOptions {
    /// Audit the full loop invariant at every loop head (implies tracing, so
    /// each audit has an event to attach to).
    pub check_each_iteration: bool,
    /// Record a [`TraceEvent`] per operation.
    pub trace: bool,
    /// Check each operation's exact pre/post contract at its boundaries:
    /// pivot entry shapes, register movement, untouched remainder, and the
    /// one-step stack change.
    pub debug_ops: bool,
    /// Additionally require every node to be reachable from the root. The
    /// machine itself never needs this; marking simply leaves other
    /// components untouched.
    pub require_connected: bool,
}

/// Why a run was rejected or aborted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SwError {
    #[error("graph kind is {0}, marking needs binary")]
    NotBinary(Kind),
    #[error("graph is not closed: an edge dangles at {0}")]
    NotClosed(Node),
    #[error("root {0} is not in the graph")]
    RootNotInGraph(Node),
    #[error("graph is not unmarked: node {node} carries {mark}")]
    NotUnmarked { node: Node, mark: Mark },
    #[error("node {0} is not reachable from the root")]
    NotConnected(Node),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("heap fault at iteration {iter}: {fault}")]
    Fault { iter: usize, fault: Fault },
    #[error("heap no longer abstracts to a graph at iteration {iter}: {source}")]
    Abstraction {
        iter: usize,
        source: AbstractionError,
    },
    #[error("loop-head invariant failed at iteration {iter}: {}", report.failure_summary())]
    Invariant {
        iter: usize,
        report: Box<InvariantReport>,
    },
    #[error("tm register drifted at iteration {iter}: register {register}, marked-set test {expected}")]
    TmDrift {
        iter: usize,
        register: bool,
        expected: bool,
    },
    #[error("{op} contract violated at iteration {iter}: {detail}")]
    Implication {
        iter: usize,
        op: SwOp,
        detail: String,
    },
    #[error("iteration cap {cap} exceeded, aborting a likely nonterminating run")]
    CapExceeded { cap: usize },
    #[error("run took {iterations} operations, over the {bound} the algorithm permits")]
    IterationBound { iterations: usize, bound: usize },
    #[error("postcondition violated: {0}")]
    Postcondition(String),
}

/// A rejected or aborted run: the error, how many operations had completed,
/// and whatever trace had accumulated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{error} (after {iterations} operations)")]
pub struct SwFailure {
    pub error: SwError,
    pub iterations: usize,
    pub trace: Vec<TraceEvent>,
}

/// A completed, verified run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwRun {
    /// The final heap abstracted back to a graph.
    pub graph: MarkGraph,
    /// The final heap itself.
    pub heap: Heap,
    /// The fully marked nodes — equal to the set reachable from the root.
    pub marked: NodeSet,
    /// Operations executed.
    pub iterations: usize,
    /// The audit of the initial state, when loop-head checking was on.
    pub initial_report: Option<InvariantReport>,
    /// Per-operation events, when tracing or checking was on.
    pub trace: Vec<TraceEvent>,
}

/// Mark everything reachable from `r` in `g0`, in place, using reversed
/// edges instead of a stack.
///
/// The input must be a closed, fully unmarked binary graph containing `r`.
/// The run executes against a heap laid out from `g0` and is audited per
/// `opts`; afterwards the final heap is abstracted and verified: the shape
/// is unchanged, no partial marks remain, the `X` nodes are exactly those
/// reachable from `r`, and the operation count is within `3n + 1`. Any
/// violation, fault, or failed audit aborts with a diagnostic and the trace
/// so far.
pub fn sw_run(g0: &MarkGraph, r: Node, opts: &SwOptions) -> Result<SwRun, SwFailure> {
    let mut trace = Vec::new();
    let mut initial_report = None;

    match drive(g0, r, opts, &mut trace, &mut initial_report) {
        Err((error, iterations)) => Err(SwFailure { error, iterations, trace }),
        Ok((st, iterations)) => {
            match verify_outcome(g0, r, &st, iterations) {
                Err(error) => Err(SwFailure { error, iterations, trace }),
                Ok((graph, marked)) => Ok(SwRun {
                    graph,
                    heap: st.heap,
                    marked,
                    iterations,
                    initial_report,
                    trace,
                }),
            }
        }
    }
}

fn validate(g0: &MarkGraph, r: Node, opts: &SwOptions) -> Result<(), SwError> {
    if g0.kind() != Kind::Binary {
        return Err(SwError::NotBinary(g0.kind()));
    }
    let dangling = g0.sinks().difference(&g0.nodes0());
    if let Some(x) = dangling.iter().next() {
        return Err(SwError::NotClosed(x));
    }
    if !g0.contains(r) {
        return Err(SwError::RootNotInGraph(r));
    }
    if let Some((node, &mark, _)) = g0.iter().find(|(_, &m, _)| m != Mark::O) {
        return Err(SwError::NotUnmarked { node, mark });
    }
    if opts.require_connected {
        let reached = reachable_from(g0, [r]);
        if let Some(x) = g0.nodes().difference(&reached).iter().next() {
            return Err(SwError::NotConnected(x));
        }
    }
    Ok(())
}

type Captured = (MarkGraph, Stack);

fn capture(
    g0: &MarkGraph,
    st: &MachineState,
    iter: usize,
    op: SwOp,
    phase: &str,
) -> Result<Captured, SwError> {
    let g = abstract_binary(&st.heap, &g0.nodes())
        .map_err(|source| SwError::Abstraction { iter, source })?;
    let alpha = reconstruct_stack(&g, st.p).map_err(|e| SwError::Implication {
        iter,
        op,
        detail: format!("stack not reconstructible {phase} the operation: {e}"),
    })?;
    Ok((g, alpha))
}

fn drive(
    g0: &MarkGraph,
    r: Node,
    opts: &SwOptions,
    trace: &mut Vec<TraceEvent>,
    initial_report: &mut Option<InvariantReport>,
) -> Result<(MachineState, usize), (SwError, usize)> {
    validate(g0, r, opts).map_err(|e| (e, 0))?;
    let heap = layout_binary(g0).map_err(|e| (SwError::from(e), 0))?;
    let mut st = MachineState::new(heap, r);
    compute_tm(&mut st).map_err(|fault| (SwError::Fault { iter: 0, fault }, 0))?;

    let cap = 3 * g0.node_count() + 8;
    let record = opts.trace || opts.check_each_iteration;
    let mut iter = 0usize;

    loop {
        if opts.check_each_iteration {
            let report = loop_head_check(g0, &st, iter).map_err(|e| (e, iter))?;
            if iter == 0 {
                *initial_report = Some(report);
            } else if let Some(event) = trace.last_mut() {
                event.report = Some(report);
            }
        }
        if st.p.is_null() && st.tm {
            break;
        }
        if iter >= cap {
            return Err((SwError::CapExceeded { cap }, iter));
        }

        let (pre_t, pre_p) = (st.t, st.p);
        let op = if st.tm {
            st.pm = st
                .heap
                .read_mark(st.p)
                .map_err(|fault| (SwError::Fault { iter, fault }, iter))?;
            if st.pm == Mark::R {
                SwOp::Pop
            } else {
                SwOp::Swing
            }
        } else {
            SwOp::Push
        };

        let before = if opts.debug_ops {
            Some(capture(g0, &st, iter, op, "before").map_err(|e| (e, iter))?)
        } else {
            None
        };

        match op {
            SwOp::Push => op_push(&mut st),
            SwOp::Swing => op_swing(&mut st),
            SwOp::Pop => op_pop(&mut st),
        }
        .map_err(|fault| (SwError::Fault { iter, fault }, iter))?;

        if let Some((g_pre, alpha_pre)) = before {
            let (g_post, alpha_post) = capture(g0, &st, iter, op, "after").map_err(|e| (e, iter))?;
            check_implication(op, &g_pre, &alpha_pre, pre_t, pre_p, &g_post, &alpha_post, st.t, st.p)
                .map_err(|detail| (SwError::Implication { iter, op, detail }, iter))?;
        }

        compute_tm(&mut st).map_err(|fault| (SwError::Fault { iter, fault }, iter))?;

        if record {
            trace.push(TraceEvent {
                iter,
                op,
                pre_t,
                pre_p,
                post_t: st.t,
                post_p: st.p,
                report: None,
            });
        }
        iter += 1;
    }

    Ok((st, iter))
}

fn loop_head_check(g0: &MarkGraph, st: &MachineState, iter: usize) -> Result<InvariantReport, SwError> {
    let g = abstract_binary(&st.heap, &g0.nodes())
        .map_err(|source| SwError::Abstraction { iter, source })?;
    let expected = marked0(&g).contains(st.t);
    if st.tm != expected {
        return Err(SwError::TmDrift { iter, register: st.tm, expected });
    }
    let report = check_inv(g0, &g, st.t, st.p);
    if report.pass() {
        Ok(report)
    } else {
        Err(SwError::Invariant { iter, report: Box::new(report) })
    }
}

fn verify_outcome(
    g0: &MarkGraph,
    r: Node,
    st: &MachineState,
    iterations: usize,
) -> Result<(MarkGraph, NodeSet), SwError> {
    let bound = 3 * g0.node_count() + 1;
    if iterations > bound {
        return Err(SwError::IterationBound { iterations, bound });
    }
    let g = abstract_binary(&st.heap, &g0.nodes())
        .map_err(|source| SwError::Abstraction { iter: iterations, source })?;
    if g.erase() != g0.erase() {
        let detail = match g.erase().first_difference(&g0.erase()) {
            Some(x) => format!("final graph changed shape at node {x}"),
            None => "final graph changed shape".into(),
        };
        return Err(SwError::Postcondition(detail));
    }
    let partial = g.filter_marks(&[Mark::L, Mark::R]);
    if let Some((x, _, _)) = partial.iter().next() {
        return Err(SwError::Postcondition(format!(
            "node {x} is still partially marked"
        )));
    }
    let marked = g.filter_marks(&[Mark::X]).nodes();
    let expected = reachable_from(g0, [r]);
    if marked != expected {
        let wrong = marked
            .difference(&expected)
            .iter()
            .next()
            .or_else(|| expected.difference(&marked).iter().next())
            .unwrap();
        return Err(SwError::Postcondition(format!(
            "marked set disagrees with reachability at node {wrong}"
        )));
    }
    Ok((g, marked))
}

fn fmt_entry(mark: Mark, adj: &[Node]) -> String {
    let children: Vec<String> = adj.iter().map(|x| x.to_string()).collect();
    format!("({}, [{}])", mark, children.join(", "))
}

/// One operation's exact contract: pivot entry shape before and after,
/// register movement, everything else untouched, and the stack changing by
/// exactly its one step.
#[allow(clippy::too_many_arguments)]
fn check_implication(
    op: SwOp,
    g_pre: &MarkGraph,
    alpha_pre: &[Node],
    pre_t: Node,
    pre_p: Node,
    g_post: &MarkGraph,
    alpha_post: &[Node],
    post_t: Node,
    post_p: Node,
) -> Result<(), String> {
    let entry = |g: &MarkGraph, x: Node, when: &str| -> Result<(Mark, Vec<Node>), String> {
        g.get(x)
            .map(|(&m, adj)| (m, adj.to_vec()))
            .ok_or_else(|| format!("pivot {x} is not in the graph {when} the operation"))
    };
    let expect_entry = |g: &MarkGraph, x: Node, mark: Mark, adj: [Node; 2]| -> Result<(), String> {
        let (m, a) = entry(g, x, "after")?;
        if m != mark || a != adj {
            return Err(format!(
                "pivot {x} should be {} afterwards, found {}",
                fmt_entry(mark, &adj),
                fmt_entry(m, &a)
            ));
        }
        Ok(())
    };
    let expect_reg = |name: &str, got: Node, want: Node| -> Result<(), String> {
        if got != want {
            return Err(format!("register {name} should be {want}, found {got}"));
        }
        Ok(())
    };
    let expect_frame = |pivot: Node| -> Result<(), String> {
        if g_pre.remove(pivot) != g_post.remove(pivot) {
            return Err(format!("the operation touched more than its pivot {pivot}"));
        }
        Ok(())
    };
    let tip_marked_or_null = || -> Result<(), String> {
        if pre_t.is_null() {
            return Ok(());
        }
        match g_pre.value(pre_t) {
            Some(&Mark::O) => Err(format!("tip {pre_t} was unmarked going in")),
            Some(_) => Ok(()),
            None => Err(format!("tip {pre_t} was outside the graph going in")),
        }
    };

    match op {
        SwOp::Push => {
            let x = pre_t;
            if x.is_null() {
                return Err("pushed with a null tip".into());
            }
            let (m, adj) = entry(g_pre, x, "before")?;
            if m != Mark::O {
                return Err(format!("pivot {x} was marked {m} going in, expected O"));
            }
            let (l0, r0) = (adj[0], adj[1]);
            expect_entry(g_post, x, Mark::L, [pre_p, r0])?;
            expect_reg("t", post_t, l0)?;
            expect_reg("p", post_p, x)?;
            expect_frame(x)?;
            let mut want = alpha_pre.to_vec();
            want.push(x);
            if alpha_post != want {
                return Err(format!("stack did not grow by the pivot {x}"));
            }
        }
        SwOp::Swing => {
            let x = pre_p;
            if x.is_null() {
                return Err("swung with a null stack top".into());
            }
            tip_marked_or_null()?;
            let (m, adj) = entry(g_pre, x, "before")?;
            if m != Mark::L {
                return Err(format!("pivot {x} was marked {m} going in, expected L"));
            }
            let (l0, r0) = (adj[0], adj[1]);
            expect_entry(g_post, x, Mark::R, [pre_t, l0])?;
            expect_reg("t", post_t, r0)?;
            expect_reg("p", post_p, x)?;
            expect_frame(x)?;
            if alpha_pre.last() != Some(&x) {
                return Err(format!("pivot {x} was not the stack top going in"));
            }
            if alpha_post != alpha_pre {
                return Err("stack changed across a swing".into());
            }
        }
        SwOp::Pop => {
            let x = pre_p;
            if x.is_null() {
                return Err("popped with a null stack top".into());
            }
            tip_marked_or_null()?;
            let (m, adj) = entry(g_pre, x, "before")?;
            if m != Mark::R {
                return Err(format!("pivot {x} was marked {m} going in, expected R"));
            }
            let (l0, r0) = (adj[0], adj[1]);
            expect_entry(g_post, x, Mark::X, [l0, pre_t])?;
            expect_reg("t", post_t, x)?;
            expect_reg("p", post_p, r0)?;
            expect_frame(x)?;
            if alpha_pre.last() != Some(&x) {
                return Err(format!("pivot {x} was not the stack top going in"));
            }
            if *alpha_post != alpha_pre[..alpha_pre.len() - 1] {
                return Err(format!("stack did not shrink by the pivot {x}"));
            }
        }
    }
    Ok(())
}
