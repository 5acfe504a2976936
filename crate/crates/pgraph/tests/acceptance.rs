//! The acceptance gate: every numbered criterion prints one pass/fail line
//! (run with `--nocapture` to see them on success) and the test fails if any
//! criterion fails its checks or blows its time budget.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pgraph::examples::{demo_node, demo_tree, demo_tree_midrun, forest7_script, split_pair};
use pgraph::laws::{exhaustive_tiny, registry, run_all, run_law};
use pgraph::oracles::{
    dfs_mark, gen_graph, gen_script, partition_run, reach_oracle, summit_oracle,
    summits_oracle, GenConfig,
};
use pgraph::schorr_waite::{inset, restore, sw_run, SwOptions};
use pgraph::union_find::{preacyclic, replay_script, summit, summits};
use pgraph::{Kind, Mark, MarkGraph, Node, NodeSet, PartialGraph, UnitGraph, NULL};

fn eq<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

fn check(what: &str, ok: bool) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.to_string())
    }
}

fn criterion(
    failures: &mut Vec<String>,
    index: usize,
    name: &str,
    budget: Duration,
    body: impl FnOnce() -> Result<String, String>,
) {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    match result {
        Ok(detail) if elapsed <= budget => {
            println!("criterion {index} ({name}): PASS in {elapsed:.2?} — {detail}");
        }
        Ok(detail) => {
            println!(
                "criterion {index} ({name}): FAIL — over budget ({elapsed:.2?} > {budget:?}) — {detail}"
            );
            failures.push(format!(
                "criterion {index}: over budget ({elapsed:.2?} > {budget:?})"
            ));
        }
        Err(why) => {
            println!("criterion {index} ({name}): FAIL in {elapsed:.2?} — {why}");
            failures.push(format!("criterion {index}: {why}"));
        }
    }
}

fn ids(xs: &[u64]) -> NodeSet {
    NodeSet::from_ids(xs.iter().copied())
}

// Criterion 1: the four-node worked example, every table row exact.
fn worked_example_table() -> Result<String, String> {
    use Mark::{O, X};
    let (g1, g2) = split_pair();
    let g = g1.join(&g2).map_err(|e| e.to_string())?.defined().ok_or("split pair overlaps")?;
    let gg = |rows: &[(u64, Mark, &[u64])]| -> MarkGraph {
        PartialGraph::from_entries(
            Kind::General,
            rows.iter().map(|&(x, m, adj)| {
                (Node(x), m, adj.iter().map(|&y| Node(y)).collect::<Vec<_>>())
            }),
        )
        .expect("table rows are valid graphs")
    };
    let mut rows = 0;
    let mut row = |r: Result<(), String>| -> Result<(), String> {
        rows += 1;
        r
    };

    row(eq("nodes g1", g1.nodes(), ids(&[1])))?;
    row(eq("nodes g2", g2.nodes(), ids(&[2, 3, 4])))?;
    row(eq("nodes g", g.nodes(), ids(&[1, 2, 3, 4])))?;

    let b = ids(&[2]);
    row(check("g1/{b} empty", g1.filter_nodes(&b).is_empty()))?;
    row(eq("g2/{b}", g2.filter_nodes(&b), gg(&[(2, O, &[])])))?;
    row(eq("g/{b}", g.filter_nodes(&b), gg(&[(2, O, &[])])))?;

    row(eq("g1/X", g1.filter_marks(&[X]), g1.clone()))?;
    row(check("g2/X empty", g2.filter_marks(&[X]).is_empty()))?;
    row(eq("g/X", g.filter_marks(&[X]), g1.clone()))?;

    let erased = g.erase();
    row(eq(
        "erasure shape at 1",
        erased.adj(Node(1)),
        Some([Node(1), Node(2), Node(3)].as_slice()),
    ))?;
    row(eq(
        "erasure distributes",
        g1.erase().join(&g2.erase()).map_err(|e| e.to_string())?.defined(),
        Some(erased),
    ))?;

    let f = |_: Node, m: &Mark, adj: &[Node]| -> (Mark, Vec<Node>) {
        (m.flip(), adj.iter().skip(1).copied().collect())
    };
    row(eq("map f g1", g1.map_graph(f).map_err(|e| e.to_string())?, gg(&[(1, O, &[2, 3])])))?;
    row(eq(
        "map f g2",
        g2.map_graph(f).map_err(|e| e.to_string())?,
        gg(&[(2, X, &[]), (3, X, &[4]), (4, X, &[])]),
    ))?;
    row(eq(
        "map f g",
        g.map_graph(f).map_err(|e| e.to_string())?,
        gg(&[(1, O, &[2, 3]), (2, X, &[]), (3, X, &[4]), (4, X, &[])]),
    ))?;

    row(eq("sinks g1", g1.sinks(), ids(&[1, 2, 3])))?;
    row(eq("sinks g2", g2.sinks(), ids(&[1, 2, 4])))?;
    row(eq("sinks g", g.sinks(), ids(&[1, 2, 3, 4])))?;

    row(check("g1 open", !g1.closed()))?;
    row(check("g2 open", !g2.closed()))?;
    row(check("g closed", g.closed()))?;

    let a = Node(1);
    row(eq("reach a in g1", g1.reach(a), ids(&[1])))?;
    row(check("reach a in g2 empty", g2.reach(a).is_empty()))?;
    row(eq("reach a in g", g.reach(a), ids(&[1, 2, 3, 4])))?;

    Ok(format!("{rows} table rows exact"))
}

// Criterion 2: the stack transformations on the nine-node tree, mid-run.
fn stack_transformations() -> Result<String, String> {
    let g0 = demo_tree();
    let mid = demo_tree_midrun();
    let alpha = [demo_node(1), demo_node(2), demo_node(5)];
    eq(
        "restore over the correct stack recovers the original shape",
        restore(demo_node(6), &alpha, &mid),
        g0.erase(),
    )?;
    check(
        "inset over the correct stack matches the erasure",
        inset(&alpha, &mid) == mid.erase(),
    )?;
    let wrong = [demo_node(2), demo_node(5), demo_node(1)];
    check(
        "inset over a reordered stack differs from the erasure",
        inset(&wrong, &mid) != mid.erase(),
    )?;
    Ok("restore recovers the input; a reordered stack is rejected".to_string())
}

// Criterion 3: the full law suite, randomized plus the tiny-universe sweep.
fn law_suite() -> Result<String, String> {
    let outcomes = run_all(42, 500);
    for outcome in &outcomes {
        if !outcome.passed() {
            return Err(outcome.to_string());
        }
    }
    let tiny = exhaustive_tiny();
    if !tiny.passed() {
        return Err(tiny.to_string());
    }
    Ok(format!(
        "{} laws x 500 cases; exhaustive sweep over {} graphs and {} pairs",
        outcomes.len(),
        tiny.graphs,
        tiny.pairs
    ))
}

// Criterion 4: the marking differential against the recursive traversal.
fn marking_differential() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..1000 {
        let size = rng.gen_range(1..=64);
        let density = [0.2, 0.5, 0.8, 0.95][rng.gen_range(0..4)];
        let seed = rng.gen();
        let cfg = GenConfig::new(Kind::Binary, size, seed).density(density).closed().unmarked();
        let g = gen_graph(&cfg).expect_marked();
        let nodes: Vec<Node> = g.nodes().iter().collect();
        let root = nodes[rng.gen_range(0..nodes.len())];
        let ctx = |what: &str| format!("case {case} (size {size}, density {density}): {what}");

        let run = sw_run(&g, root, &SwOptions::default()).map_err(|f| ctx(&f.to_string()))?;
        if run.iterations > 3 * size + 8 {
            return Err(ctx(&format!("{} iterations exceed the bound", run.iterations)));
        }
        if run.graph.erase() != g.erase() {
            return Err(ctx("marking changed the shape"));
        }
        let marked_part = run.graph.filter_marks(&[Mark::X]);
        let rejoined = marked_part
            .join(&run.graph.filter_marks(&[Mark::O]))
            .map_err(|e| ctx(&e.to_string()))?
            .defined();
        if rejoined.as_ref() != Some(&run.graph) {
            return Err(ctx("final graph is not its marked part plus its unmarked part"));
        }
        if marked_part.nodes() != dfs_mark(&g, root) {
            return Err(ctx("marked set disagrees with the recursive traversal"));
        }
    }
    Ok("1000 runs (<= 64 nodes): bound, shape, mark split, and traversal all agree".to_string())
}

/// A closed, unmarked, connected binary graph: generate, then keep only the
/// chosen root's reachable part, nulling the cut edges.
fn connected_input(rng: &mut ChaCha8Rng, max_nodes: usize) -> (MarkGraph, Node) {
    let size = rng.gen_range(1..=max_nodes);
    let density = [0.2, 0.5, 0.8][rng.gen_range(0..3)];
    let seed = rng.gen();
    let cfg = GenConfig::new(Kind::Binary, size, seed).density(density).closed().unmarked();
    let g = gen_graph(&cfg).expect_marked();
    let nodes: Vec<Node> = g.nodes().iter().collect();
    let root = nodes[rng.gen_range(0..nodes.len())];
    let keep = reach_oracle(&g, root);
    let restricted = g
        .filter_nodes(&keep)
        .map_graph(|_, &m, adj| {
            let adj = adj.iter().map(|&c| if keep.contains(c) { c } else { NULL }).collect();
            (m, adj)
        })
        .expect("arity preserved");
    (restricted, root)
}

// Criterion 5: fully instrumented runs — loop-head audit, register
// agreement, and per-operation implication checks.
fn instrumented_marking() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SwOptions {
        check_each_iteration: true,
        trace: false,
        debug_ops: true,
        require_connected: true,
    };
    let mut iterations = 0usize;
    for case in 0..200 {
        let (g, root) = connected_input(&mut rng, 32);
        let run = sw_run(&g, root, &opts)
            .map_err(|f| format!("case {case} ({} nodes): {f}", g.node_count()))?;
        iterations += run.iterations;
    }
    Ok(format!(
        "200 instrumented runs, {iterations} audited iterations, zero violations"
    ))
}

fn shift_graph(g: &MarkGraph, offset: u64) -> MarkGraph {
    PartialGraph::from_entries(
        Kind::Binary,
        g.iter().map(|(x, &m, adj)| {
            let adj: Vec<Node> = adj
                .iter()
                .map(|&c| if c.is_null() { NULL } else { Node(c.0 + offset) })
                .collect();
            (Node(x.0 + offset), m, adj)
        }),
    )
    .expect("shifting keeps ids distinct and nonzero")
}

// Criterion 6: a component unreachable from the root comes back bit-identical.
fn unreachable_component_framing() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..100 {
        let near_size = rng.gen_range(1..=16);
        let island_size = rng.gen_range(1..=8);
        let near_seed = rng.gen();
        let island_seed = rng.gen();
        let near = gen_graph(
            &GenConfig::new(Kind::Binary, near_size, near_seed)
                .density(0.6)
                .closed()
                .unmarked(),
        )
        .expect_marked();
        let island = shift_graph(
            &gen_graph(
                &GenConfig::new(Kind::Binary, island_size, island_seed)
                    .density(0.6)
                    .closed()
                    .unmarked(),
            )
            .expect_marked(),
            30_000,
        );
        let g = near
            .join(&island)
            .map_err(|e| e.to_string())?
            .defined()
            .ok_or_else(|| format!("case {case}: components overlap"))?;
        let nodes: Vec<Node> = near.nodes().iter().collect();
        let root = nodes[rng.gen_range(0..nodes.len())];

        let run = sw_run(&g, root, &SwOptions::default())
            .map_err(|f| format!("case {case}: {f}"))?;
        if run.graph.filter_nodes(&island.nodes()) != island {
            return Err(format!("case {case}: the unreachable component changed"));
        }
    }
    Ok("100 disconnected runs: unreachable components bit-identical".to_string())
}

// Criterion 7: scripted union-find versus the explicit-partition oracle.
fn union_find_scripts() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut total_ops = 0usize;
    for case in 0..500 {
        let op_count = rng.gen_range(1..=100);
        let script = gen_script(op_count, rng.gen());
        total_ops += script.ops.len();
        let ctx = |what: &str| format!("case {case}: {what}");

        let replay = replay_script(&script).map_err(|e| ctx(&e.to_string()))?;
        for (i, step) in replay.steps.iter().enumerate() {
            if let Err(v) = &step.set_check {
                return Err(ctx(&format!("op {} ({}): {v}", i + 1, step.op)));
            }
        }

        let (oracle_steps, oracle_final) =
            partition_run(&script).map_err(|e| ctx(&e.to_string()))?;
        eq("step count", replay.steps.len(), oracle_steps.len()).map_err(|e| ctx(&e))?;
        let ordinal = |x: Node| -> Result<Node, String> {
            replay
                .births
                .iter()
                .position(|&b| b == x)
                .map(|i| Node(i as u64 + 1))
                .ok_or_else(|| format!("{x} is not an allocated cell"))
        };
        for (i, (step, oracle_step)) in replay.steps.iter().zip(&oracle_steps).enumerate() {
            let got = ordinal(step.result).map_err(|e| ctx(&e))?;
            if got != oracle_step.node() {
                return Err(ctx(&format!(
                    "op {} ({}): replay answered {got}, oracle {:?}",
                    i + 1,
                    step.op,
                    oracle_step
                )));
            }
        }
        let mut mapped: Vec<(NodeSet, Node)> = Vec::new();
        for w in &replay.sets {
            let members: NodeSet = w
                .members
                .iter()
                .map(ordinal)
                .collect::<Result<Vec<Node>, String>>()
                .map_err(|e| ctx(&e))?
                .into_iter()
                .collect();
            mapped.push((members, ordinal(w.representative).map_err(|e| ctx(&e))?));
        }
        mapped.sort_by_key(|(s, _)| s.iter().next());
        if mapped != oracle_final.sets {
            return Err(ctx("final set families differ"));
        }
    }

    // The seven-element merge scenario: after union(a, d), d represents all
    // seven elements, and find(b) says so across the merge.
    let replay = replay_script(&forest7_script()).map_err(|e| e.to_string())?;
    check("scenario set checks", replay.all_sets_ok())?;
    let d = replay.births[3];
    let last = replay.steps.last().ok_or("scenario produced no steps")?;
    eq("find b after union(a, d)", last.result, d)?;
    eq("one merged set", replay.sets.len(), 1)?;
    eq("merged representative", replay.sets[0].representative, d)?;

    Ok(format!(
        "500 scripts ({total_ops} ops) match the oracle; merge scenario confirmed"
    ))
}

// Criterion 8: summit definitions versus path enumeration, and the
// subtractive split over random preacyclic graphs.
fn summit_oracle_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..2000 {
        let size = rng.gen_range(0..=8);
        let density = [0.2, 0.5, 0.8][rng.gen_range(0..3)];
        let seed = rng.gen();
        let mut cfg = GenConfig::new(Kind::Unary, size, seed).density(density);
        if rng.gen_bool(0.5) {
            cfg = cfg.closed();
        }
        let g = gen_graph(&cfg).expect_unary();
        if summits(&g) != summits_oracle(&g) {
            return Err(format!("case {case}: summit sets differ from enumeration on {g}"));
        }
        let mut pool: Vec<Node> = g.nodes0().union(&g.sinks()).iter().collect();
        pool.push(Node(pool.iter().map(|x| x.0).max().unwrap_or(0) + 1));
        for x in pool {
            if summit(&g, x) != summit_oracle(&g, x) {
                return Err(format!("case {case}: summit of {x} differs on {g}"));
            }
        }
    }

    for case in 0..500 {
        // Edges point strictly upward, dangle, self-loop, or stop at null,
        // so the composite is preacyclic by construction.
        let n = rng.gen_range(0..=8u64);
        let mut g: UnitGraph = PartialGraph::empty(Kind::Unary);
        for i in 1..=n {
            let succ = match rng.gen_range(0..4) {
                0 => Node(i),
                1 if i < n => Node(rng.gen_range(i + 1..=n)),
                2 => NULL,
                _ => Node(n + 1 + rng.gen_range(0..2)),
            };
            g.insert(Node(i), (), vec![succ]).expect("distinct ids");
        }
        if !preacyclic(&g) {
            return Err(format!("case {case}: construction broke on {g}"));
        }
        let mut left = NodeSet::new();
        for x in g.nodes().iter() {
            if rng.gen_bool(0.5) {
                left.insert(x);
            }
        }
        let g1 = g.filter_nodes(&left);
        let g2 = g.filter_nodes(&g.nodes().difference(&left));
        let want = summits(&g1)
            .difference(&g2.nodes())
            .union(&summits(&g2).difference(&g1.nodes()));
        if summits(&g) != want {
            return Err(format!("case {case}: summits do not split subtractively on {g}"));
        }
    }

    Ok("2000 enumeration cases and 500 preacyclic splits agree".to_string())
}

// Criterion 9: layout round-trips and layout distribution, all three kinds.
fn layout_roundtrips() -> Result<String, String> {
    let layout_laws: Vec<_> = registry()
        .into_iter()
        .filter(|law| law.name.starts_with("layout-"))
        .collect();
    eq("layout law count", layout_laws.len(), 6)?;
    for law in &layout_laws {
        let outcome = run_law(law, 42, 500);
        if !outcome.passed() {
            return Err(outcome.to_string());
        }
    }
    Ok("six layout laws x 500 cases".to_string())
}

#[test]
fn acceptance_gate() {
    let mut failures = Vec::new();
    let secs = Duration::from_secs;
    criterion(&mut failures, 1, "worked example table", secs(1), worked_example_table);
    criterion(&mut failures, 2, "stack transformations", secs(1), stack_transformations);
    criterion(&mut failures, 3, "law suite", secs(60), law_suite);
    criterion(&mut failures, 4, "marking differential", secs(30), marking_differential);
    criterion(&mut failures, 5, "instrumented marking", secs(60), instrumented_marking);
    criterion(&mut failures, 6, "unreachable component framing", secs(10), unreachable_component_framing);
    criterion(&mut failures, 7, "union-find scripts", secs(30), union_find_scripts);
    criterion(&mut failures, 8, "summit oracle equivalence", secs(30), summit_oracle_equivalence);
    criterion(&mut failures, 9, "layout round-trips", secs(10), layout_roundtrips);
    assert!(failures.is_empty(), "acceptance failures:\n{}", failures.join("\n"));
}
