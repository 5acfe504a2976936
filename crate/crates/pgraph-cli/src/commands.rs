//! Subcommand bodies. Each takes a writer for its report and returns the
//! process exit code: 0 when every check passed, 1 when a check failed, and
//! 2 for usage or parse problems.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use pgraph::laws::{exhaustive_tiny, run_all};
use pgraph::oracles::{gen_graph, partition_run, GenConfig};
use pgraph::schorr_waite::{sw_run, SwOptions};
use pgraph::union_find::replay_script;
use pgraph::{Kind, Node};

use crate::graphfile::{format_graph, parse_graph, parse_script, AnyGraph};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

fn read(out: &mut dyn Write, path: &Path) -> io::Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) => {
            writeln!(out, "error: {}: {e}", path.display())?;
            Ok(None)
        }
    }
}

/// Options for [`run_mark`], mirroring the marking runner's instrumentation.
#[derive(Debug, Clone, Copy, Default)]
pub struct MarkArgs {
    pub check_invariants: bool,
    pub trace: bool,
    pub debug: bool,
    pub connected: bool,
}

/// Mark a binary graph file in place and report the outcome.
pub fn run_mark(out: &mut dyn Write, path: &Path, root: u64, args: MarkArgs) -> io::Result<i32> {
    let Some(text) = read(out, path)? else {
        return Ok(EXIT_USAGE);
    };
    let graph = match parse_graph(&text) {
        Ok(g) => g,
        Err(e) => {
            writeln!(out, "error: {}: {e}", path.display())?;
            return Ok(EXIT_USAGE);
        }
    };
    let AnyGraph::Marked(g) = graph else {
        writeln!(out, "error: marking needs a binary graph, this file is unary")?;
        return Ok(EXIT_CHECK_FAILED);
    };
    if g.kind() != Kind::Binary {
        writeln!(out, "error: marking needs a binary graph, this file is {}", g.kind())?;
        return Ok(EXIT_CHECK_FAILED);
    }

    let opts = SwOptions {
        check_each_iteration: args.check_invariants,
        trace: args.trace,
        debug_ops: args.debug,
        require_connected: args.connected,
    };
    match sw_run(&g, Node(root), &opts) {
        Ok(run) => {
            if args.trace {
                for event in &run.trace {
                    writeln!(out, "{event}")?;
                }
            }
            write!(out, "{}", format_graph(&AnyGraph::Marked(run.graph.clone())))?;
            writeln!(out, "marked={} restored=ok", run.marked.len())?;
            Ok(EXIT_OK)
        }
        Err(failure) => {
            for event in &failure.trace {
                writeln!(out, "{event}")?;
            }
            writeln!(out, "error: {failure}")?;
            Ok(EXIT_CHECK_FAILED)
        }
    }
}

/// Run the law suite and print one line per law.
pub fn run_laws(out: &mut dyn Write, seed: u64, cases: usize, tiny: bool) -> io::Result<i32> {
    let outcomes = run_all(seed, cases);
    let mut ok = true;
    for outcome in &outcomes {
        writeln!(out, "{outcome}")?;
        ok &= outcome.passed();
    }
    if tiny {
        let report = exhaustive_tiny();
        writeln!(out, "{report}")?;
        ok &= report.passed();
    }
    writeln!(
        out,
        "laws={} seed={seed} cases={cases} {}",
        outcomes.len(),
        if ok { "ok" } else { "FAILED" }
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Replay a union-find script, checking every set witness and comparing
/// every answer against the explicit-partition oracle.
pub fn run_uf(out: &mut dyn Write, path: &Path) -> io::Result<i32> {
    let Some(text) = read(out, path)? else {
        return Ok(EXIT_USAGE);
    };
    let script = match parse_script(&text) {
        Ok(s) => s,
        Err(e) => {
            writeln!(out, "error: {}: {e}", path.display())?;
            return Ok(EXIT_USAGE);
        }
    };

    let replay = match replay_script(&script) {
        Ok(r) => r,
        Err(e) => {
            writeln!(out, "error: {e}")?;
            return Ok(EXIT_CHECK_FAILED);
        }
    };
    let (oracle_steps, _) = match partition_run(&script) {
        Ok(r) => r,
        Err(e) => {
            writeln!(out, "error: oracle rejected a script the replay accepted: {e}")?;
            return Ok(EXIT_CHECK_FAILED);
        }
    };

    // The oracle numbers cells by allocation order; line the heap's
    // addresses up through the replay's birth list.
    let ordinal = |x: Node| {
        replay
            .births
            .iter()
            .position(|&b| b == x)
            .map(|i| Node(i as u64 + 1))
    };
    let mut ok = true;
    for (i, step) in replay.steps.iter().enumerate() {
        let mut notes = String::new();
        if let Err(v) = &step.set_check {
            notes.push_str(&format!(" SET-CHECK-FAILED: {v}"));
            ok = false;
        }
        match (ordinal(step.result), oracle_steps.get(i)) {
            (Some(got), Some(want)) if got == want.node() => {}
            (got, want) => {
                let want = want.map(|step| step.node());
                notes.push_str(&format!(" ORACLE-MISMATCH: replay {got:?}, oracle {want:?}"));
                ok = false;
            }
        }
        writeln!(out, "{} -> {}{notes}", step.op, step.result)?;
    }
    for witness in &replay.sets {
        writeln!(out, "set {witness}")?;
    }
    writeln!(
        out,
        "ops={} sets={} {}",
        replay.steps.len(),
        replay.sets.len(),
        if ok { "ok" } else { "FAILED" }
    )?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Arguments for [`run_gen`]: the generator configuration plus destination.
#[derive(Debug, Clone)]
pub struct GenArgs {
    pub kind: Kind,
    pub nodes: usize,
    pub density: f64,
    pub seed: u64,
    pub closed: bool,
    pub unmarked: bool,
    pub forest: bool,
}

/// Generate a graph file to `out_path`, or to the report writer.
pub fn run_gen(
    out: &mut dyn Write,
    args: &GenArgs,
    out_path: Option<&Path>,
) -> io::Result<i32> {
    if args.forest && args.kind != Kind::Unary {
        writeln!(out, "error: --forest only makes sense with --kind unary")?;
        return Ok(EXIT_USAGE);
    }
    let mut cfg = GenConfig::new(args.kind, args.nodes, args.seed).density(args.density);
    if args.closed {
        cfg = cfg.closed();
    }
    if args.unmarked {
        cfg = cfg.unmarked();
    }
    if args.forest {
        cfg = cfg.forest();
    }
    let g = AnyGraph::from(gen_graph(&cfg));
    let mut text = format!(
        "# generated: kind={} nodes={} density={} seed={}{}{}{}\n",
        args.kind,
        args.nodes,
        args.density,
        args.seed,
        if args.closed { " closed" } else { "" },
        if args.unmarked { " unmarked" } else { "" },
        if args.forest { " forest" } else { "" },
    );
    text.push_str(&format_graph(&g));
    match out_path {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                writeln!(out, "error: {}: {e}", path.display())?;
                return Ok(EXIT_USAGE);
            }
        }
        None => write!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}
