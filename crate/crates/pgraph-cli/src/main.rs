//! `pgraph`: mark graphs with the pointer-reversing traversal, replay
//! union-find scripts, run the algebra's law suite, and generate graph
//! files. See the library crate for the text formats.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pgraph::Kind;
use pgraph_cli::commands::{run_gen, run_laws, run_mark, run_uf, GenArgs, MarkArgs};

#[derive(Parser)]
#[command(name = "pgraph", version, about = "Partial-graph algebra toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mark a binary graph file from a root, checking the run as it goes.
    Mark {
        /// Graph file (`kind binary` format).
        file: PathBuf,
        /// Root node id to mark from.
        #[arg(long)]
        root: u64,
        /// Audit the full loop invariant at every loop head.
        #[arg(long)]
        check_invariants: bool,
        /// Print one line per machine operation.
        #[arg(long)]
        trace: bool,
        /// Check each operation's local contract at its boundaries.
        #[arg(long)]
        debug: bool,
        /// Require every node to be reachable from the root up front.
        #[arg(long)]
        connected: bool,
    },
    /// Run the randomized law suite (and optionally the exhaustive sweep).
    Laws {
        /// Seed for the per-law deterministic case streams.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Randomized cases per law.
        #[arg(long, default_value_t = 100)]
        cases: usize,
        /// Also enumerate the full three-node universe.
        #[arg(long)]
        exhaustive_tiny: bool,
    },
    /// Replay a union-find script with per-operation set checking.
    Uf {
        /// Script file: `new <h>` / `find <h>` / `union <h1> <h2>` lines.
        script: PathBuf,
    },
    /// Generate a pseudo-random graph file.
    Gen {
        #[arg(long, value_enum, default_value_t = KindArg::Binary)]
        kind: KindArg,
        #[arg(long, default_value_t = 8)]
        nodes: usize,
        /// Probability that a child slot points at an existing node.
        #[arg(long, default_value_t = 0.6)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep every edge inside the graph (or null).
        #[arg(long)]
        closed: bool,
        /// Give every node the unmarked mark.
        #[arg(long)]
        unmarked: bool,
        /// Unary only: generate parent pointers toward self-looped roots.
        #[arg(long)]
        forest: bool,
        /// Write here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Binary,
    Unary,
    General,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Binary => Kind::Binary,
            KindArg::Unary => Kind::Unary,
            KindArg::General => Kind::General,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Mark { file, root, check_invariants, trace, debug, connected } => {
            let args = MarkArgs { check_invariants, trace, debug, connected };
            run_mark(&mut out, &file, root, args)
        }
        Command::Laws { seed, cases, exhaustive_tiny } => {
            run_laws(&mut out, seed, cases, exhaustive_tiny)
        }
        Command::Uf { script } => run_uf(&mut out, &script),
        Command::Gen { kind, nodes, density, seed, closed, unmarked, forest, out: out_path } => {
            let args = GenArgs {
                kind: kind.into(),
                nodes,
                density,
                seed,
                closed,
                unmarked,
                forest,
            };
            run_gen(&mut out, &args, out_path.as_deref())
        }
    };
    let code = result.unwrap_or_else(|e| {
        let _ = writeln!(std::io::stderr(), "error: {e}");
        2
    });
    ExitCode::from(code as u8)
}
