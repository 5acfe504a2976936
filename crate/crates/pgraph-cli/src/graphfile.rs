//! The graph and script text formats.
//!
//! A graph file starts with a header line `kind <binary|unary|general>`,
//! followed by one line per node. `0` always denotes null, so node ids are
//! nonzero. Blank lines and lines starting with `#` are ignored, which lets
//! generated files carry a comment header (for example a symbol table
//! mapping names to ids).
//!
//! - binary:  `<id> <O|L|R|X> <left> <right>`; ids at least 3 apart so the
//!   graph can be laid out as adjacent mark/left/right cells
//! - unary:   `<id> <succ>`
//! - general: `<id> <O|L|R|X>: <succ>*`
//!
//! A union-find script is one operation per line: `new <handle>`,
//! `find <handle>`, or `union <handle> <handle>`, with the same comment
//! rules.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use pgraph::oracles::GenGraph;
use pgraph::union_find::{UfOp, UfScript};
use pgraph::{Kind, Mark, MarkGraph, Node, PartialGraph, UnitGraph};

/// A parsed graph of either content type; the kind travels inside.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyGraph {
    Marked(MarkGraph),
    Unary(UnitGraph),
}

impl AnyGraph {
    pub fn kind(&self) -> Kind {
        match self {
            AnyGraph::Marked(g) => g.kind(),
            AnyGraph::Unary(g) => g.kind(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            AnyGraph::Marked(g) => g.node_count(),
            AnyGraph::Unary(g) => g.node_count(),
        }
    }
}

impl From<GenGraph> for AnyGraph {
    fn from(g: GenGraph) -> Self {
        match g {
            GenGraph::Marked(g) => AnyGraph::Marked(g),
            GenGraph::Unary(g) => AnyGraph::Unary(g),
        }
    }
}

/// A malformed graph or script file; every variant names the 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: expected header `kind <binary|unary|general>`")]
    MissingHeader { line: usize },
    #[error("line {line}: unknown kind `{word}`")]
    UnknownKind { line: usize, word: String },
    #[error("line {line}: expected {want}")]
    Malformed { line: usize, want: &'static str },
    #[error("line {line}: `{token}` is not a number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: `{token}` is not a mark (O, L, R, or X)")]
    BadMark { line: usize, token: String },
    #[error("line {line}: node id 0 is reserved for null")]
    NullId { line: usize },
    #[error("line {line}: duplicate node {id}")]
    Duplicate { line: usize, id: u64 },
    #[error("line {line}: binary ids must be at least 3 apart ({a} and {b} are not)")]
    TooClose { line: usize, a: u64, b: u64 },
}

/// `(line, content)` for every line that isn't blank or a comment.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_number(line: usize, token: &str) -> Result<u64, ParseError> {
    token
        .parse()
        .map_err(|_| ParseError::BadNumber { line, token: token.to_string() })
}

fn parse_id(line: usize, token: &str) -> Result<Node, ParseError> {
    let id = parse_number(line, token)?;
    if id == 0 {
        return Err(ParseError::NullId { line });
    }
    Ok(Node(id))
}

fn parse_mark(line: usize, token: &str) -> Result<Mark, ParseError> {
    Mark::from_symbol(token)
        .ok_or_else(|| ParseError::BadMark { line, token: token.to_string() })
}

/// Parse a graph file. Inverse of [`format_graph`].
pub fn parse_graph(text: &str) -> Result<AnyGraph, ParseError> {
    let mut lines = significant_lines(text);
    let (header_line, header) = lines.next().ok_or(ParseError::MissingHeader { line: 1 })?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 2 || tokens[0] != "kind" {
        return Err(ParseError::MissingHeader { line: header_line });
    }
    let kind = match tokens[1] {
        "binary" => Kind::Binary,
        "unary" => Kind::Unary,
        "general" => Kind::General,
        word => return Err(ParseError::UnknownKind { line: header_line, word: word.to_string() }),
    };

    // Track where each id was declared, both for duplicate reports and for
    // the binary spacing rule.
    let mut declared: BTreeMap<u64, usize> = BTreeMap::new();
    let mut declare = |line: usize, x: Node| -> Result<(), ParseError> {
        if declared.insert(x.0, line).is_some() {
            return Err(ParseError::Duplicate { line, id: x.0 });
        }
        if kind == Kind::Binary {
            let near = declared
                .range(x.0.saturating_sub(2)..=x.0.saturating_add(2))
                .map(|(&id, _)| id)
                .find(|&id| id != x.0);
            if let Some(other) = near {
                return Err(ParseError::TooClose { line, a: other.min(x.0), b: other.max(x.0) });
            }
        }
        Ok(())
    };

    match kind {
        Kind::Unary => {
            let mut g: UnitGraph = PartialGraph::empty(Kind::Unary);
            for (line, l) in lines {
                let tokens: Vec<&str> = l.split_whitespace().collect();
                let [id, succ] = tokens[..] else {
                    return Err(ParseError::Malformed { line, want: "`<id> <succ>`" });
                };
                let x = parse_id(line, id)?;
                declare(line, x)?;
                let succ = Node(parse_number(line, succ)?);
                g.insert(x, (), vec![succ]).expect("id checked fresh and nonzero");
            }
            Ok(AnyGraph::Unary(g))
        }
        Kind::Binary => {
            let mut g: MarkGraph = PartialGraph::empty(Kind::Binary);
            for (line, l) in lines {
                let tokens: Vec<&str> = l.split_whitespace().collect();
                let [id, mark, left, right] = tokens[..] else {
                    return Err(ParseError::Malformed {
                        line,
                        want: "`<id> <O|L|R|X> <left> <right>`",
                    });
                };
                let x = parse_id(line, id)?;
                declare(line, x)?;
                let m = parse_mark(line, mark)?;
                let adj = vec![Node(parse_number(line, left)?), Node(parse_number(line, right)?)];
                g.insert(x, m, adj).expect("id checked fresh and nonzero");
            }
            Ok(AnyGraph::Marked(g))
        }
        Kind::General => {
            let mut g: MarkGraph = PartialGraph::empty(Kind::General);
            for (line, l) in lines {
                let tokens: Vec<&str> = l.split_whitespace().collect();
                let [id, mark, succs @ ..] = &tokens[..] else {
                    return Err(ParseError::Malformed { line, want: "`<id> <O|L|R|X>: <succ>*`" });
                };
                let Some(mark) = mark.strip_suffix(':') else {
                    return Err(ParseError::Malformed {
                        line,
                        want: "a `:` after the mark, as in `<id> <O|L|R|X>: <succ>*`",
                    });
                };
                let x = parse_id(line, id)?;
                declare(line, x)?;
                let m = parse_mark(line, mark)?;
                let adj = succs
                    .iter()
                    .map(|s| parse_number(line, s).map(Node))
                    .collect::<Result<Vec<Node>, ParseError>>()?;
                g.insert(x, m, adj).expect("id checked fresh and nonzero");
            }
            Ok(AnyGraph::Marked(g))
        }
    }
}

/// Serialize a graph. Inverse of [`parse_graph`].
pub fn format_graph(g: &AnyGraph) -> String {
    let mut out = String::new();
    writeln!(out, "kind {}", g.kind()).expect("writing to a String");
    match g {
        AnyGraph::Unary(g) => {
            for (x, _, adj) in g.iter() {
                writeln!(out, "{x} {}", adj[0]).expect("writing to a String");
            }
        }
        AnyGraph::Marked(g) if g.kind() == Kind::Binary => {
            for (x, m, adj) in g.iter() {
                writeln!(out, "{x} {} {} {}", m.symbol(), adj[0], adj[1])
                    .expect("writing to a String");
            }
        }
        AnyGraph::Marked(g) => {
            for (x, m, adj) in g.iter() {
                write!(out, "{x} {}:", m.symbol()).expect("writing to a String");
                for y in adj {
                    write!(out, " {y}").expect("writing to a String");
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Parse a union-find script file.
pub fn parse_script(text: &str) -> Result<UfScript, ParseError> {
    let mut ops = Vec::new();
    for (line, l) in significant_lines(text) {
        let tokens: Vec<&str> = l.split_whitespace().collect();
        let op = match tokens[..] {
            ["new", h] => UfOp::New(h.to_string()),
            ["find", h] => UfOp::Find(h.to_string()),
            ["union", a, b] => UfOp::Union(a.to_string(), b.to_string()),
            _ => {
                return Err(ParseError::Malformed {
                    line,
                    want: "`new <handle>`, `find <handle>`, or `union <handle> <handle>`",
                })
            }
        };
        ops.push(op);
    }
    Ok(UfScript { ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pgraph::examples::{general_graph, unary_graph};
    use pgraph::Mark::{O, X};

    #[test]
    fn parses_a_binary_file_with_comments() {
        let text = "# a comment\n\nkind binary\n3 O 6 0\n6 X 0 3\n";
        let AnyGraph::Marked(g) = parse_graph(text).unwrap() else {
            panic!("binary files parse to marked graphs")
        };
        assert_eq!(g.kind(), Kind::Binary);
        assert_eq!(g.get(Node(3)), Some((&O, [Node(6), Node(0)].as_slice())));
        assert_eq!(g.get(Node(6)), Some((&X, [Node(0), Node(3)].as_slice())));
    }

    #[test]
    fn parses_general_and_unary_files() {
        let g = parse_graph("kind general\n1 O: 2 3\n2 X:\n").unwrap();
        assert_eq!(g, AnyGraph::Marked(general_graph(&[(1, O, &[2, 3]), (2, X, &[])])));
        let g = parse_graph("kind unary\n1 1\n2 1\n").unwrap();
        assert_eq!(g, AnyGraph::Unary(unary_graph(&[(1, 1), (2, 1)])));
    }

    #[test]
    fn empty_bodies_parse_to_empty_graphs() {
        assert_eq!(parse_graph("kind general\n").unwrap().node_count(), 0);
        assert_eq!(parse_graph("kind binary\n# nothing\n").unwrap().node_count(), 0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_graph(""), Err(ParseError::MissingHeader { line: 1 }));
        assert_eq!(
            parse_graph("kind sideways\n"),
            Err(ParseError::UnknownKind { line: 1, word: "sideways".into() })
        );
        assert_eq!(
            parse_graph("# intro\nkind unary\n1 1\n1 2\n"),
            Err(ParseError::Duplicate { line: 4, id: 1 })
        );
        assert_eq!(
            parse_graph("kind unary\n0 1\n"),
            Err(ParseError::NullId { line: 2 })
        );
        assert_eq!(
            parse_graph("kind binary\n3 O 0 0\n4 O 0 0\n"),
            Err(ParseError::TooClose { line: 3, a: 3, b: 4 })
        );
        assert_eq!(
            parse_graph("kind binary\n3 Q 0 0\n"),
            Err(ParseError::BadMark { line: 2, token: "Q".into() })
        );
        assert_eq!(
            parse_graph("kind general\n1 O 2\n"),
            Err(ParseError::Malformed {
                line: 2,
                want: "a `:` after the mark, as in `<id> <O|L|R|X>: <succ>*`",
            })
        );
        assert_eq!(
            parse_graph("kind unary\n1 one\n"),
            Err(ParseError::BadNumber { line: 2, token: "one".into() })
        );
    }

    #[test]
    fn format_then_parse_is_identity() {
        let g = AnyGraph::Marked(general_graph(&[(1, X, &[1, 2, 3]), (7, O, &[])]));
        assert_eq!(parse_graph(&format_graph(&g)).unwrap(), g);
    }

    #[test]
    fn scripts_parse_per_line() {
        let script = parse_script("# ops\nnew a\nnew b\nunion a b\nfind a\n").unwrap();
        assert_eq!(script.ops.len(), 4);
        assert_eq!(script.ops[2], UfOp::Union("a".into(), "b".into()));
        assert_eq!(
            parse_script("new a\nmerge a b\n"),
            Err(ParseError::Malformed {
                line: 2,
                want: "`new <handle>`, `find <handle>`, or `union <handle> <handle>`",
            })
        );
    }
}
