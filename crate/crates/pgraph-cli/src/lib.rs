//! Library half of the `pgraph` command-line tool: the graph and script
//! text formats, and the subcommand implementations. The binary in
//! `main.rs` is a thin argument-parsing wrapper so everything here is
//! testable against in-memory buffers.

pub mod commands;
pub mod graphfile;
