//! Harness internals behind the `racko` binary: argument definitions,
//! run-parameter resolution and the subcommand implementations. Split out
//! as a library so the integration suite can drive the same code the
//! binary runs.

pub mod cli;
pub mod commands;
pub mod config;
