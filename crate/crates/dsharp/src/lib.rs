//! File formats, JSON reports and the `dsharp` command line on top of
//! [`dsharp_core`].
//!
//! Every subcommand writes a JSON report (schema version, resolved flags,
//! master seed and results) and, with `--curves`, a CSV of the curves behind
//! the usual plots.

pub mod cli;
pub mod commands;
pub mod curves;
pub mod io;

pub use dsharp_core as core;
