use std::process::ExitCode;

use clap::Parser;
use dsharp::cli::{run, Cli};

fn main() -> ExitCode {
    run(&Cli::parse())
}
