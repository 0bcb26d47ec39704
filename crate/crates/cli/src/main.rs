//! `cutproject`: generate model-set patches, scan bounded-remainder
//! discrepancy, test bounded distance equivalence, check Hall's condition,
//! and build/verify piecewise-translation equidecompositions.
//!
//! Exit codes: 0 on PASS/success verdicts, 1 on FAIL verdicts (Hall
//! violated, growth evidence, equidecomposition defect), 2 on usage or
//! configuration errors.

mod args;
mod commands;
mod output;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    let code = match commands::run(&cli) {
        Ok(exit) => exit,
        Err(err) => {
            eprintln!("error: {err}");
            2
        }
    };
    std::process::exit(code);
}
