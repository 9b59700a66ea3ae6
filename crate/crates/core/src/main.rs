//! Batch pipeline binary; see [`cli`] for the command surface.
//!
//! Exit codes: 0 success, 1 computation error, 2 usage error (clap's
//! default).

use clap::Parser;

mod cli;

fn main() {
    let args = cli::Cli::parse();
    if let Err(e) = args.run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
