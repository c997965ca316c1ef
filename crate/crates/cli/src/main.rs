mod args;
mod commands;
mod data;
mod error;
mod manifest;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    if let Err(e) = commands::run(&cli.command) {
        eprintln!("cbtest {}: {e}", cli.command.name());
        std::process::exit(e.code);
    }
}
