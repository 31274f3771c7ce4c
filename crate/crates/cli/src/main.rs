use std::io;

use clap::Parser;
use keke_cli::commands::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let stdin = io::stdin();
    let code = run(&cli, &mut stdin.lock(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
