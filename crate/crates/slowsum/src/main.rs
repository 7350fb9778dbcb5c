use clap::Parser;

use slowsum::cli::{run, Cli, CliError};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => print!("{out}"),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            std::process::exit(2);
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}
