use ca_cli::{run, Cli};
use clap::Parser;

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
