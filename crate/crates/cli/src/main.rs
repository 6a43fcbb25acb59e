use clap::Parser;
use haraux_cli::{run, Cli, RunConfig};

fn main() {
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    if let Err(e) = result {
        eprintln!("haraux: {e}");
        std::process::exit(e.exit_code());
    }
}
