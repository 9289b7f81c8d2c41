use clap::Parser;
use tnc_cli::{exit, Cli};

fn main() {
    let cli = Cli::parse();
    match tnc_cli::run(&cli) {
        Ok(()) => std::process::exit(exit::SUCCESS),
        Err(e) => {
            eprintln!("tnc: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
