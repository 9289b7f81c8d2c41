//! Command-line front end: argument parsing, run manifests and the
//! `denoise`, `curvature`, `synth` and `metrics` subcommands.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;

pub use args::Cli;
pub use error::{exit, CliError};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    use args::Command;
    match &cli.command {
        Command::Denoise(a) => commands::denoise(a),
        Command::Curvature(a) => commands::curvature(a),
        Command::Synth(a) => commands::synth(a),
        Command::Metrics(a) => commands::metrics(a),
    }
}
