use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use deckrec::error::EXIT_INPUT;
use deckrec::formats::to_pretty;
use deckrec::{run, Command, ExperimentConfig};

/// Population recovery experiments over the deletion channel.
#[derive(Parser, Debug)]
#[command(name = "deckrec", version, about)]
struct Cli {
    /// Subcommand to run.
    #[arg(value_enum)]
    command: Command,
    /// JSON config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ExperimentConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.config.as_deref().map(ExperimentConfig::read).transpose().and_then(|base| {
        let cfg = base.unwrap_or_default().merged(&cli.overrides);
        run(cli.command, &cfg)
    });
    match result {
        Ok(outcome) => {
            print!("{}", to_pretty(&outcome.document));
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            print!("{}", to_pretty(&e.to_json()));
            ExitCode::from(e.exit_code().clamp(1, EXIT_INPUT) as u8)
        }
    }
}
