use std::process::ExitCode;

use clap::Parser;

use balescu_cli::commands;
use balescu_cli::config::RunConfig;
use balescu_cli::{Cli, Command};

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match &cli.command {
        Command::Dispersion(r) => commands::cmd_dispersion(&cfg, r)?,
        Command::Jay(r) => commands::cmd_jay(&cfg, r)?,
        Command::Freq(r) => commands::cmd_freq(&cfg, r)?,
        Command::Kernel(a) => commands::cmd_kernel(&cfg, a)?,
        Command::Evolve(a) => commands::cmd_evolve(&cfg, a)?,
        Command::Verify(a) => return commands::cmd_verify(&cfg, a),
        Command::Manifest => commands::cmd_manifest(&cfg)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
