mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use cmchain_core::Result;

use args::{Cli, Command};

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Spectrum(c) => commands::spectrum(&commands::load_config(&c, None)?)?,
        Command::EdgeState { common, theta } => {
            commands::edge_state(&commands::load_config(&common, None)?, &theta)?
        }
        Command::Evolve(c) => commands::evolve_cmd(&commands::load_config(&c, None)?)?,
        Command::Sweep(c) => commands::sweep(&commands::load_config(&c, None)?)?,
        Command::Preset { name, common } => commands::preset(&commands::load_config(&common, Some(&name))?)?,
        Command::Verify { path } => return commands::verify(&path),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        // Checksum mismatch.
        Ok(false) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
