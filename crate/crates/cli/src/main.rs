use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use polar_mi_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result =
        run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr()).context("polar-mi failed");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e:#}");
            let code = e
                .chain()
                .find_map(|c| c.downcast_ref::<CliError>())
                .map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
