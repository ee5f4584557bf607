use std::process::ExitCode;

use clap::Parser;
use dseu_cli::{configure_threads, run, write_output, Cli, CliError, RunConfig};

fn main() -> ExitCode {
    let config: RunConfig = Cli::parse().into();
    let result = configure_threads()
        .and_then(|_| run(&config))
        .and_then(|out| {
            write_output(&config, &out)?;
            match out.failure {
                Some(failed) => Err(CliError::Numerical(failed)),
                None => Ok(()),
            }
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dseu: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
