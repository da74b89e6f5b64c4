use std::process::ExitCode;

use clap::Parser;
use typgas_cli::{args::threads_from_env, run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads_from_env().and_then(|threads| {
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
        }
        run(&cli)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
