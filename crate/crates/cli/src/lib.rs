//! Command-line front end: each figure of the study is one subcommand that
//! writes CSV tables, a JSON summary and its own resolved `config.json`.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selfcheck;

use std::io::Write;

pub use args::{Cli, Command};
pub use error::{CliError, CliResult};

/// Runs a parsed command line, printing summaries to stdout and the list of
/// written files to stderr.
pub fn run(cli: &Cli) -> CliResult<()> {
    if let Command::Selfcheck(a) = &cli.command {
        let report = selfcheck::run();
        let text = output::to_json(&report);
        print!("{text}");
        if let Some(dir) = &a.out {
            output::ensure_dir(dir)?;
            output::write_json(dir, "selfcheck.json", &report)?;
        }
        if !report.passed {
            return Err(CliError::SelfcheckFailed(report.failures().join(", ")));
        }
        return Ok(());
    }
    let (config, out) = cli
        .command
        .resolve()?
        .expect("every other command resolves to a config");
    let outcome = commands::execute(&config, &out)?;
    if let Some(summary) = outcome.summary {
        print!("{summary}");
    }
    let mut err = std::io::stderr().lock();
    for f in &outcome.files {
        let _ = writeln!(err, "wrote {}", f.display());
    }
    Ok(())
}
