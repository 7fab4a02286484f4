//! `relkern` command-line tool. Every output starts with the resolved
//! configuration, and identical inputs give byte-identical files.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation
//! error, 3 numerical failure.

mod args;
mod commands;
mod poker;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use relkern_poker::PokerError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(relkern::Error),
    Poker(PokerError),
    Io(std::io::Error),
}

impl From<relkern::Error> for CliError {
    fn from(e: relkern::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<PokerError> for CliError {
    fn from(e: PokerError) -> Self {
        match e {
            PokerError::Task(inner) => CliError::Core(inner),
            other => CliError::Poker(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(e) if e.is_validation() || matches!(e, relkern::Error::Io(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Poker(PokerError::SamplingFailed { .. }) => 3,
            CliError::Poker(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Poker(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

fn write_output(cli: &Cli, bytes: &[u8]) -> Result<(), CliError> {
    if cli.out.as_os_str() == "-" {
        std::io::stdout().lock().write_all(bytes)?;
    } else {
        std::fs::write(&cli.out, bytes)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", cli.out.display())))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let bytes = match &cli.command {
        Command::Verify(a) => {
            let (bytes, cells) = commands::verify(a, cli.format)?;
            write_output(cli, &bytes)?;
            let failures: Vec<_> = cells.iter().filter(|c| c.status == commands::VerifyStatus::Fail).collect();
            let worst = cells.iter().map(|c| c.max_dev).filter(|d| !d.is_nan()).fold(0.0, f64::max);
            let degenerate = cells
                .iter()
                .filter(|c| c.status == commands::VerifyStatus::DegenerateOracleOnly)
                .count();
            eprintln!(
                "verified {} cells: max deviation {worst:e}, {degenerate} degenerate (oracle only), {} failing",
                cells.len(),
                failures.len()
            );
            for c in &failures {
                let pair = c.worst.map_or("-".to_string(), |p| p.to_string());
                eprintln!(
                    "FAIL {} alpha={} creg_inv={} pair {pair}: deviation {:e}",
                    c.task, c.alpha, c.creg_inv, c.max_dev
                );
            }
            return Ok(if failures.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Ranks(a) => commands::ranks(a, cli.format)?,
        Command::Predict(a) => commands::predict(a, cli.format)?,
        Command::PhaseDiagram(a) => commands::phase(a, cli.format)?,
        Command::Sweep(a) => commands::sweep(a, cli.format)?,
        Command::Curves(a) => commands::curves(a, cli.format)?,
        Command::Decompose(a) => commands::decompose(a, cli.format)?,
        Command::Features(a) => commands::features(a, cli.format)?,
        Command::Poker(p) => poker::run(p, cli.format)?,
    };
    write_output(cli, &bytes)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
