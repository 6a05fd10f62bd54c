//! `tscale`: time-scale calculus and bound verification from the command
//! line.
//!
//! Exit codes: 0 success, 1 bound violations found, 2 configuration or
//! I/O error, 3 domain, regressivity or overflow error.

mod calc;
mod converge;
mod descriptors;
mod error;
mod format;
mod verify_cmd;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tscale", version, about = "Time-scale calculus and bound verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Pointwise calculus on one scale; prints CSV to stdout.
    #[command(subcommand)]
    Calc(calc::CalcCmd),
    /// Run a verification scenario and write its reports.
    Verify { config: PathBuf },
    /// Mesh-refinement study on a dense mesh.
    Converge { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TSCALE_LOG", "error"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = match &cli.cmd {
        Cmd::Calc(c) => calc::run(c, &mut out).map(|()| true),
        Cmd::Verify { config } => verify_cmd::run(config, &mut out),
        Cmd::Converge { config } => converge::run(config, &mut out).map(|()| true),
    };
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    log::debug!("{e:?}");
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code())
}
