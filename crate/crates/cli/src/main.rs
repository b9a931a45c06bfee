//! `ipdp`: batch experiments over inner-product channels.
//!
//! Exit codes: `0` success, `1` I/O failure, `2` invalid configuration,
//! `3` violated precondition.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

mod checkpoint;
mod commands;
mod error;
mod params;
mod report;

use error::{CliError, CliResult};
use params::{Format, Params};

#[derive(Parser, Debug)]
#[command(
    name = "ipdp",
    version,
    about = "Reproducible experiments over inner-product channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify an inner-product estimator and reconstruct the hidden vector.
    Recon(RunArgs),
    /// Agreement and equality leakage of the quantised protocol.
    Ka(RunArgs),
    /// Min-entropy of condensed inner products of weak sources.
    Condense(RunArgs),
    /// Hash amplifier statistics and a decoding benchmark.
    Amplify(RunArgs),
    /// Privacy audit and attacker parameter search on a channel.
    Audit(RunArgs),
    /// Goldreich–Levin decoder recovery rate.
    Gl(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON config file keyed by flag name; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Self::Recon(a) => ("recon", a),
            Self::Ka(a) => ("ka", a),
            Self::Condense(a) => ("condense", a),
            Self::Amplify(a) => ("amplify", a),
            Self::Audit(a) => ("audit", a),
            Self::Gl(a) => ("gl", a),
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let (name, args) = cli.command.parts();
    let command = commands::find(name);
    let params = params::resolve(name, command.keys, args.config.as_deref(), &args.params)?;
    if let Some(threads) = params.threads {
        params::check(threads >= 1, || "--threads must be at least 1".into())?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let started = Instant::now();
    let report = (command.run)(&params)?;
    eprintln!("wall_time_s: {:.3}", started.elapsed().as_secs_f64());
    let format = params.format.unwrap_or(Format::Json);
    match &params.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            report.write(format, &mut w)?;
            w.flush().map_err(|e| CliError::io(path, e))
        }
        None => report.write(format, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
