//! `cavity`: limit constants, invariant suites and Monte Carlo tables.
//!
//! Exit status: 0 success, 2 a verification check failed, 3 a solver did not
//! converge, 4 invalid configuration.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, SimulateCommand};
use commands::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("cavity: {e}");
            return ExitCode::from(4);
        }
    }
    let (name, sink, result) = match &cli.command {
        Command::Beta(a) => {
            let sink = commands::beta_sink(a, &cli.output);
            let r = commands::beta(a, &sink);
            ("beta", sink, r)
        }
        Command::Verify(a) => {
            let sink = commands::verify_sink(a, &cli.output);
            let r = commands::verify(a, &sink);
            ("verify", sink, r)
        }
        Command::Simulate(SimulateCommand::ReplicaGap(a)) => {
            let sink = commands::gap_sink(&cli.output);
            let r = commands::replica_gap(a, &sink);
            ("simulate replica-gap", sink, r)
        }
        Command::Simulate(SimulateCommand::FiniteN(a)) => {
            let sink = commands::finite_sink(&cli.output);
            let r = commands::finite_n(a, &sink);
            ("simulate finite-n", sink, r)
        }
        Command::Simulate(SimulateCommand::Coupling(a)) => {
            let sink = commands::coupling_sink(&cli.output);
            let r = commands::coupling(a, &sink);
            ("simulate coupling", sink, r)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            commands::report_failure(&sink, name, &f);
            if let Failure::Verification = f {
                eprintln!("cavity {name}: verification failed");
            }
            ExitCode::from(f.code() as u8)
        }
    }
}
