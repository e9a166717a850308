//! `coreset-kit <experiment> --seed N [flags]`
//!
//! Exit status: 0 when every budget check passes, 1 when one fails, 2 on
//! usage or input errors.

mod config;
mod data;
mod experiments;
mod report;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, ExperimentConfig};

fn usage_error(e: &anyhow::Error) -> bool {
    use coreset_kit::Error;
    e.downcast_ref::<config::UsageError>().is_some()
        || e.downcast_ref::<std::io::Error>().is_some()
        || matches!(
            e.downcast_ref::<Error>(),
            Some(
                Error::Io(_)
                    | Error::Parse { .. }
                    | Error::InvalidInput(_)
                    | Error::UnknownName(_)
                    | Error::DimensionMismatch(_)
            )
        )
}

fn init_threads() {
    if let Some(n) = std::env::var("CORESET_KIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // only fails when a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_threads();
    if cli.command == "list" {
        for (name, exp) in experiments::registry() {
            println!("{name:<20} {}", exp.about());
        }
        return ExitCode::SUCCESS;
    }
    let run = || -> anyhow::Result<bool> {
        let cfg = ExperimentConfig::from_cli(&cli)?;
        let exp = experiments::lookup(&cfg.command)?;
        let outcome = exp.run(&cfg)?;
        let pass = outcome.pass;
        report::write(&cfg, outcome)?;
        Ok(pass)
    };
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}
