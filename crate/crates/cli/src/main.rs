//! `ballapprox` — exact Diophantine approximation by rationals drawn from a
//! ball at one place of Q and measured at another.
//!
//! Every invocation writes a run directory (`config.json`, `data.csv`,
//! `report.json`, extra tables, and finally `manifest.json` with SHA-256
//! digests of everything else).  Exit codes: 0 success, 2 usage, 3 budget,
//! 4 precision, 5 identity failure.

mod args;
mod commands;
mod outdir;

use clap::Parser;

use crate::args::{Cli, Command, ExperimentCommand};

fn main() {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: cannot size the worker pool: {e}");
            std::process::exit(2);
        }
    }
    let out = cli.out.as_deref();
    let result = match &cli.command {
        Command::Enumerate(a) => commands::enumerate(a, out),
        Command::Moments(a) => commands::moments(a, out),
        Command::Experiment(ExperimentCommand::Dichotomy(a)) => commands::dichotomy(a, out),
        Command::Experiment(ExperimentCommand::PaleyZygmund(a)) => commands::paley_zygmund(a, out),
        Command::Experiment(ExperimentCommand::Dimension(a)) => commands::dimension(a, out),
        Command::Experiment(ExperimentCommand::TranslatePartition(a)) => {
            commands::translate_partition(a, out)
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
