//! `qexpect`: command-line front end for the quantum expectation models.

mod commands;
mod format;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "qexpect", version, about = "Quantum-probability models of investor expectations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Born-rule distribution of the configured state over an observable.
    Born { config: PathBuf },
    /// Outcome probabilities after unitary evolution, optionally on a time grid.
    Evolve {
        config: PathBuf,
        /// Evolution time (overrides `evolve.t`).
        #[arg(long, allow_negative_numbers = true)]
        t: Option<f64>,
        /// Number of evenly spaced samples on [0, t].
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Direct probability, classical total-probability sum and interference term.
    Interference { config: PathBuf },
    /// Sequential joint tables in both orders and the largest order gap.
    OrderEffect { config: PathBuf },
    /// Standard deviations and the Robertson lower bound.
    Uncertainty { config: PathBuf },
    /// Empirical outcome frequencies of a seeded agent ensemble.
    Ensemble {
        config: PathBuf,
        /// Number of agents (overrides `ensemble.count`).
        #[arg(long)]
        n: Option<usize>,
        /// RNG seed (overrides `ensemble.seed`).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the trading loop and print the price path as CSV.
    SimulateMarket {
        config: PathBuf,
        /// RNG seed (overrides `market.seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a JSON run report that can be replayed as a config.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

fn run(command: Command) -> Result<String, CliError> {
    match command {
        Command::Born { config } => commands::born(&config),
        Command::Evolve { config, t, grid } => commands::evolve(&config, t, grid),
        Command::Interference { config } => commands::interference(&config),
        Command::OrderEffect { config } => commands::order_effect(&config),
        Command::Uncertainty { config } => commands::uncertainty(&config),
        Command::Ensemble { config, n, seed } => commands::ensemble(&config, n, seed),
        Command::SimulateMarket { config, seed, out, report } => {
            let output = commands::simulate_market(&config, seed)?;
            if let Some(path) = report {
                write_file(&path, &output.report_json)?;
            }
            match out {
                Some(path) => {
                    write_file(&path, &output.csv)?;
                    Ok(String::new())
                }
                None => Ok(output.csv),
            }
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("QEXPECT_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("QEXPECT_THREADS must be a positive integer, got {raw:?}"))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let pool = match thread_pool() {
        Ok(pool) => pool,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = pool.install(|| run(cli.command));
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(text) => {
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            if let CliError::Halted { partial_csv, .. } = &err {
                let _ = stdout.write_all(partial_csv.as_bytes());
                let _ = stdout.flush();
            }
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
