use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spearfact::{MatrixKind, Population, DEFAULT_K_MAX};
use spearfact_cli::commands::{self, OutputFormat};
use spearfact_cli::{CliError, CliResult};

/// Factor-number estimation from rank-correlation spectra.
///
/// Exit codes: 0 success, 2 input or configuration error, 3 numerical failure.
#[derive(Parser)]
#[command(name = "spearfact", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    Midrank,
    Jitter,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Matrix {
    Spearman,
    Pearson,
    Covariance,
    Mkendall,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of factors of a CSV matrix (rows = observations).
    Estimate {
        input: PathBuf,
        /// sr, ne, ed, mktcr, act, a comma-separated list, or all.
        #[arg(long, default_value = "sr")]
        method: String,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
        #[arg(long, value_enum, default_value = "midrank")]
        ties: Ties,
        /// Seed for jittered tie breaking.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
        /// Treat rows as variables and columns as observations.
        #[arg(long)]
        transpose: bool,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the leading eigenvalues as CSV with header `index,eigenvalue`.
    Spectrum {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "spearman")]
        matrix: Matrix,
        /// Number of eigenvalues (default: all).
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, value_enum, default_value = "midrank")]
        ties: Ties,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        transpose: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a Monte Carlo scenario from a JSON config and write the frequency table.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Frequency table CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Full per-replication log as JSON.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Detectability of population spikes against a discrete bulk.
    Theory {
        /// Comma-separated spike values.
        #[arg(long, allow_hyphen_values = true)]
        spikes: String,
        /// Comma-separated `location:weight` atoms, or bare locations.
        #[arg(long, allow_hyphen_values = true)]
        bulk_atoms: String,
        /// Dimension-to-sample-size ratio.
        #[arg(long)]
        c: f64,
    },
    /// Monte Carlo estimate of the Spearman attenuation constant gamma.
    Gamma {
        #[arg(long)]
        population: String,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply FRED-MD transform codes and drop incomplete series.
    IngestFredmd {
        input: PathBuf,
        /// Output matrix CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn tie_policy(ties: Ties, seed: u64) -> spearfact::TiePolicy {
    match ties {
        Ties::Midrank => spearfact::TiePolicy::Midrank,
        Ties::Jitter => spearfact::TiePolicy::Jitter { seed },
    }
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::input(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Estimate { input, method, kmax, ties, seed, out, transpose, output } => {
            let methods = commands::parse_methods(&method)?;
            let report = commands::estimate(&input, &methods, kmax, tie_policy(ties, seed), transpose)?;
            let format = match out {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            let mut w = sink(output.as_deref())?;
            commands::write_estimate(&mut w, &report, format)?;
            w.flush()?;
        }
        Command::Spectrum { input, matrix, top, ties, seed, transpose, output } => {
            let kind = match matrix {
                Matrix::Spearman => MatrixKind::Spearman,
                Matrix::Pearson => MatrixKind::Pearson,
                Matrix::Covariance => MatrixKind::Covariance,
                Matrix::Mkendall => MatrixKind::Mkendall,
            };
            let values = commands::spectrum(&input, kind, top, tie_policy(ties, seed), transpose)?;
            let mut w = sink(output.as_deref())?;
            commands::write_spectrum(&mut w, &values)?;
            w.flush()?;
        }
        Command::Simulate { config, out, log, seed, threads } => {
            let table = match threads {
                Some(0) => return Err(CliError::input("--threads must be at least 1")),
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| CliError::input(format!("cannot start thread pool: {e}")))?
                    .install(|| commands::simulate(&config, seed))?,
                None => commands::simulate(&config, seed)?,
            };
            let mut w = sink(out.as_deref())?;
            commands::write_frequency_table(&mut w, &table)?;
            w.flush()?;
            if let Some(path) = log {
                let mut w = sink(Some(&path))?;
                commands::write_json(&mut w, &table)?;
                w.flush()?;
            }
        }
        Command::Theory { spikes, bulk_atoms, c } => {
            let report =
                commands::theory(commands::parse_spikes(&spikes)?, commands::parse_atoms(&bulk_atoms)?, c)?;
            let mut w = sink(None)?;
            commands::write_json(&mut w, &report)?;
            w.flush()?;
        }
        Command::Gamma { population, samples, seed } => {
            let population: Population = population.parse().map_err(CliError::Input)?;
            let report = commands::gamma(population, samples, seed)?;
            let mut w = sink(None)?;
            commands::write_json(&mut w, &report)?;
            w.flush()?;
        }
        Command::IngestFredmd { input, out } => {
            let mut w = sink(out.as_deref())?;
            commands::ingest(&input, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
