//! `cqrel`: exponent curves, simulations and self-checks from the command line.
//!
//! Exit codes: 0 success, 1 a check or certificate failed, 2 parse or usage
//! error, 3 invalid input state, 4 size guard exceeded, 5 I/O failure.

mod input;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cqrel::codes::{PrimeField, ToeplitzCodeSystem};
use cqrel::entropy::CQState;
use cqrel::exponents::{random_coding_bound, sphere_packing_bound, DEFAULT_CAP};
use cqrel::sim::{certify_affine_codes, dc_experiment, default_s_grid, pa_experiment, product_channel};
use rayon::prelude::*;

use input::{load_channel, parse_grid, Loaded};
use output::{curve_csv, curve_json, emit, json, CurvePoint};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("check failed: {0}")]
    Assertion(String),
    #[error("{0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{0}")]
    Guard(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Guard(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<cqrel::Error> for CliError {
    fn from(e: cqrel::Error) -> Self {
        use cqrel::Error as E;
        let msg = e.to_string();
        match e {
            E::GuardExceeded { .. } => CliError::Guard(msg),
            E::NotHermitian { .. }
            | E::NotPositive { .. }
            | E::BadTrace { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidShape { .. }
            | E::InvalidDistribution { .. } => CliError::Validation(msg),
            E::InvalidParameter(_) | E::InvalidOrder { .. } | E::AlphaIsOne | E::NotPrime { .. } => {
                CliError::Parse(msg)
            }
            _ => CliError::Assertion(msg),
        }
    }
}

#[derive(Parser)]
#[command(name = "cqrel", version, about = "Error exponents and entropic dualities for classical-quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Random-coding and sphere-packing exponents over a rate grid.
    Exponents {
        /// `bsc:p`, `pure2:c`, `depol-out:p`, or a JSON channel file.
        #[arg(long)]
        channel: String,
        /// `start:stop:step` (inclusive) or a comma list, in bits per use.
        #[arg(long, default_value = "0:1:0.05")]
        rates: String,
        /// Upper end of the sphere-packing search over `s`.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        s_max: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Duality relations and library invariants on seeded random instances.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Existence check for affine codes on `n` uses of a channel whose
    /// input alphabet is a prime field.
    Simulate {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        n: usize,
        /// The code carries `q^m` messages.
        #[arg(long)]
        m: usize,
        #[arg(long)]
        s_grid: Option<String>,
        /// Codes drawn when the family is too large to enumerate.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Privacy amplification with Toeplitz hashing of `n` copies to `k` symbols.
    Pa {
        /// Channel whose outputs are the side-information states `ρ_E^x`.
        #[arg(long)]
        state: String,
        /// Distribution of `X`; falls back to the file's prior, then uniform.
        #[arg(long)]
        prior: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        s_grid: Option<String>,
        /// Monte Carlo members when the family is too large to enumerate.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Source compression with quantum side information: `n` symbols to `n − k`.
    Dc {
        #[arg(long)]
        state: String,
        #[arg(long)]
        prior: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Seed of the random Toeplitz code.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CQREL_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Parse(format!("CQREL_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Parse(e.to_string()))
}

fn parse_prior(text: &str) -> Result<Vec<f64>, CliError> {
    let p = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Parse(format!("invalid prior {text:?}")))?;
    Ok(p)
}

fn cq_state(loaded: Loaded, prior: Option<&str>) -> Result<CQState, CliError> {
    let inputs = loaded.channel.inputs();
    let p = match prior {
        Some(t) => parse_prior(t)?,
        None => loaded.prior.unwrap_or_else(|| vec![1.0 / inputs as f64; inputs]),
    };
    Ok(loaded.channel.cq_state(&p)?)
}

fn grid_or_default(text: Option<&str>) -> Result<Vec<f64>, CliError> {
    text.map_or_else(|| Ok(default_s_grid()), parse_grid)
}

fn prime_alphabet(size: usize) -> Result<PrimeField, CliError> {
    PrimeField::new(size as u64)
        .map_err(|_| CliError::Parse(format!("input alphabet of size {size} is not a prime field")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Exponents {
            channel,
            rates,
            s_max,
            format,
            output,
        } => {
            let w = load_channel(&channel)?.channel;
            let rates = parse_grid(&rates)?;
            let points = rates
                .par_iter()
                .map(|&r| {
                    Ok(CurvePoint {
                        lower: random_coding_bound(&w, r)?,
                        upper: sphere_packing_bound(&w, r, s_max)?,
                    })
                })
                .collect::<Result<Vec<_>, cqrel::Error>>()?;
            let text = match format {
                Format::Csv => curve_csv(&points)?,
                Format::Json => curve_json(&points)?,
            };
            emit(&text, output.as_deref())
        }
        Command::Verify { seed, output } => {
            let records = verify::run(seed)?;
            emit(&json(&records)?, output.as_deref())?;
            let failed: Vec<&str> = records.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Assertion(format!("{} of {} checks: {}", failed.len(), records.len(), failed.join(", "))))
            }
        }
        Command::Simulate {
            channel,
            n,
            m,
            s_grid,
            samples,
            seed,
            output,
        } => {
            let w = load_channel(&channel)?.channel;
            let field = prime_alphabet(w.inputs())?;
            let grid = grid_or_default(s_grid.as_deref())?;
            let w_hat = product_channel(&w, n)?;
            let cert = certify_affine_codes(&w_hat, field.q(), n, m, &grid, samples, seed)?;
            emit(&json(&cert)?, output.as_deref())?;
            if cert.pass {
                Ok(())
            } else {
                Err(CliError::Assertion("no code met the bound".into()))
            }
        }
        Command::Pa {
            state,
            prior,
            n,
            k,
            s_grid,
            trials,
            seed,
            output,
        } => {
            let st = cq_state(load_channel(&state)?, prior.as_deref())?;
            let field = prime_alphabet(st.alphabet_size())?;
            let grid = grid_or_default(s_grid.as_deref())?;
            let r = pa_experiment(&st, field.q(), n, k, &grid, trials, seed)?;
            emit(&json(&r)?, output.as_deref())?;
            if r.pass {
                Ok(())
            } else {
                Err(CliError::Assertion("average extractor quality exceeds the bound".into()))
            }
        }
        Command::Dc {
            state,
            prior,
            n,
            k,
            seed,
            output,
        } => {
            let st = cq_state(load_channel(&state)?, prior.as_deref())?;
            let field = prime_alphabet(st.alphabet_size())?;
            let code = ToeplitzCodeSystem::random(field, n, k, seed)?;
            let r = dc_experiment(&st, &code)?;
            emit(&json(&r)?, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cqrel: {e}");
            ExitCode::from(e.code())
        }
    }
}
