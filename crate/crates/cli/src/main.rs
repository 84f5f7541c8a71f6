use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod cache;
mod commands;
mod render;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "thetalab",
    version,
    about = "Pilot degrees, log-volumes and theta data for elliptic curves"
)]
pub struct Cli {
    /// Scenario file (JSON, schema 1).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// p-adic digits printed by `tate` (overrides the scenario).
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Bits of the interval enclosures (overrides the scenario).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Starting exponent of the Ind3 monoid orbit (overrides the scenario).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(0..=1))]
    n0: Option<u32>,
    /// Require procession automorphisms to commute with the inclusions.
    #[arg(long, global = true)]
    strict_processions: bool,
    /// Series cache directory; THETALAB_CACHE is used when absent.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Invariants, minimal model and reduction table.
    CurveInfo,
    /// Tate parameter and s4, s6 digits at each multiplicative place of S.
    Tate,
    /// Pre-theta and initial theta data validation.
    ThetaData,
    /// The q-pilot and theta-pilot divisors and their degrees.
    Pilots,
    /// ln ν̄ of a region descriptor file.
    Volume {
        /// Region file (JSON, schema 1).
        #[arg(long)]
        region: PathBuf,
    },
    /// Automorphism counts and the indeterminacy bound regions.
    Indet,
    /// The pilot inequality with a full configuration echo.
    Inequality,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(commands::run(&cli))
}
