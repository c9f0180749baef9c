//! `epsclass`: reproducible class group experiments from the command line.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::Format;

#[derive(Debug, Parser, Serialize)]
#[command(name = "epsclass", version, about = "Class group, torsion and bound experiments")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Neg,
    Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stat {
    /// `h / (2^(N-1) (√|D|)^ε)`.
    Genus,
    /// `h / (√|D|)^ε`.
    Raw,
    /// `log h_p / log √|D|` at new maxima of `h_p`.
    Pexp,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Primes `≡ 1 (mod p)` with the two analytic inequalities.
    Primes {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Class groups of every fundamental discriminant in a range.
    QuadScan {
        #[arg(long, default_value_t = 3)]
        min_d: u64,
        #[arg(long)]
        max_d: u64,
        #[arg(long, value_enum, default_value = "neg")]
        sign: Sign,
    },
    /// Successive maxima of a class number statistic over `D < 0`.
    QuadMaxima {
        #[arg(long, value_enum)]
        stat: Stat,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        min_d: u64,
        #[arg(long)]
        max_d: u64,
        /// Add envelope columns for `(√|D|)^ε` with this `ε`.
        #[arg(long)]
        envelope: Option<f64>,
    },
    /// Cyclic cubic fields of one conductor or of all conductors up to a bound.
    CubicEnum {
        #[arg(long)]
        f: Option<u128>,
        #[arg(long)]
        max_f: Option<u64>,
    },
    /// Validate printed class group tables.
    CubicValidate {
        /// A table file or a directory of them.
        #[arg(long)]
        fixtures: PathBuf,
    },
    /// Filtration of a module given by relations and `σ`, or of the 2-part
    /// of a quadratic class group.
    FiltrationRun {
        #[arg(long)]
        p: Option<u64>,
        /// Rows separated by `;`, entries by `,`.
        #[arg(long, allow_hyphen_values = true)]
        relations: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        sigma: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Radicand of a quadratic field instead of a presentation.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i128>,
    },
    /// Distribution of `Δ` over synthesized modules.
    FiltrationMc {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_log_order: u32,
    },
    /// Torsion scan over imaginary fields.
    TorScan {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        min_d: u64,
        #[arg(long)]
        max_d: u64,
        /// One row per field with the full torsion group instead of maxima.
        #[arg(long)]
        all: bool,
        #[arg(long)]
        envelope: Option<f64>,
    },
    /// Torsion groups along `±3·5·7⋯`.
    TorFamily {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long)]
        count: usize,
    },
    /// The 2-rank reflection identity for imaginary fields.
    ReflectionCheck {
        #[arg(long, default_value_t = 3)]
        min_d: u64,
        #[arg(long)]
        max_d: u64,
    },
    /// Fields `Q(√-m)` from `a^2 + m b^2 = 4 q^(p^ρ)`.
    NormicSearch {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        rho: u32,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        a_min: u128,
        #[arg(long)]
        a_max: Option<u128>,
    },
    /// `X(N)`, `X0(N)`, the lower bound and the maximum `N0`.
    Bounds {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        o1: f64,
        /// An integer, or `max` for `(p-2)(N-1)`.
        #[arg(long, default_value = "0")]
        delta: String,
        #[arg(long, default_value_t = 10.0)]
        c_p: f64,
        /// Values of `N`; powers of ten up to `10^18` by default.
        #[arg(long, value_delimiter = ',')]
        n: Vec<f64>,
    },
    /// Parse and validate every fixture file under a directory.
    FixturesCheck {
        #[arg(long, default_value = "fixtures")]
        dir: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Primes { .. } => "primes",
            Command::QuadScan { .. } => "quad-scan",
            Command::QuadMaxima { .. } => "quad-maxima",
            Command::CubicEnum { .. } => "cubic-enum",
            Command::CubicValidate { .. } => "cubic-validate",
            Command::FiltrationRun { .. } => "filtration-run",
            Command::FiltrationMc { .. } => "filtration-mc",
            Command::TorScan { .. } => "tor-scan",
            Command::TorFamily { .. } => "tor-family",
            Command::ReflectionCheck { .. } => "reflection-check",
            Command::NormicSearch { .. } => "normic-search",
            Command::Bounds { .. } => "bounds",
            Command::FixturesCheck { .. } => "fixtures-check",
        }
    }
}

/// How a command failed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Compute(epsclass::Error),
    Io(std::io::Error),
}

impl From<epsclass::Error> for Failure {
    fn from(e: epsclass::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
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
    let config = serde_json::to_value(&cli).expect("config serializes");
    let result = commands::run(&cli).and_then(|outcome| -> Result<commands::Outcome, Failure> {
        let mut sink: Box<dyn Write> = match &cli.output {
            Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
            None => Box::new(std::io::stdout().lock()),
        };
        output::write_table(&mut sink, cli.format, cli.command.name(), &config, &outcome.table)?;
        sink.flush()?;
        Ok(outcome)
    });
    match result {
        Ok(o) if o.budget => ExitCode::from(3),
        Ok(o) if o.ok => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 3 } else { 1 })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
