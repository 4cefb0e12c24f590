//! Config-driven experiment runner for the `qmn` library.
//!
//! Three subcommands share one JSON configuration:
//!
//! * `measure` computes the quasimeasure of an ensemble read from CSV;
//! * `axioms` runs the randomized axiom suite;
//! * `hammerstein` checks the hypotheses of a Hammerstein problem, solves
//!   for its fixed point and certifies the comparison inequalities along an
//!   ensemble iteration.
//!
//! Exit codes: 0 success, 1 certified failure, 2 validation error,
//! 3 numerical failure. Outputs are deterministic for a given config and
//! seed.

pub mod commands;
pub mod config;
pub mod ensemble_csv;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_axioms, cmd_hammerstein, cmd_measure, Outcome};
pub use config::{ExperimentConfig, Format};
pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "qmn", version, about = "Quasimeasure of noncompactness experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quasimeasure of an ensemble stored as CSV.
    Measure {
        #[command(flatten)]
        common: CommonArgs,
        /// Ensemble file (header row, grid parameter row, one row per member).
        #[arg(long, value_name = "PATH")]
        ensemble: PathBuf,
    },
    /// Randomized axiom suite.
    Axioms {
        #[command(flatten)]
        common: CommonArgs,
        /// Run the suite against a deliberately non-monotone functional.
        #[arg(long)]
        adversarial: bool,
    },
    /// Hypothesis checks, fixed-point solve and Darbo certificate.
    Hammerstein {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration; defaults apply to every missing key.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, used instead of `output.directory`; it is a run
    /// location and does not alter the config embedded in the outputs.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed, overriding `suite.seed`.
    #[arg(long, value_name = "INT")]
    pub seed: Option<u64>,
    /// Output formats, overriding `output.formats`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl CommonArgs {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf, Format), CliError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.suite.seed = seed;
        }
        if let Some(format) = self.format {
            config.output.formats = format;
        }
        let out = self.out.clone().unwrap_or_else(|| config.output.directory.clone());
        let format = config.output.formats;
        Ok((config, out, format))
    }
}

/// Runs one command line and returns the process exit code. Messages go to
/// stdout, errors to stderr.
pub fn run<I, S>(args: I) -> u8
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::VALIDATION
            } else {
                exit::SUCCESS
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Measure { common, ensemble } => {
            let (config, out, format) = common.load()?;
            cmd_measure(&config, ensemble, &out, format)
        }
        Command::Axioms { common, adversarial } => {
            let (config, out, format) = common.load()?;
            cmd_axioms(&config, *adversarial, &out, format)
        }
        Command::Hammerstein { common } => {
            let (config, out, format) = common.load()?;
            cmd_hammerstein(&config, &out, format)
        }
    }
}
