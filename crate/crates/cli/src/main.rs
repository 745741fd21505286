//! `chunkens`: train chunkers, combine their outputs, bracket nested NPs
//! and score the results.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 internal
//! invariant violation.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

mod commands;
mod settings;

use settings::{CascadeKnobs, CombineKnobs, Common, LearnerKnobs, ReportKnobs, SystemKnobs};

#[derive(Debug, Parser)]
#[command(
    name = "chunkens",
    version,
    about = "Shallow-parsing ensembles and NP bracketing"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Word, POS and chunk tag columns.
    Conll,
    /// Word, POS and bracket columns; converts to base chunks.
    Nested,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a chunk file between tag schemes, or nested brackets to base chunks.
    #[command(args_override_self = true)]
    Convert {
        #[arg(long)]
        input: PathBuf,
        /// Output file [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = InputFormat::Conll)]
        from: InputFormat,
        /// Target scheme.
        #[arg(long, default_value = "iob2")]
        to: chunkens::corpus::TagScheme,
        /// Fold B-X into I-X after conversion.
        #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        io: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Train the POS-lookup baseline, tag the test file and report.
    #[command(args_override_self = true)]
    Baseline {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Tagged test output [default: none]
        #[arg(long)]
        output: Option<PathBuf>,
        /// Output encoding (iob or io).
        #[arg(long, default_value = "iob")]
        encoding: chunkens::learners::OutputEncoding,
        #[command(flatten)]
        report: ReportKnobs,
        #[command(flatten)]
        common: Common,
    },
    /// Train one chunker and save the model.
    #[command(args_override_self = true)]
    Train {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// baseline, knn, igtree, maxent or rules.
        #[arg(long, default_value = "igtree")]
        learner: String,
        #[command(flatten)]
        knobs: LearnerKnobs,
        #[command(flatten)]
        common: Common,
    },
    /// Tag a 2- or 3-column file with a saved model.
    #[command(args_override_self = true)]
    Tag {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Output file [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Score predicted chunks against gold chunks.
    #[command(args_override_self = true)]
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Both files hold nested brackets.
        #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        nested: bool,
        #[command(flatten)]
        report: ReportKnobs,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate base systems on training data into a tuning table.
    #[command(name = "cv-tune", args_override_self = true)]
    CvTune {
        #[arg(long)]
        train: PathBuf,
        /// Output table [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        systems: SystemKnobs,
        #[command(flatten)]
        common: Common,
    },
    /// Train base systems on all training data and tag the test file into a table.
    #[command(args_override_self = true)]
    Table {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Output table [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        systems: SystemKnobs,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate voting weights from a tuning table.
    #[command(args_override_self = true)]
    Weights {
        #[arg(long)]
        tuning: PathBuf,
        /// Output file [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Combine the systems of a prediction table into one chunk file.
    #[command(args_override_self = true)]
    Combine {
        /// Table to combine.
        #[arg(long)]
        table: PathBuf,
        /// Tuning table with gold tags [default: none]
        #[arg(long)]
        tuning: Option<PathBuf>,
        /// Saved voting weights, instead of a tuning table [default: none]
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output file [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        combine: CombineKnobs,
        #[command(flatten)]
        report: ReportKnobs,
        #[command(flatten)]
        common: Common,
    },
    /// Pick the best subset of systems for majority voting.
    #[command(name = "best-n", args_override_self = true)]
    BestN {
        #[arg(long)]
        tuning: PathBuf,
        /// Subset size.
        #[arg(long, default_value_t = 3)]
        best_n: usize,
        #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        bracket_level: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Train a chunker cascade on nested brackets and bracket the test file.
    #[command(args_override_self = true)]
    Cascade {
        /// Nested bracket training file.
        #[arg(long)]
        train: PathBuf,
        /// Nested bracket test file; its brackets are used for scoring.
        #[arg(long)]
        test: PathBuf,
        /// Output file [default: stdout]
        #[arg(long)]
        output: Option<PathBuf>,
        /// Folds for the tuning table of trained combiners.
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        cascade: CascadeKnobs,
        #[command(flatten)]
        systems: SystemKnobs,
        #[command(flatten)]
        combine: CombineKnobs,
        #[command(flatten)]
        report: ReportKnobs,
        #[command(flatten)]
        common: Common,
    },
    /// Score every system and every combination method on a test table.
    #[command(args_override_self = true)]
    Report {
        #[arg(long)]
        tuning: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Subset size of the best-N method.
        #[arg(long, default_value_t = 3)]
        best_n: usize,
        #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        bracket_level: bool,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        common: Common,
    },
}

/// A problem with the invocation rather than the data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use chunkens::error::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Config(_) => 1,
                E::Contract(_) => 3,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    3
}

fn run(args: Vec<OsString>) -> anyhow::Result<()> {
    let args = settings::expand_args(args)?;
    let matches = Cli::command().try_get_matches_from(args)?;
    let cli = Cli::from_arg_matches(&matches)?;
    commands::dispatch(cli.command)
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(e) = err.downcast_ref::<clap::Error>() {
                let _ = e.print();
                return match e.kind() {
                    clap::error::ErrorKind::DisplayHelp
                    | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                    _ => ExitCode::from(1),
                };
            }
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
