//! `nevl`: corpus handling, metric scoring, contrastive evaluation,
//! synthetic data generation and the reference-free classifier.
//!
//! Exit codes: 0 success, 1 operational or input error, 2 findings under
//! `--strict`.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{classifier, corpus, eval, score, synth};
use config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "nevl", version, about = "Evaluate gender-neutral translation")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Log verbosity (-v info, -vv debug); RUST_LOG also applies.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate, describe and build benchmark corpora.
    #[command(subcommand)]
    Corpus(corpus::CorpusCmd),
    /// Reference-based contrastive evaluation.
    #[command(subcommand)]
    Eval(eval::EvalCmd),
    /// Score hypotheses against references with any of the metrics.
    Score(score::ScoreArgs),
    /// Synthetic training data.
    #[command(subcommand)]
    Synth(synth::SynthCmd),
    /// Train and apply the gendered/neutral classifier.
    #[command(subcommand)]
    Classifier(classifier::ClassifierCmd),
}

/// What a successful command found; errors travel as `anyhow::Error`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    /// Findings were reported and `--strict` was given.
    StrictFindings,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Corpus(c) => corpus::run(c, &file),
        Command::Eval(c) => eval::run(c, &file),
        Command::Score(a) => score::run(a, &file),
        Command::Synth(c) => synth::run(c, &file),
        Command::Classifier(c) => classifier::run(c, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are input errors (1); exit code 2 is reserved
            // for strict findings.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(Outcome::Clean)) => ExitCode::SUCCESS,
        Ok(Ok(Outcome::StrictFindings)) => ExitCode::from(2),
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
