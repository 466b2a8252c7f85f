//! Command-line surface for the stress-detection toolkit.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 data or configuration,
//! 4 numeric failure.

mod commands;
mod config;
mod svg;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use stressdet::Error;

#[derive(Parser, Debug)]
#[command(
    name = "stressdet",
    version,
    about = "Stress classification from utterances: corpus building, training, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Filter a raw tweet stream into a weakly labeled corpus.
    BuildCorpus(commands::BuildCorpusArgs),
    /// Train a recurrent classifier, optionally pretrained on tweets.
    Train(commands::TrainArgs),
    /// Train the RBF-kernel SVM baseline on mean word vectors.
    TrainSvm(commands::TrainSvmArgs),
    /// Score a trained model on a labeled corpus.
    Evaluate(commands::EvaluateArgs),
    /// Classify utterances given on the command line.
    Predict(commands::PredictArgs),
    /// Show which tokens the attention layer weighted, optionally as SVG.
    Explain(commands::ExplainArgs),
    /// Generate synthetic tweets and a labeled target corpus for demos.
    SynthCorpus(commands::SynthCorpusArgs),
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 2,
        Error::Numeric(_) => 4,
        _ => 3,
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match &cli.command {
        Command::BuildCorpus(args) => commands::build_corpus(args),
        Command::Train(args) => commands::train(args),
        Command::TrainSvm(args) => commands::train_svm(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Predict(args) => commands::predict_cmd(args),
        Command::Explain(args) => commands::explain(args),
        Command::SynthCorpus(args) => commands::synth_corpus(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
