mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Earth Mover's privacy for bags of words.
#[derive(Debug, Parser)]
#[command(name = "emdp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Release a private bag of words for each input document.
    Obfuscate(ObfuscateArgs),
    /// Earth Mover's distance between two preprocessed documents.
    Emd(EmdArgs),
    /// Draw raw noise vectors from the n-dimensional Laplacian.
    Sample(SampleArgs),
    /// Run the statistical property suite; exits 2 if any check fails.
    Verify(VerifyArgs),
    /// Correct-prediction counts on a synthetic corpus across a sweep of ε.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct VocabArgs {
    /// Embedding file in word2vec text format.
    #[arg(long)]
    embeddings: PathBuf,
    /// Keep only the first N vocabulary entries.
    #[arg(long, value_name = "N")]
    max_vocab: Option<usize>,
    /// Stopword list, one word per line (replaces the bundled list).
    #[arg(long, value_name = "PATH")]
    stopwords: Option<PathBuf>,
    /// Keep only the first N tokens of each document after stopword removal.
    #[arg(long, value_name = "N")]
    truncate: Option<usize>,
}

#[derive(Debug, Args)]
struct ObfuscateArgs {
    #[command(flatten)]
    vocab: VocabArgs,
    /// Per-word privacy parameter ε (> 0).
    #[arg(long)]
    epsilon: f64,
    /// Seed; drawn from the OS and echoed when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Input document (repeatable).
    #[arg(long = "input", value_name = "PATH", required = true)]
    inputs: Vec<PathBuf>,
    /// Report file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EmdArgs {
    #[command(flatten)]
    vocab: VocabArgs,
    #[arg(long, value_name = "PATH")]
    left: PathBuf,
    #[arg(long, value_name = "PATH")]
    right: PathBuf,
    /// Allow bags of different sizes.
    #[arg(long)]
    general: bool,
    /// Print the transport plan as JSON alongside the distance.
    #[arg(long)]
    plan: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    /// Dimension of the noise vectors.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Required: verification runs are always reproducible.
    #[arg(long)]
    seed: u64,
    /// Draws per distributional check.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Monte Carlo trials for the privacy-ratio and utility checks.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Corpus description as JSON; a 20-author, 8-dimensional corpus when absent.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',', default_values_t = [8.0, 4.0, 2.0, 1.0])]
    epsilons: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Neighbours for topic classification.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Subsampling rounds for n-gram attribution.
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    // clap reports usage errors with status 2, which is reserved here for
    // verification failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Obfuscate(a) => commands::obfuscate(a),
        Command::Emd(a) => commands::emd(a),
        Command::Sample(a) => commands::sample(a),
        Command::Verify(a) => commands::verify(a),
        Command::Eval(a) => commands::eval(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
