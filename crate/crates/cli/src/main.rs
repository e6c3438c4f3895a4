//! `silverner`: build silver fine-grained NER datasets and evaluate against them.
//!
//! Each subcommand reads its inputs, writes its outputs into `--out`, and
//! leaves a `config.json` snapshot of the resolved arguments beside them.

mod commands;
mod failure;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "silverner",
    version,
    about = "Silver NER corpus construction and evaluation"
)]
struct Cli {
    /// Root seed; each stage derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Validate a lexicon and write its normalized form.
    IngestLexicon(commands::IngestLexicon),
    /// Relaxed gazetteer matching of lexicon aliases over a corpus.
    Match(commands::Match),
    /// Train per-type context filters on a held-out share of matched paragraphs.
    TrainFilters(commands::TrainFilters),
    /// Score raw matches with trained filters.
    ApplyFilters(commands::ApplyFilters),
    /// Match, filter and select paragraphs into a silver dataset.
    Assemble(commands::Assemble),
    /// Stratified paragraph split and train/test type split.
    Split(commands::SplitCmd),
    /// Type-stratified paragraph sample.
    Sample(commands::Sample),
    /// Write an audit worksheet, or score a judged one.
    Audit(commands::Audit),
    /// Build a BM25 inverted index.
    Index(commands::Index),
    /// Exhaustive BM25 ranking for each query.
    RetrieveBm25(commands::RetrieveBm25),
    /// Exhaustive cosine ranking over precomputed vectors.
    RetrieveDense(commands::RetrieveDense),
    /// Recall@|REL| of ranked runs over the test types.
    EvalRetrieval(commands::EvalRetrieval),
    /// Exact and relaxed span P/R/F1 of predictions.
    EvalNer(commands::EvalNer),
    /// Share of paragraphs lacking a type that still receive predictions of it.
    FpRate(commands::FpRate),
    /// Generate a seeded synthetic corpus with lexicon, link graph and vectors.
    GenSynthetic(commands::GenSynthetic),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return failure::report_usage(&e),
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return failure::report(&anyhow::anyhow!(e));
        }
    }
    match commands::run(&cli.command, cli.seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => failure::report(&e),
    }
}
