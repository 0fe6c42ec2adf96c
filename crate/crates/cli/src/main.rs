//! `themealign`: annotate, train, decode and evaluate thematic alignments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::HyperFlags;

#[derive(Debug, Parser)]
#[command(name = "themealign", version, about = "Thematic segment alignment of comparable documents")]
struct Cli {
    /// key = value file overriding built-in defaults; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scope {
    Paragraph,
    Document,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Solver {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Method {
    /// tf-idf over concepts
    Concepts,
    /// Word translation table
    Translation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DocMode {
    Words,
    Concepts,
    /// Document-specific w-topic words of a trained model
    Topic,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replace lexicon mentions with disambiguated concept ids
    Annotate {
        #[arg(long)]
        corpus: PathBuf,
        /// surface<TAB>concept<TAB>prior lines
        #[arg(long)]
        lexicon: PathBuf,
        /// concept concept weight lines
        #[arg(long)]
        relations: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "paragraph")]
        scope: Scope,
        #[arg(long, value_enum, default_value = "exact")]
        solver: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the two samplers and write a model file
    Train {
        #[arg(long)]
        corpus: PathBuf,
        /// Second-language corpus trained jointly with the first
        #[arg(long)]
        corpus2: Option<PathBuf>,
        #[arg(long)]
        relations: Option<PathBuf>,
        #[command(flatten)]
        hyper: HyperFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Viterbi topic sequences, one JSON line per document
    Decode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        corpus2: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Precision and recall of decoded topics against paragraph headings
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        corpus2: Option<PathBuf>,
        /// Output of `decode`
        #[arg(long)]
        assignments: PathBuf,
        /// source<TAB>target heading translations
        #[arg(long)]
        headings: Option<PathBuf>,
        /// Value of the K column
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-language paragraph pairing baselines
    Baseline {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        corpus2: PathBuf,
        #[arg(long, value_enum, default_value = "concepts")]
        method: Method,
        /// src<TAB>tgt<TAB>prob lines
        #[arg(long)]
        ttable: Option<PathBuf>,
        /// Minimum similarity of a pair [default: 0.5]
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        headings: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Document, paragraph and vocabulary counts
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        corpus2: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export background, theme and per-document word distributions
    Lm {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pair documents across two corpora
    AlignDocs {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        corpus2: PathBuf,
        #[arg(long, value_enum, default_value = "concepts")]
        mode: DocMode,
        /// Model trained on both corpora, for `--mode topic`
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        top_n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut settings = config::Settings::resolve(cli.config.as_deref())?;
    if cli.threads.is_some() {
        settings.threads = cli.threads;
    }
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    use commands as c;
    match cli.command {
        Command::Annotate { corpus, lexicon, relations, scope, solver, out } => {
            c::annotate(&corpus, &lexicon, relations.as_deref(), scope, solver, out.as_deref())
        }
        Command::Train { corpus, corpus2, relations, hyper, out } => {
            settings.apply_flags(&hyper);
            c::train(&corpus, corpus2.as_deref(), relations.as_deref(), &settings, &out)
        }
        Command::Decode { model, corpus, corpus2, out } => c::decode(&model, &corpus, corpus2.as_deref(), out.as_deref()),
        Command::Eval { corpus, corpus2, assignments, headings, k, format, out } => c::eval(
            &corpus,
            corpus2.as_deref(),
            &assignments,
            headings.as_deref(),
            k,
            format,
            out.as_deref(),
        ),
        Command::Baseline { corpus, corpus2, method, ttable, threshold, headings, format, out } => c::baseline(
            &corpus,
            &corpus2,
            method,
            ttable.as_deref(),
            threshold.unwrap_or(settings.threshold),
            headings.as_deref(),
            format,
            out.as_deref(),
        ),
        Command::Stats { corpus, corpus2, out } => c::stats(&corpus, corpus2.as_deref(), out.as_deref()),
        Command::Lm { model, top_n, out } => c::lm(&model, top_n.unwrap_or(settings.top_n), out.as_deref()),
        Command::AlignDocs { corpus, corpus2, mode, model, top_n, out } => c::align_docs(
            &corpus,
            &corpus2,
            mode,
            model.as_deref(),
            top_n.unwrap_or(settings.top_n),
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
