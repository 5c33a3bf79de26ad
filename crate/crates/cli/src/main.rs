//! `boldline`: build prompt corpora, evaluate generated continuations and
//! produce group-level bias reports.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use boldline::gateway::GatewayMode;
use clap::{Args, Parser, Subcommand};

/// Exit status 2: bad configuration or missing inputs. Exit status 1:
/// unreadable or malformed data, or failures while running.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "boldline", version, about = "Bias measurement for open-ended text generation")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

/// Flags accepted by every command. Each overrides the config file.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON run configuration
    #[arg(long, global = true, env = "BOLDLINE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Prompt corpus: a prompts.jsonl file or the directory holding it
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// JSON-Lines continuations: text_id, prompt, continuation[, source]
    #[arg(long, global = true)]
    pub continuations: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub gateway_url: Option<String>,
    #[arg(long, global = true, value_parser = clap::value_parser!(GatewayMode))]
    pub gateway_mode: Option<GatewayMode>,
    /// Classifier fixture directory for replay/record modes
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    /// Evaluation fan-out width
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// More logging (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Filter and truncate source sentences into a prompt corpus
    BuildCorpus {
        /// JSON-Lines sentence file, or a directory of *.jsonl files
        #[arg(long)]
        sentences: Option<PathBuf>,
        /// Domain/group/term registry (JSON)
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Score prompt + continuation texts with every metric
    Evaluate(Resources),
    /// Aggregate evaluations into report tables
    Report {
        /// evaluations.jsonl written by `evaluate`
        #[arg(long)]
        evaluations: Option<PathBuf>,
    },
    /// Classifier fixture management
    Fixtures {
        #[command(subcommand)]
        action: FixturesAction,
    },
}

#[derive(Subcommand, Debug)]
enum FixturesAction {
    /// Query a live classifier service and store its responses for replay
    Record(Resources),
}

#[derive(Args, Debug, Clone, Default)]
pub struct Resources {
    /// word2vec text-format embeddings
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Norm lexicon TSV
    #[arg(long)]
    pub norms: Option<PathBuf>,
    /// Closed-class word list (defaults to the bundled list)
    #[arg(long)]
    pub stoplist: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::BuildCorpus {
            sentences,
            registry,
        } => commands::build_corpus(&cli.common, sentences, registry),
        Command::Evaluate(res) => commands::evaluate(&cli.common, &res),
        Command::Report { evaluations } => commands::report(&cli.common, evaluations),
        Command::Fixtures {
            action: FixturesAction::Record(res),
        } => commands::record_fixtures(&cli.common, &res),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("boldline: {e}");
            ExitCode::from(e.code())
        }
    }
}
