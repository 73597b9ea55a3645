//! `matextract` command-line tool.
//!
//! Exit status is 0 on success, 1 when a command fails at run time and 2 for
//! usage errors. Undecodable completions are reported, not treated as
//! failures.

mod commands;
mod io;

use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matextract::records::SchemaId;

#[derive(Parser)]
#[command(name = "matextract", version, about = "Entity and relation extraction from materials-science text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode records (one JSON structure per line) as completions.
    Encode(EncodeArgs),
    /// Decode completions and report which ones do not decode.
    Decode(DecodeArgs),
    /// Score predicted completions against true ones.
    Score(ScoreArgs),
    /// Run prompts through a completion backend and decode the outputs.
    Extract(ExtractArgs),
    /// Write a fine-tuning file from prompt/completion pairs.
    DatasetBuild(DatasetBuildArgs),
    /// Keep abstracts that match a keyword configuration.
    DatasetFilter(DatasetFilterArgs),
    /// Split pairs into seeded train and test sets.
    Split(SplitArgs),
    /// Turn completions into node-link graph files.
    GraphExport(GraphExportArgs),
    /// Graph commands.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Plan a learning-curve experiment.
    CurvePlan(CurvePlanArgs),
    /// Run the annotation service.
    AnnotateServe(ServeArgs),
    /// Annotation commands.
    #[command(subcommand)]
    Annotate(AnnotateCommand),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Same as `graph-export`.
    Export(GraphExportArgs),
}

#[derive(Subcommand)]
enum AnnotateCommand {
    /// Same as `annotate-serve`.
    Serve(ServeArgs),
}

#[derive(Args)]
pub struct Common {
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable JSON output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct EncodeArgs {
    #[arg(long)]
    schema: SchemaId,
    /// JSON lines, one records structure per line. Doping schemas also
    /// take the doping JSON object (`hosts`, `dopants`, `hosts2dopants`).
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct DecodeArgs {
    #[arg(long)]
    schema: SchemaId,
    /// Completion file.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MofRootArg {
    Name,
    MofFormula,
}

#[derive(Args)]
pub struct ScoreArgs {
    #[arg(long)]
    schema: SchemaId,
    /// Completion file of true completions.
    #[arg(long)]
    gold: PathBuf,
    /// Completion file of predictions, line-aligned with the gold file.
    #[arg(long)]
    pred: PathBuf,
    /// Entity-count bin edges of the sequence report.
    #[arg(long, value_delimiter = ',', default_value = "1,6,11")]
    bins: Vec<usize>,
    /// Root entity of metal-organic framework relations.
    #[arg(long, value_enum, default_value = "name")]
    mof_root: MofRootArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Replay,
    Live,
    None,
}

#[derive(Args)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value = "replay")]
    backend: BackendKind,
    /// Replay store (JSON lines of prompt hash and completion).
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Completions endpoint of the live backend.
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name sent to the live backend.
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the live backend's API key.
    #[arg(long, default_value = "MATEXTRACT_API_KEY")]
    api_key_env: String,
}

#[derive(Args)]
pub struct ExtractArgs {
    #[arg(long)]
    schema: SchemaId,
    /// Prompt file, same line conventions as completion files.
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct DatasetBuildArgs {
    /// JSON lines of `{"prompt", "completion", "schema"}`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Also write a fine-tuning job description here.
    #[arg(long)]
    job: Option<PathBuf>,
    /// Base model named in the job description.
    #[arg(long, default_value = "davinci")]
    base_model: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct DatasetFilterArgs {
    /// JSON lines of `{"id", "title", "abstract"}`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Built-in keyword set: doping, general or mof.
    #[arg(long, conflicts_with = "keywords", required_unless_present = "keywords")]
    task: Option<String>,
    /// Keyword configuration file.
    #[arg(long)]
    keywords: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    test_fraction: f64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct GraphExportArgs {
    #[arg(long)]
    schema: SchemaId,
    /// Completion file; each decodable line becomes one graph.
    #[arg(long = "in")]
    input: PathBuf,
    /// Write `<prefix>-<line>.json` files here instead of JSON lines to the
    /// output.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Document id prefix.
    #[arg(long, default_value = "doc")]
    prefix: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct CurvePlanArgs {
    /// Training set sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Event journal; the service restores its state from it.
    #[arg(long)]
    journal: PathBuf,
    /// Snapshot every this many journal events (0 disables).
    #[arg(long, default_value_t = 500)]
    snapshot_every: usize,
    #[command(flatten)]
    backend: BackendArgs,
    /// Tag reports group pre-filled annotations by.
    #[arg(long, default_value = "intermediate")]
    model_tag: String,
    /// Require `Authorization: Bearer <token>`; read from this environment
    /// variable when set.
    #[arg(long)]
    token_env: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Encode(a) => commands::encode(a),
        Command::Decode(a) => commands::decode(a),
        Command::Score(a) => commands::score(a),
        Command::Extract(a) => commands::extract(a),
        Command::DatasetBuild(a) => commands::dataset_build(a),
        Command::DatasetFilter(a) => commands::dataset_filter(a),
        Command::Split(a) => commands::split(a),
        Command::GraphExport(a) | Command::Graph(GraphCommand::Export(a)) => commands::graph_export(a),
        Command::CurvePlan(a) => commands::curve_plan(a),
        Command::AnnotateServe(a) | Command::Annotate(AnnotateCommand::Serve(a)) => commands::annotate_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
