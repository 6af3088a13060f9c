//! Command-line entry point for the whole pipeline: corpus generation and
//! ingestion, training, explanation, queue curation, serving, simulation
//! and analysis.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub mod commands;
pub mod manifest;

pub use manifest::{hash_path, Artifact, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "newsxai", version, about = "Fake-news detection with explanations, and the study that evaluates them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic corpus with planted label signal
    Synth(SynthArgs),
    /// Ingest claim and article files into a corpus directory
    Ingest(IngestArgs),
    /// Split a corpus into train, validation and test stories
    Split(SplitArgs),
    /// Train the four detectors
    Train(TrainArgs),
    /// Evaluate trained detectors on one split
    Eval(EvalArgs),
    /// Precompute explanation bundles
    Explain(ExplainArgs),
    /// Curate the review queue and its extension pool
    Curate(CurateArgs),
    /// Serve the study API
    Serve(ServeArgs),
    /// Run scripted participants
    Simulate(SimulateArgs),
    /// Compute metrics and the statistical analysis
    Analyze(AnalyzeArgs),
    /// Run synth, split, train, eval, explain, curate, simulate and analyze
    Pipeline(PipelineArgs),
    /// Run the command recorded in a manifest again and compare outputs
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub stories: usize,
    #[arg(long, default_value_t = 3)]
    pub articles_per_story: usize,
    /// triggers or source-only
    #[arg(long, default_value = "triggers")]
    pub mode: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    #[arg(long)]
    pub claims: PathBuf,
    #[arg(long)]
    pub articles: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output split file; defaults to split.json beside the corpus directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub train: f64,
    #[arg(long, default_value_t = 0.1)]
    pub validation: f64,
    #[arg(long, default_value_t = 0.1)]
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON training config; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub hidden_size: Option<usize>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub min_frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long, default_value = "test")]
    pub part: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ExplainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
    /// train, validation, test, or held-out (validation and test)
    #[arg(long, default_value = "held-out")]
    pub part: String,
    #[arg(long, default_value_t = newsxai_models::explain::DEFAULT_HEATMAP_EPSILON)]
    pub epsilon: f64,
    /// Output bundle file (one JSON record per line)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CurateArgs {
    /// Corpus supplying ground-truth labels for the bundles
    #[arg(long, requires = "bundles", required_unless_present = "pool")]
    pub corpus: Option<PathBuf>,
    #[arg(long, requires = "corpus")]
    pub bundles: Option<PathBuf>,
    /// A ready pool (pool.json, or a directory holding one) instead of corpus and bundles
    #[arg(long, conflicts_with_all = ["corpus", "bundles"])]
    pub pool: Option<PathBuf>,
    #[arg(long, default_value_t = newsxai_study::queue::DEFAULT_QUEUE_LENGTH)]
    pub length: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Directory receiving queue.json and pool.json
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ServeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub bundles: PathBuf,
    #[arg(long)]
    pub queue: PathBuf,
    #[arg(long)]
    pub pool: PathBuf,
    /// Directory holding session logs
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: String,
    #[arg(long, default_value = "study")]
    pub study: String,
    /// Assign every session this condition instead of rotating
    #[arg(long)]
    pub condition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub queue: PathBuf,
    /// Pool used to extend queues that run out
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// A condition, or `all` to rotate over the five
    #[arg(long, default_value = "all")]
    pub condition: String,
    /// compliant, contrarian, independent or independent:<p>
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// JSON simulation config; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub skip_rate: Option<f64>,
    /// Directory receiving logs/ and metrics.jsonl
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    /// Directory of session logs
    #[arg(long, conflicts_with = "metrics", required_unless_present = "metrics")]
    pub logs: Option<PathBuf>,
    /// Metrics file (one record per line)
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[arg(long, default_value = "default")]
    pub plan: String,
    /// Exclude sessions shorter than this many minutes
    #[arg(long)]
    pub min_duration: Option<f64>,
    /// Directory receiving analysis.json and analysis.txt
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub workdir: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub stories: usize,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = newsxai_study::queue::DEFAULT_QUEUE_LENGTH)]
    pub queue_length: usize,
    #[arg(long, default_value = "independent:0.7")]
    pub policy: String,
    /// Simulated participants, rotated over the five conditions
    #[arg(long, default_value_t = 100)]
    pub participants: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Run a recorded pipeline in this directory instead of the original one
    #[arg(long)]
    pub workdir: Option<PathBuf>,
}
