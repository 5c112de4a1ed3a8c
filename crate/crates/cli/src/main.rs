//! `narrclust`: ingest narrative chains, run role-constrained clustering,
//! evaluate clusters, and generate sampling artifacts.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Bad input or configuration; maps to exit code 1.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Parser)]
#[command(name = "narrclust", version, about = "Narrative schema induction by role-constrained k-means")]
struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true, env = "NARRCLUST_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CorpusArgs {
    /// Chain file (one JSON record per line).
    #[arg(long, env = "NARRCLUST_INPUT")]
    pub input: Option<PathBuf>,
    /// Domain tag recorded with the corpus.
    #[arg(long, env = "NARRCLUST_DOMAIN_TAG")]
    pub domain_tag: Option<String>,
    /// Directory receiving all output files.
    #[arg(long, env = "NARRCLUST_OUTPUT_DIR")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model artifact written by `cluster`.
    #[arg(long, env = "NARRCLUST_MODEL")]
    pub model: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit role-constrained k-means and write model.json.
    Cluster {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, env = "NARRCLUST_K")]
        k: Option<usize>,
        #[arg(long = "w-c", env = "NARRCLUST_W_C")]
        w_c: Option<f64>,
        #[arg(long, env = "NARRCLUST_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "NARRCLUST_TOL")]
        tol: Option<f64>,
        #[arg(long, env = "NARRCLUST_MAX_ITER")]
        max_iter: Option<usize>,
        /// L2-normalize embeddings before clustering.
        #[arg(long, env = "NARRCLUST_NORMALIZE", num_args = 0..=1, default_missing_value = "true")]
        normalize: Option<bool>,
        /// With --w-c 0, confirm the fit equals plain k-means.
        #[arg(long)]
        baseline_check: bool,
    },
    /// Purity at each fraction and, with frame labels, the frame probe.
    Evaluate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// Article frame labels (one `{doc_id, frames}` record per line).
        #[arg(long, env = "NARRCLUST_LABELS")]
        labels: Option<PathBuf>,
        /// Comma-separated top fractions, e.g. 1.0,0.25.
        #[arg(long, env = "NARRCLUST_FRACTIONS", value_delimiter = ',')]
        fractions: Option<Vec<f64>>,
        /// Divide role purity by chains mentioning the group instead of cluster size.
        #[arg(long)]
        support_denominator: bool,
        /// Seed for the probe's train/test split (defaults to the model seed).
        #[arg(long, env = "NARRCLUST_SPLIT_SEED")]
        split_seed: Option<u64>,
    },
    /// Fit and evaluate a grid of (K, w_c) settings over several seeds.
    Sweep {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, env = "NARRCLUST_LABELS")]
        labels: Option<PathBuf>,
        /// K from 50 to 500 in steps of 50, crossed with w_c in {0.01, 0.1}.
        #[arg(long, conflicts_with_all = ["k", "w_c"])]
        grid_default: bool,
        /// Comma-separated K values.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        /// Comma-separated constraint weights.
        #[arg(long = "w-c", value_delimiter = ',')]
        w_c: Option<Vec<f64>>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', env = "NARRCLUST_SEEDS")]
        seeds: Option<Vec<u64>>,
        #[arg(long, env = "NARRCLUST_TOL")]
        tol: Option<f64>,
        #[arg(long, env = "NARRCLUST_MAX_ITER")]
        max_iter: Option<usize>,
        #[arg(long, env = "NARRCLUST_NORMALIZE", num_args = 0..=1, default_missing_value = "true")]
        normalize: Option<bool>,
    },
    /// Schema-attribution bundles and a density-stratified cluster sample.
    Sample {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, env = "NARRCLUST_MAX_PER_CLUSTER")]
        max_per_cluster: Option<usize>,
        /// Clusters drawn from the densest quarter, middle half and sparsest quarter.
        #[arg(long, value_delimiter = ',', num_args = 3)]
        strata: Option<Vec<usize>>,
        #[arg(long, env = "NARRCLUST_SEED")]
        seed: Option<u64>,
    },
    /// Intrusion-test triples with an answer key.
    Intrusion {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, env = "NARRCLUST_PER_TIER")]
        per_tier: Option<usize>,
        #[arg(long, env = "NARRCLUST_JACCARD_MAX")]
        jaccard_max: Option<f64>,
        /// When no pair passes the Jaccard limit, use the two nearest chains.
        #[arg(long)]
        proximity_fallback: bool,
        #[arg(long, env = "NARRCLUST_SEED")]
        seed: Option<u64>,
    },
    /// Fill in missing embeddings from an embedding service.
    Embed {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Service URL accepting `{"texts": [...]}`.
        #[arg(long, env = "NARRCLUST_EMBEDDING_ENDPOINT")]
        endpoint: Option<String>,
        #[arg(long, env = "NARRCLUST_BATCH_SIZE")]
        batch_size: Option<usize>,
    },
    /// Group raw character mentions around seed phrases.
    Chars {
        /// Mentions, one per line.
        #[arg(long)]
        mentions: PathBuf,
        /// Seed phrases, one per line.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long, env = "NARRCLUST_CHARS_K")]
        k: Option<usize>,
        #[arg(long, env = "NARRCLUST_CHARS_SEED")]
        seed: Option<u64>,
        #[arg(long, env = "NARRCLUST_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
    },
    /// Check that artifacts are intact and all derive from the same model run.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Invalid>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<narrclust_core::Error>() {
            return if e.is_validation() { 1 } else { 2 };
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = config::FileConfig::load(cli.config.as_deref())
        .map_err(anyhow::Error::from)
        .and_then(|file| commands::run(cli.command, &file));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
