//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data or
//! numeric error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cca::{cdmca_embed, DEFAULT_LAMBDA};
use crate::error::{Error, Result};
use crate::io::{load_embedding, save_embedding, save_kl_trace, save_roc, DatasetManifest};
use crate::metrics::{knn_metric, reconstruction_roc, variance_ratio, MetricKind, Scope};
use crate::model::{BetaWeights, EmbedConfig, NormMode};
use crate::pipeline::run_mrsne;
use crate::plot::{emit_scatter_svg, Labels};
use crate::relation::adaptive_betas;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

const UNREACHABLE_HINT: &str =
    "hint: set β₂=0 / --drop-domain2 for degenerate (e.g. one-hot) domains";

#[derive(Debug, Parser)]
#[command(
    name = "mrsne",
    version,
    about = "Joint 2-D maps of two linked domains"
)]
struct Cli {
    /// Worker threads, 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a joint embedding of both domains.
    Embed(EmbedArgs),
    /// Score an embedding against the cross graph.
    Evaluate(EvaluateArgs),
    /// Linear CCA baseline embedding.
    Cdmca(CdmcaArgs),
    /// Render a 2-D embedding as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Dataset manifest (TOML).
    #[arg(long)]
    data: PathBuf,
    /// Output embedding file.
    #[arg(long)]
    out: PathBuf,
    /// Target perplexity of the within-domain graphs. 30 is the usual
    /// t-SNE choice, not a tuned value.
    #[arg(long, default_value_t = 30.0)]
    perplexity: f64,
    /// Explicit block weights `b1,b2,b12`, normalized to sum 1.
    #[arg(long, value_delimiter = ',', num_args = 1, conflicts_with_all = ["adaptive_betas", "drop_domain2"])]
    betas: Option<Vec<f64>>,
    /// Weights proportional to the block sizes n1², n2², n1·n2. This is
    /// the default when --betas is absent.
    #[arg(long)]
    adaptive_betas: bool,
    /// Adaptive weights with β₂ = 0, for domains without useful geometry.
    #[arg(long)]
    drop_domain2: bool,
    /// Cross-graph normalization.
    #[arg(long, value_enum, default_value_t = NormArg::Unnorm)]
    norm_mode: NormArg,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    #[arg(long, default_value_t = 100.0)]
    lr: f64,
    #[arg(long, default_value_t = 0.5)]
    momentum: f64,
    /// Multiply the learning rate by 0.1 every this many iterations.
    #[arg(long, default_value_t = 400)]
    lr_decay_every: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-iteration objective here.
    #[arg(long)]
    kl_trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormArg {
    Unnorm,
    Norm,
    Pmi,
}

impl From<NormArg> for NormMode {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Unnorm => NormMode::Unnorm,
            NormArg::Norm => NormMode::Norm,
            NormArg::Pmi => NormMode::Pmi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    Across,
    Within,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    embedding: PathBuf,
    /// Write the ROC curve as `k fpr tpr` lines.
    #[arg(long)]
    roc_out: Option<PathBuf>,
    /// I = hit rate, II = mean positive count.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["I", "II"])]
    metrics: Vec<MetricArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["across", "within"])]
    scope: Vec<ScopeArg>,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10])]
    k: Vec<usize>,
}

#[derive(Debug, Args)]
struct CdmcaArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Ridge added to both covariance matrices.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    embedding: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Manifest whose label files name the items.
    #[arg(long)]
    labels: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::PerplexityUnreachable { .. }) {
                eprintln!("{UNREACHABLE_HINT}");
            }
            if matches!(e, Error::InvalidConfig(_)) {
                EXIT_USAGE
            } else {
                EXIT_DATA
            }
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Embed(a) => embed_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Cdmca(a) => cdmca_cmd(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn embed_cmd(a: EmbedArgs) -> Result<()> {
    let dataset = DatasetManifest::load(&a.data)?.load_dataset()?;
    let betas = match &a.betas {
        Some(b) if b.len() == 3 => BetaWeights::new(b[0], b[1], b[2])?,
        Some(b) => {
            return Err(Error::InvalidConfig(format!(
                "--betas takes 3 values, got {}",
                b.len()
            )))
        }
        None if !dataset.has_domain2() => BetaWeights::single_domain(),
        None => adaptive_betas(dataset.n1(), dataset.n2(), a.drop_domain2),
    };
    let config = EmbedConfig {
        perplexity: a.perplexity,
        dim: a.dim,
        betas,
        norm_mode: a.norm_mode.into(),
        iterations: a.iters,
        learning_rate: a.lr,
        momentum: a.momentum,
        lr_decay_every: a.lr_decay_every,
        seed: a.seed,
        ..Default::default()
    };
    let result = run_mrsne(&dataset, &config)?;
    save_embedding(&result.embedding, &a.out)?;
    if let Some(path) = &a.kl_trace {
        save_kl_trace(&result.kl_history, path)?;
    }
    if let Some(kl) = result.kl_history.last() {
        eprintln!("final kl={kl}");
    }
    Ok(())
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    let dataset = DatasetManifest::load(&a.data)?.load_dataset()?;
    let embedding = load_embedding(&a.embedding)?;
    let roc = reconstruction_roc(&embedding, &dataset)?;
    println!("auc={:.6}", roc.auc);
    println!("skipped_queries={}", roc.skipped_queries);
    if let Some(path) = &a.roc_out {
        save_roc(&roc, path)?;
    }
    println!("variance_ratio={:.6}", variance_ratio(&embedding)?);
    for &m in &a.metrics {
        let kind = match m {
            MetricArg::I => MetricKind::Hit,
            MetricArg::II => MetricKind::Count,
        };
        for &s in &a.scope {
            let scope = match s {
                ScopeArg::Across => Scope::Across,
                ScopeArg::Within => Scope::WithinImage,
            };
            for &k in &a.k {
                let v = knn_metric(&embedding, &dataset, k, kind, scope)?;
                let name = match m {
                    MetricArg::I => "I",
                    MetricArg::II => "II",
                };
                let scope_name = match s {
                    ScopeArg::Across => "across",
                    ScopeArg::Within => "within",
                };
                println!("metric_{name}_{scope_name}_k{k}={v:.6}");
            }
        }
    }
    Ok(())
}

fn cdmca_cmd(a: CdmcaArgs) -> Result<()> {
    let dataset = DatasetManifest::load(&a.data)?.load_dataset()?;
    let embedding = cdmca_embed(&dataset, a.dim, a.lambda)?;
    save_embedding(&embedding, &a.out)
}

fn plot_cmd(a: PlotArgs) -> Result<()> {
    let embedding = load_embedding(&a.embedding)?;
    let labels = match &a.labels {
        Some(path) => DatasetManifest::load(path)?.load_labels(embedding.n1(), embedding.n2())?,
        None => Labels::default(),
    };
    emit_scatter_svg(&embedding, &labels, &a.out)
}
