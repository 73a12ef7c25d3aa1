use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use qrank::experiment::synth::{write_fold_tree, SynthConfig};
use qrank::experiment::{
    emit_report, evaluate_dataset, normalize_per_query, run_experiment, score_records, Collection,
    ExperimentConfig, ReportFormat,
};
use qrank::letor::{self, locate_folds};
use qrank::metrics::{MetricConfig, QueryMetrics};
use qrank::train::{fit, SavedModel, TrainConfig};
use qrank::{validate_dataset, Dataset, ModelKind, OrdinalScale};

#[derive(Parser)]
#[command(name = "qrank", version, about = "Linear ranking with per-query intercepts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on one LETOR file.
    Train {
        input: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one w·Φ score per input line.
    Score {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean metrics over the queries of one file.
    Eval {
        input: PathBuf,
        /// Score file aligned with the input lines.
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        scores: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        metrics: MetricArgs,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Five-fold train/test protocol over a LETOR fold tree.
    Experiment {
        root: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
        #[command(flatten)]
        metrics: MetricArgs,
        #[arg(long)]
        normalize: bool,
        /// Baseline rows to attach: OHSUMED, TD2003 or TD2004 (inferred from the path if omitted).
        #[arg(long)]
        collection: Option<String>,
        /// Directory for per-fold score files (default: next to --out, or the current directory).
        #[arg(long)]
        score_dir: Option<PathBuf>,
        #[arg(long, default_value = "markdown")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic Fold1..Fold5 tree drawn from the model.
    Synth {
        #[arg(long, default_value = "binary")]
        model_kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 20)]
        per_query: usize,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        intercept_spread: f64,
        /// Shift each query's features by this multiple of its intercept along a random direction.
        #[arg(long, default_value_t = 0.0)]
        query_shift: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FitArgs {
    /// binary, trinary, trinary-alt or no-intercept (inferred from labels if omitted).
    #[arg(long)]
    model_kind: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    l2: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl FitArgs {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            l2_penalty: self.l2,
            grad_tolerance: self.tol,
            max_iterations: self.max_iter,
            ..TrainConfig::default()
        }
    }

    fn kind_or(&self, scale: impl FnOnce() -> Result<OrdinalScale>) -> Result<ModelKind> {
        match &self.model_kind {
            Some(kind) => Ok(kind.parse()?),
            None => Ok(match scale()? {
                OrdinalScale::TRINARY => ModelKind::TrinaryCascade,
                _ => ModelKind::Binary,
            }),
        }
    }
}

#[derive(Args)]
struct MetricArgs {
    /// Comma-separated cutoffs.
    #[arg(long, default_value = "1,2,3,4,5,6,7,8,9,10", value_delimiter = ',')]
    cutoffs: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    relevance_threshold: u8,
}

impl MetricArgs {
    fn config(&self) -> MetricConfig {
        MetricConfig {
            cutoffs: self.cutoffs.clone(),
            relevance_threshold: self.relevance_threshold,
        }
    }
}

fn load(path: &Path, scale: Option<OrdinalScale>, normalize: bool) -> Result<Dataset> {
    let records = letor::parse_file(path)?;
    let dataset = validate_dataset(records, scale).with_context(|| path.display().to_string())?;
    Ok(if normalize { normalize_per_query(&dataset)? } else { dataset })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| path.display().to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn metrics_table(config: &MetricConfig, mean: &QueryMetrics, format: ReportFormat) -> String {
    let mut rows: Vec<(String, f64)> = Vec::new();
    for (c, v) in config.cutoffs.iter().zip(&mean.ndcg_at) {
        rows.push((format!("NDCG@{c}"), *v));
    }
    for (c, v) in config.cutoffs.iter().zip(&mean.precision_at) {
        rows.push((format!("P@{c}"), *v));
    }
    rows.push(("MAP".into(), mean.average_precision));
    let mut out = match format {
        ReportFormat::Csv => "metric,value\n".to_string(),
        ReportFormat::Markdown => "| metric | value |\n|---|---|\n".to_string(),
    };
    for (name, value) in rows {
        out.push_str(&match format {
            ReportFormat::Csv => format!("{name},{value:.6}\n"),
            ReportFormat::Markdown => format!("| {name} | {value:.6} |\n"),
        });
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { input, fit: args, normalize, out } => {
            let records = letor::parse_file(&input)?;
            let probe = validate_dataset(records, None).with_context(|| input.display().to_string())?;
            let kind = args.kind_or(|| Ok(probe.scale()))?;
            let dataset = validate_dataset(probe.into_records(), Some(kind.scale()))?;
            let dataset = if normalize { normalize_per_query(&dataset)? } else { dataset };
            let config = args.train_config();
            let result = fit(&dataset, kind, &config)?;
            if !result.converged {
                eprintln!(
                    "warning: fit stopped after {} iterations without converging",
                    result.iterations
                );
            }
            SavedModel { kind, params: result.params, config }.save(&out)?;
            eprintln!(
                "{kind}: {} queries, {} records, final objective {} after {} iterations",
                dataset.n_queries(),
                dataset.len(),
                result.final_nll,
                result.iterations
            );
        }
        Command::Score { input, model, normalize, out } => {
            let model = SavedModel::load(&model)?;
            let dataset = load(&input, None, normalize)?;
            let scores = score_records(&model.params, dataset.records())?;
            letor::write_scores(dataset.records(), &scores, &out)?;
        }
        Command::Eval { input, scores, model, normalize, metrics, format, out } => {
            let format: ReportFormat = format.parse()?;
            let dataset = load(&input, None, normalize)?;
            let scores = match (scores, model) {
                (Some(path), _) => letor::read_scores(&path)?,
                (None, Some(path)) => score_records(&SavedModel::load(&path)?.params, dataset.records())?,
                (None, None) => bail!("either --scores or --model is required"),
            };
            let config = metrics.config();
            config.validate(dataset.scale())?;
            let per_query = evaluate_dataset(&dataset, &scores, &config)?;
            let all: Vec<QueryMetrics> = per_query.into_iter().map(|(_, m)| m).collect();
            let mean = QueryMetrics::mean(&all).expect("dataset is non-empty");
            write_output(out.as_deref(), &metrics_table(&config, &mean, format))?;
        }
        Command::Experiment { root, fit: args, metrics, normalize, collection, score_dir, format, out } => {
            let format: ReportFormat = format.parse()?;
            let kind = args.kind_or(|| {
                let first = &locate_folds(&root)?[0];
                Ok(validate_dataset(letor::parse_file(&first.train_path)?, None)?.scale())
            })?;
            let collection = match collection {
                Some(name) => Some(name.parse::<Collection>()?),
                None => Collection::infer_from_path(&root),
            };
            let score_dir = score_dir.unwrap_or_else(|| match out.as_deref().and_then(Path::parent) {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            });
            fs::create_dir_all(&score_dir).with_context(|| score_dir.display().to_string())?;
            let config = ExperimentConfig {
                train_config: args.train_config(),
                metric_config: metrics.config(),
                normalize_features: normalize,
                score_dir: Some(score_dir),
                collection,
                ..ExperimentConfig::new(root, kind)
            };
            let report = run_experiment(&config)?;
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            write_output(out.as_deref(), &emit_report(&report, format)?)?;
        }
        Command::Synth { model_kind, seed, queries, per_query, k, intercept_spread, query_shift, out } => {
            let config = SynthConfig {
                intercept_spread,
                query_shift,
                ..SynthConfig::new(queries, per_query, k, model_kind.parse()?, seed)
            };
            write_fold_tree(&out, &config)?;
        }
    }
    Ok(())
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
