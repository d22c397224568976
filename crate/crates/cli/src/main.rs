//! `dialect` — train, evaluate, and ensemble dialect-identification
//! pipelines from the command line.
//!
//! Exit codes: 0 on success, 1 on filesystem failures, 2 on validation or
//! usage failures.

mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use dialect_core::augment::{balance_by_shuffle, AugmentationConfig};
use dialect_core::classifiers::argmax;
use dialect_core::container::{load_model, save_model};
use dialect_core::corpus::{
    corpus_stats, load_corpus, load_corpus_auto, save_corpus, LabelRegistry,
};
use dialect_core::embedding::load_embeddings;
use dialect_core::ensemble::{
    apply_lexicon_rules, argmax_labels, hard_vote, load_lexicon_rules,
    predictions_from_label_pairs, soft_vote,
};
use dialect_core::eval::{emit_confusion_csv, emit_report, evaluate, ReportFormat};
use dialect_core::pipeline::TrainedTextModel;
use dialect_core::probability::{load_probability_matrix, save_probability_matrix};
use dialect_core::{Embeddings, Error, Preds, ProbMatrix, Result};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "dialect",
    version,
    about = "Classical dialect-identification pipelines: training, prediction, ensembling, and shared-task evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VoteMode {
    Soft,
    Hard,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormatArg {
    Text,
    Csv,
    Json,
}

impl From<ReportFormatArg> for ReportFormat {
    fn from(v: ReportFormatArg) -> Self {
        match v {
            ReportFormatArg::Text => ReportFormat::Text,
            ReportFormatArg::Csv => ReportFormat::Csv,
            ReportFormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a model or pipeline and write a model container.
    Train {
        /// Label registry file (one label per line; order = class index).
        #[arg(long)]
        labels: PathBuf,
        /// Labeled training corpus TSV.
        #[arg(long)]
        train: PathBuf,
        /// Output path for the model container.
        #[arg(long)]
        model_out: PathBuf,
        /// Configuration file (`key = value` lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Model kind; overrides `model = ...` from the config file.
        #[arg(long)]
        model_kind: Option<String>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Word-embedding file for the embed-* kinds.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Additional `key=value` overrides.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Predict probabilities and labels for a corpus.
    Predict {
        /// Model container written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Label registry file; must match the one used at training time.
        #[arg(long)]
        labels: PathBuf,
        /// Corpus TSV to predict (labeled or unlabeled).
        #[arg(long)]
        input: PathBuf,
        /// Probability CSV output.
        #[arg(long)]
        probs_out: PathBuf,
        /// Predicted labels TSV output (`id<TAB>label`).
        #[arg(long)]
        labels_out: PathBuf,
        /// Word-embedding file (embed-* kinds; defaults to the path
        /// recorded at training time).
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Combine probability CSVs by soft or hard voting.
    Ensemble {
        #[arg(long, value_enum)]
        mode: VoteMode,
        #[arg(long)]
        labels: PathBuf,
        /// Combined probability CSV (soft: averaged rows; hard: vote
        /// shares).
        #[arg(long)]
        probs_out: Option<PathBuf>,
        /// Final labels TSV.
        #[arg(long)]
        labels_out: PathBuf,
        /// Input probability CSVs, one per system.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Score predicted labels against a gold corpus.
    Evaluate {
        /// Gold corpus TSV (labeled).
        #[arg(long)]
        gold: PathBuf,
        /// Predicted labels TSV (`id<TAB>label`).
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Write the full report here.
        #[arg(long)]
        report_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormatArg,
        /// Write the confusion matrix CSV here.
        #[arg(long)]
        confusion_out: Option<PathBuf>,
        /// Row-normalize the confusion matrix CSV.
        #[arg(long)]
        normalized: bool,
    },
    /// Balance a training corpus by shuffle augmentation.
    Augment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print per-class example counts.
    Stats {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Apply lexicon rules to predicted labels.
    Rules {
        /// Rules TSV (`token<TAB>label<TAB>priority`).
        #[arg(long)]
        rules: PathBuf,
        /// Corpus TSV the predictions refer to (provides the texts).
        #[arg(long)]
        input: PathBuf,
        /// Predicted labels TSV to post-process.
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Output labels TSV.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(if e.is_io() { 1 } else { 2 });
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train { labels, train, model_out, config, model_kind, seed, embeddings, set } => {
            cmd_train(&labels, &train, &model_out, config.as_deref(), model_kind, seed, embeddings, &set)
        }
        Command::Predict { model, labels, input, probs_out, labels_out, embeddings } => {
            cmd_predict(&model, &labels, &input, &probs_out, &labels_out, embeddings.as_deref())
        }
        Command::Ensemble { mode, labels, probs_out, labels_out, inputs } => {
            cmd_ensemble(mode, &labels, probs_out.as_deref(), &labels_out, &inputs)
        }
        Command::Evaluate { gold, pred, labels, report_out, format, confusion_out, normalized } => {
            cmd_evaluate(&gold, &pred, &labels, report_out.as_deref(), format.into(), confusion_out.as_deref(), normalized)
        }
        Command::Augment { input, labels, seed, out } => cmd_augment(&input, &labels, seed, &out),
        Command::Stats { input, labels } => cmd_stats(&input, &labels),
        Command::Rules { rules, input, pred, labels, out } => {
            cmd_rules(&rules, &input, &pred, &labels, &out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    labels: &Path,
    train: &Path,
    model_out: &Path,
    config: Option<&Path>,
    model_kind: Option<String>,
    seed: Option<u64>,
    embeddings: Option<PathBuf>,
    set: &[String],
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for pair in set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("--set expects key=value, found {pair:?}")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(kind) = model_kind {
        cfg.model_kind = Some(kind);
    }
    if let Some(seed) = seed {
        cfg.seed = Some(seed);
    }
    if let Some(path) = embeddings {
        cfg.embeddings = Some(path.to_string_lossy().into_owned());
    }

    let kind = cfg.model_kind.clone().ok_or_else(|| {
        Error::invalid("no model kind given: set `model = ...` in the config or pass --model-kind")
    })?;
    let registry = LabelRegistry::from_file(labels)?;
    let corpus = load_corpus(train, &registry, true)?;
    let opts = cfg.train_options(&kind)?;
    let table: Option<Embeddings> = match &cfg.embeddings {
        Some(path) => Some(load_embeddings(path)?),
        None => None,
    };

    let model = TrainedTextModel::train(&kind, &corpus, &opts, table.as_ref())?;
    let container = model.to_container(cfg.to_hyperparameters(&kind))?;
    save_model(&container, model_out)?;

    for (label, count) in registry.labels().iter().zip(corpus_stats(&corpus)?) {
        println!("{label}\t{count}");
    }
    Ok(())
}

fn cmd_predict(
    model_path: &Path,
    labels: &Path,
    input: &Path,
    probs_out: &Path,
    labels_out: &Path,
    embeddings: Option<&Path>,
) -> Result<()> {
    let registry = LabelRegistry::from_file(labels)?;
    let container = load_model(model_path)?;
    let model = TrainedTextModel::from_container(&container)?;
    if model.labels() != registry.labels() {
        return Err(Error::invalid(
            "label registry does not match the one the model was trained with",
        ));
    }
    let corpus = load_corpus_auto(input, &registry)?;

    let table: Option<Embeddings> = if model.kind().starts_with("embed-") {
        let path: PathBuf = match embeddings {
            Some(p) => p.to_path_buf(),
            None => container
                .hyperparameters
                .get("embeddings")
                .map(PathBuf::from)
                .ok_or_else(|| {
                    Error::invalid("this model needs --embeddings (no path recorded at training)")
                })?,
        };
        Some(load_embeddings(&path)?)
    } else {
        None
    };

    let probs = model.predict_proba(&corpus, table.as_ref())?;
    save_probability_matrix(&probs, probs_out)?;
    save_labels_tsv(&argmax_labels(&probs), labels_out)
}

fn cmd_ensemble(
    mode: VoteMode,
    labels: &Path,
    probs_out: Option<&Path>,
    labels_out: &Path,
    inputs: &[PathBuf],
) -> Result<()> {
    let registry = LabelRegistry::from_file(labels)?;
    let mats: Vec<ProbMatrix> = inputs
        .iter()
        .map(|p| load_probability_matrix(p, &registry))
        .collect::<Result<_>>()?;
    for m in &mats[1..] {
        if !mats[0].is_aligned_with(m) {
            return Err(Error::invalid("input matrices disagree on ids or label order"));
        }
    }
    let combined: ProbMatrix = match mode {
        VoteMode::Soft => soft_vote(&mats)?,
        VoteMode::Hard => {
            let votes: Vec<Vec<usize>> = mats
                .iter()
                .map(|m| m.rows().iter().map(|r| argmax(r)).collect())
                .collect();
            let winners = hard_vote(&votes, registry.len())?;
            let n_voters = votes.len() as f64;
            let rows: Vec<Vec<f64>> = (0..mats[0].n_rows())
                .map(|i| {
                    let mut counts = vec![0usize; registry.len()];
                    for v in &votes {
                        counts[v[i]] += 1;
                    }
                    counts.into_iter().map(|c| c as f64 / n_voters).collect()
                })
                .collect();
            let shares = ProbMatrix::new(
                mats[0].ids().to_vec(),
                registry.labels().to_vec(),
                rows,
            )?;
            // Consistency: argmax of a share row equals the hard-vote
            // winner under the shared lowest-index tie rule.
            debug_assert!(shares
                .rows()
                .iter()
                .zip(&winners)
                .all(|(r, &w)| argmax(r) == w));
            shares
        }
    };
    if let Some(path) = probs_out {
        save_probability_matrix(&combined, path)?;
    }
    save_labels_tsv(&argmax_labels(&combined), labels_out)
}

fn cmd_evaluate(
    gold: &Path,
    pred: &Path,
    labels: &Path,
    report_out: Option<&Path>,
    format: ReportFormat,
    confusion_out: Option<&Path>,
    normalized: bool,
) -> Result<()> {
    let registry = LabelRegistry::from_file(labels)?;
    let gold_corpus = load_corpus(gold, &registry, true)?;
    let pairs = load_labels_tsv(pred)?;
    let preds: Preds = predictions_from_label_pairs(&pairs, &registry)?;
    let report = evaluate(&gold_corpus, &preds)?;
    if let Some(path) = report_out {
        emit_report(&report, format, path)?;
    }
    if let Some(path) = confusion_out {
        emit_confusion_csv(&report.confusion, normalized, path)?;
    }
    println!(
        "accuracy={:.4} macro_f1={:.4} micro_f1={:.4}",
        report.accuracy, report.macro_f1, report.micro_f1
    );
    Ok(())
}

fn cmd_augment(input: &Path, labels: &Path, seed: u64, out: &Path) -> Result<()> {
    let registry = LabelRegistry::from_file(labels)?;
    let corpus = load_corpus(input, &registry, true)?;
    let balanced = balance_by_shuffle(&corpus, &AugmentationConfig::new(seed))?;
    save_corpus(&balanced, out)
}

fn cmd_stats(input: &Path, labels: &Path) -> Result<()> {
    let registry = LabelRegistry::from_file(labels)?;
    let corpus = load_corpus(input, &registry, true)?;
    for (label, count) in registry.labels().iter().zip(corpus_stats(&corpus)?) {
        println!("{label}\t{count}");
    }
    Ok(())
}

fn cmd_rules(rules: &Path, input: &Path, pred: &Path, labels: &Path, out: &Path) -> Result<()> {
    let registry = LabelRegistry::from_file(labels)?;
    let corpus = load_corpus_auto(input, &registry)?;
    let rules = load_lexicon_rules(rules, &registry)?;
    let pairs = load_labels_tsv(pred)?;
    let preds: Preds = predictions_from_label_pairs(&pairs, &registry)?;
    let overridden = apply_lexicon_rules(&preds, &rules, &corpus)?;
    save_labels_tsv(&overridden, out)
}

/// Read a headerless `id<TAB>label` TSV.
fn load_labels_tsv(path: &Path) -> Result<Vec<(String, String)>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            continue;
        }
        let (id, label) = line.split_once('\t').ok_or_else(|| {
            Error::parse(path, i + 1, format!("expected `id\\tlabel`, found {line:?}"))
        })?;
        out.push((id.to_string(), label.to_string()));
    }
    Ok(out)
}

fn save_labels_tsv(preds: &Preds, path: &Path) -> Result<()> {
    let mut out = String::new();
    for p in preds {
        out.push_str(&p.id);
        out.push('\t');
        out.push_str(&p.label);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
