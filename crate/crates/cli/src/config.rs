//! Run configuration: a `key = value` file plus command-line overrides.
//!
//! Unknown keys are rejected so a typo cannot silently fall back to a
//! default. The seed is mandatory for the stochastic kinds (anything that
//! shuffles, folds, or initializes weights randomly); fully deterministic
//! kinds may omit it.

use std::collections::BTreeMap;
use std::path::Path;

use dialect_core::classifiers::MlpConfig;
use dialect_core::pipeline::TrainOptions;
use dialect_core::{Config, Error, Result};

/// Kinds whose training consumes randomness.
const STOCHASTIC_KINDS: &[&str] = &["logreg", "embed-logreg", "embed-mlp", "mawdoo3", "just"];

const KNOWN_KEYS: &[&str] = &[
    "model",
    "seed",
    "alpha",
    "lambda",
    "step",
    "epochs",
    "batch_size",
    "k",
    "order",
    "word_min_df",
    "char_min_df",
    "hidden",
    "dropout",
    "mlp_step",
    "mlp_epochs",
    "charlm_duplicate",
    "embeddings",
];

/// Parsed configuration; starts from toolkit defaults.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub model_kind: Option<String>,
    pub seed: Option<u64>,
    pub embeddings: Option<String>,
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parse a config file: one `key = value` per line, `#` comments.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::default();
        for (i, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(path, i + 1, format!("expected `key = value`, found {line:?}"))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::invalid(format!(
                "unknown configuration key {key} (known: {})",
                KNOWN_KEYS.join(", ")
            )));
        }
        match key {
            "model" => self.model_kind = Some(value.to_string()),
            "seed" => {
                let parsed: u64 = value
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad seed {value:?}")))?;
                self.seed = Some(parsed);
            }
            "embeddings" => self.embeddings = Some(value.to_string()),
            _ => {
                self.entries.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }

    fn parse_into<T: std::str::FromStr>(&self, key: &str, target: &mut T) -> Result<()> {
        if let Some(raw) = self.entries.get(key) {
            *target = raw
                .parse()
                .map_err(|_| Error::invalid(format!("bad value {raw:?} for key {key}")))?;
        }
        Ok(())
    }

    /// Materialize training options, enforcing the seed rule for the
    /// given model kind.
    pub fn train_options(&self, kind: &str) -> Result<TrainOptions> {
        if STOCHASTIC_KINDS.contains(&kind) && self.seed.is_none() {
            return Err(Error::invalid(format!(
                "model kind {kind} is stochastic: a seed is required (set `seed = ...`)"
            )));
        }
        let mut pipeline = Config { seed: self.seed.unwrap_or(0), ..Default::default() };
        self.parse_into("alpha", &mut pipeline.alpha)?;
        self.parse_into("lambda", &mut pipeline.lambda)?;
        self.parse_into("step", &mut pipeline.step)?;
        self.parse_into("epochs", &mut pipeline.epochs)?;
        self.parse_into("batch_size", &mut pipeline.batch_size)?;
        self.parse_into("k", &mut pipeline.knn_k)?;
        self.parse_into("order", &mut pipeline.lm_order)?;
        self.parse_into("word_min_df", &mut pipeline.word_min_df)?;
        self.parse_into("char_min_df", &mut pipeline.char_min_df)?;

        let mut mlp = MlpConfig::<f64> { seed: pipeline.seed, ..Default::default() };
        self.parse_into("hidden", &mut mlp.hidden)?;
        self.parse_into("dropout", &mut mlp.dropout)?;
        self.parse_into("mlp_step", &mut mlp.step)?;
        self.parse_into("mlp_epochs", &mut mlp.epochs)?;
        self.parse_into("batch_size", &mut mlp.batch_size)?;

        let mut charlm_duplicate = false;
        self.parse_into("charlm_duplicate", &mut charlm_duplicate)?;

        Ok(TrainOptions { pipeline, mlp, charlm_duplicate })
    }

    /// The informational hyperparameter map recorded in model containers.
    pub fn to_hyperparameters(&self, kind: &str) -> BTreeMap<String, String> {
        let mut out = self.entries.clone();
        out.insert("model".into(), kind.to_string());
        if let Some(seed) = self.seed {
            out.insert("seed".into(), seed.to_string());
        }
        if let Some(e) = &self.embeddings {
            out.insert("embeddings".into(), e.clone());
        }
        out
    }
}
