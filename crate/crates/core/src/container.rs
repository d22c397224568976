//! Single-file trained-model envelope.
//!
//! The container is a RON document with a format version, a model kind, a
//! sorted hyperparameter map, a SHA-256 checksum, and the model payload as
//! a nested RON string. RON is used instead of JSON because trained Naive
//! Bayes models legitimately contain `-inf` log priors (classes absent
//! from training data). Serialization is deterministic, so save -> load
//! -> save reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Container format understood by this crate.
pub const FORMAT_VERSION: u32 = 1;

/// Model kinds a container may carry.
pub const KNOWN_MODEL_KINDS: &[&str] = &[
    "mnb",
    "bnb",
    "logreg",
    "knn",
    "dummy",
    "charlm",
    "embed-logreg",
    "embed-mlp",
    "safina",
    "mawdoo3",
    "just",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelContainer {
    pub format_version: u32,
    pub model_kind: String,
    pub hyperparameters: BTreeMap<String, String>,
    pub checksum: String,
    pub payload: String,
}

fn sha256_hex(data: &str) -> String {
    hex::encode(Sha256::digest(data.as_bytes()))
}

impl ModelContainer {
    /// Wrap a serialized payload, computing its checksum.
    pub fn seal(
        model_kind: impl Into<String>,
        hyperparameters: BTreeMap<String, String>,
        payload: String,
    ) -> Result<Self> {
        let model_kind = model_kind.into();
        if !KNOWN_MODEL_KINDS.contains(&model_kind.as_str()) {
            return Err(Error::invalid(format!("unknown model kind {model_kind}")));
        }
        Ok(ModelContainer {
            format_version: FORMAT_VERSION,
            model_kind,
            hyperparameters,
            checksum: sha256_hex(&payload),
            payload,
        })
    }

    /// Check version, kind, and payload checksum.
    pub fn verify(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported container format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if !KNOWN_MODEL_KINDS.contains(&self.model_kind.as_str()) {
            return Err(Error::invalid(format!(
                "unknown model kind {}",
                self.model_kind
            )));
        }
        let actual = sha256_hex(&self.payload);
        if actual != self.checksum {
            return Err(Error::invalid(format!(
                "payload checksum mismatch: container says {}, payload hashes to {actual}",
                self.checksum
            )));
        }
        Ok(())
    }
}

pub fn save_model(m: &ModelContainer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = ron::to_string(m).map_err(|e| Error::invalid(format!("serialize container: {e}")))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Load and [`ModelContainer::verify`] a container.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelContainer> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let container: ModelContainer = ron::from_str(&text)
        .map_err(|e| Error::parse(path, 1, format!("malformed container: {e}")))?;
    container.verify()?;
    Ok(container)
}
