//! Most-frequent-class baseline.

use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, Scalar};

/// Predicts the training class-frequency distribution for every input;
/// the constant label is the most frequent class (ties resolve to the
/// lowest registry index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DummyModel<F> {
    frequencies: Vec<F>,
    label: usize,
}

pub fn train_dummy<F: Scalar>(y: &[usize], n_classes: usize) -> Result<DummyModel<F>> {
    if y.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    if n_classes == 0 {
        return Err(Error::invalid("need at least one class"));
    }
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        if c >= n_classes {
            return Err(Error::invalid(format!(
                "class index {c} out of range for {n_classes} classes"
            )));
        }
        counts[c] += 1;
    }
    let n = from_usize::<F>(y.len());
    let frequencies: Vec<F> = counts.iter().map(|&c| from_usize::<F>(c) / n).collect();
    let label = argmax(&frequencies);
    Ok(DummyModel { frequencies, label })
}

impl<F: Scalar> DummyModel<F> {
    pub fn label(&self) -> usize {
        self.label
    }

    pub fn n_classes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn predict_proba_row(&self) -> Vec<F> {
        self.frequencies.clone()
    }

    pub fn predict_proba_rows(&self, n: usize) -> Vec<Vec<F>> {
        vec![self.frequencies.clone(); n]
    }
}
