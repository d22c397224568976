//! Base learners.
//!
//! Every classifier trains on feature vectors plus class indices
//! (`0..n_classes`, registry order) and predicts one probability row per
//! example; rows are non-negative and sum to 1. Assembling rows into a
//! [`crate::probability::ProbabilityMatrix`] (attaching ids and label
//! strings) happens at the pipeline layer.

mod charlm;
mod dummy;
mod knn;
mod linear;
mod mlp;
mod nb;

pub use charlm::{train_charlm, ClassConditionalLm, BOS_SYMBOL, UNK_SYMBOL};
pub use dummy::{train_dummy, DummyModel};
pub use knn::{train_knn, KnnModel};
pub use linear::{
    cross_entropy_loss_grad, hinge_loss_grad, train_linear, LinearConfig, LinearLoss, LinearModel,
};
pub use mlp::{mlp_loss_grad, train_mlp, MlpConfig, MlpModel};
pub use nb::{train_nb, train_nb_ovr, NbKind, NbModel, NbOvrModel};

use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::scalar::{from_usize, Scalar};

/// Index of the row maximum; ties resolve to the lowest index.
pub fn argmax<F: Scalar>(row: &[F]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Turn per-class log scores into a probability row in place.
///
/// `-inf` scores map to probability 0; if every score is `-inf` the row
/// falls back to uniform.
pub(crate) fn softmax_in_place<F: Scalar>(scores: &mut [F]) {
    let max = scores
        .iter()
        .fold(F::neg_infinity(), |acc, &v| if v > acc { v } else { acc });
    if max == F::neg_infinity() {
        let uniform = F::one() / from_usize::<F>(scores.len());
        scores.iter_mut().for_each(|s| *s = uniform);
        return;
    }
    let mut total = F::zero();
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}

/// Common training-input validation for sparse-feature learners.
pub(crate) fn check_sparse_training_set<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    n_classes: usize,
) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    if xs.len() != y.len() {
        return Err(Error::invalid(format!(
            "{} feature vectors but {} labels",
            xs.len(),
            y.len()
        )));
    }
    if n_classes == 0 {
        return Err(Error::invalid("need at least one class"));
    }
    let dim = xs[0].dim();
    for x in xs {
        if x.dim() != dim {
            return Err(Error::invalid("inconsistent feature dimensions"));
        }
        if x.has_non_finite() {
            return Err(Error::invalid("non-finite feature value"));
        }
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::invalid(format!(
            "class index {bad} out of range for {n_classes} classes"
        )));
    }
    Ok(dim)
}
