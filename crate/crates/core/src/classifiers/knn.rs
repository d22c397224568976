//! K-nearest-neighbours over cosine similarity.

use serde::{Deserialize, Serialize};

use super::check_sparse_training_set;
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::scalar::{from_usize, Scalar};

/// Memorized training set; prediction votes among the `k` most similar
/// training vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel<F> {
    xs: Vec<SparseVector<F>>,
    norms: Vec<F>,
    y: Vec<usize>,
    k: usize,
    n_classes: usize,
}

pub fn train_knn<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    n_classes: usize,
    k: usize,
) -> Result<KnnModel<F>> {
    check_sparse_training_set(xs, y, n_classes)?;
    if k < 1 || k > xs.len() {
        return Err(Error::invalid(format!(
            "k = {k} outside 1..={} training examples",
            xs.len()
        )));
    }
    Ok(KnnModel {
        xs: xs.to_vec(),
        norms: xs.iter().map(SparseVector::l2_norm).collect(),
        y: y.to_vec(),
        k,
        n_classes,
    })
}

impl<F: Scalar> KnnModel<F> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Class probability = votes among the `k` nearest / `k`. Similarity
    /// ties break toward the lower training-example index; a zero query
    /// vector falls back to uniform probabilities.
    pub fn predict_proba_row(&self, x: &SparseVector<F>) -> Vec<F> {
        let query_norm = x.l2_norm();
        if query_norm == F::zero() {
            return vec![F::one() / from_usize::<F>(self.n_classes); self.n_classes];
        }
        let mut sims: Vec<(F, usize)> = self
            .xs
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(i, (t, &norm))| {
                let sim = if norm == F::zero() {
                    F::zero()
                } else {
                    x.dot(t) / (query_norm * norm)
                };
                (sim, i)
            })
            .collect();
        // Descending similarity; the stable sort keeps equal similarities
        // in index order.
        sims.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite similarities"));
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in sims.iter().take(self.k) {
            votes[self.y[i]] += 1;
        }
        let k = from_usize::<F>(self.k);
        votes.into_iter().map(|v| from_usize::<F>(v) / k).collect()
    }

    pub fn predict_proba_rows(&self, xs: &[SparseVector<F>]) -> Vec<Vec<F>> {
        xs.iter().map(|x| self.predict_proba_row(x)).collect()
    }
}
