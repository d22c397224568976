//! Multinomial and Bernoulli Naive Bayes, plus a one-vs-rest wrapper.

use serde::{Deserialize, Serialize};

use super::{check_sparse_training_set, softmax_in_place};
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::scalar::{from_usize, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NbKind {
    Multinomial,
    Bernoulli,
}

/// Trained Naive Bayes parameters.
///
/// For the multinomial kind, `log_likelihood[c][f]` is
/// `ln((count(f,c) + alpha) / (total(c) + alpha * V))` over feature
/// weights. For the Bernoulli kind it is the log presence probability
/// `ln((docs(f,c) + alpha) / (docs(c) + 2 alpha))`; documents binarize as
/// `weight > 0`. Priors are unsmoothed class frequencies, so a class with
/// no training examples keeps probability zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel<F> {
    kind: NbKind,
    alpha: F,
    log_prior: Vec<F>,
    log_likelihood: Vec<Vec<F>>,
    n_features: usize,
}

pub fn train_nb<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    n_classes: usize,
    kind: NbKind,
    alpha: F,
) -> Result<NbModel<F>> {
    let dim = check_sparse_training_set(xs, y, n_classes)?;
    if !alpha.is_finite() || alpha <= F::zero() {
        return Err(Error::invalid("smoothing alpha must be > 0"));
    }
    if kind == NbKind::Multinomial {
        for x in xs {
            if x.entries().iter().any(|&(_, w)| w < F::zero()) {
                return Err(Error::invalid(
                    "multinomial NB requires non-negative feature weights",
                ));
            }
        }
    }

    let mut class_counts = vec![0usize; n_classes];
    for &c in y {
        class_counts[c] += 1;
    }
    let n = from_usize::<F>(xs.len());
    let log_prior: Vec<F> = class_counts
        .iter()
        .map(|&c| {
            if c == 0 {
                F::neg_infinity()
            } else {
                (from_usize::<F>(c) / n).ln()
            }
        })
        .collect();

    let log_likelihood = match kind {
        NbKind::Multinomial => {
            let mut counts = vec![vec![F::zero(); dim]; n_classes];
            for (x, &c) in xs.iter().zip(y) {
                for &(f, w) in x.entries() {
                    counts[c][f] += w;
                }
            }
            counts
                .into_iter()
                .map(|row| {
                    let total: F = row.iter().copied().sum();
                    let denom = total + alpha * from_usize::<F>(dim);
                    row.into_iter().map(|c| ((c + alpha) / denom).ln()).collect()
                })
                .collect()
        }
        NbKind::Bernoulli => {
            let mut present = vec![vec![0usize; dim]; n_classes];
            for (x, &c) in xs.iter().zip(y) {
                for &(f, w) in x.entries() {
                    if w > F::zero() {
                        present[c][f] += 1;
                    }
                }
            }
            present
                .into_iter()
                .zip(&class_counts)
                .map(|(row, &n_c)| {
                    let denom = from_usize::<F>(n_c) + alpha + alpha;
                    row.into_iter()
                        .map(|d| ((from_usize::<F>(d) + alpha) / denom).ln())
                        .collect()
                })
                .collect()
        }
    };

    Ok(NbModel {
        kind,
        alpha,
        log_prior,
        log_likelihood,
        n_features: dim,
    })
}

impl<F: Scalar> NbModel<F> {
    pub fn kind(&self) -> NbKind {
        self.kind
    }

    pub fn n_classes(&self) -> usize {
        self.log_prior.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict_proba_row(&self, x: &SparseVector<F>) -> Vec<F> {
        self.predict_proba_rows(std::slice::from_ref(x)).pop().unwrap()
    }

    pub fn predict_proba_rows(&self, xs: &[SparseVector<F>]) -> Vec<Vec<F>> {
        match self.kind {
            NbKind::Multinomial => xs.iter().map(|x| self.multinomial_row(x)).collect(),
            NbKind::Bernoulli => {
                // Score as sum(log(1-p)) per class plus a per-present-feature
                // delta, so prediction is O(nnz) instead of O(V) per document.
                let k = self.n_classes();
                let mut base = vec![F::zero(); k];
                let mut delta = vec![vec![F::zero(); self.n_features]; k];
                for c in 0..k {
                    for (d, &log_p) in delta[c].iter_mut().zip(&self.log_likelihood[c]) {
                        let log_1mp = ln_one_minus_exp(log_p);
                        base[c] += log_1mp;
                        *d = log_p - log_1mp;
                    }
                }
                xs.iter()
                    .map(|x| {
                        let mut scores: Vec<F> = (0..k)
                            .map(|c| {
                                let mut s = self.log_prior[c] + base[c];
                                for &(f, w) in x.entries() {
                                    if w > F::zero() {
                                        s += delta[c][f];
                                    }
                                }
                                s
                            })
                            .collect();
                        softmax_in_place(&mut scores);
                        scores
                    })
                    .collect()
            }
        }
    }

    fn multinomial_row(&self, x: &SparseVector<F>) -> Vec<F> {
        let mut scores: Vec<F> = self
            .log_prior
            .iter()
            .enumerate()
            .map(|(c, &prior)| {
                let mut s = prior;
                for &(f, w) in x.entries() {
                    s += w * self.log_likelihood[c][f];
                }
                s
            })
            .collect();
        softmax_in_place(&mut scores);
        scores
    }
}

/// `ln(1 - exp(x))` for `x < 0`, stable for `x` close to zero.
fn ln_one_minus_exp<F: Scalar>(x: F) -> F {
    (-x.exp()).ln_1p()
}

/// One-vs-rest Naive Bayes: one binary model per class (rest = 0,
/// positive = 1); per-class positive probabilities renormalized to a row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbOvrModel<F> {
    binaries: Vec<NbModel<F>>,
}

pub fn train_nb_ovr<F: Scalar>(
    xs: &[SparseVector<F>],
    y: &[usize],
    n_classes: usize,
    kind: NbKind,
    alpha: F,
) -> Result<NbOvrModel<F>> {
    check_sparse_training_set(xs, y, n_classes)?;
    let binaries = (0..n_classes)
        .map(|c| {
            let binary_y: Vec<usize> = y.iter().map(|&yi| usize::from(yi == c)).collect();
            train_nb(xs, &binary_y, 2, kind, alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NbOvrModel { binaries })
}

impl<F: Scalar> NbOvrModel<F> {
    pub fn n_classes(&self) -> usize {
        self.binaries.len()
    }

    pub fn predict_proba_row(&self, x: &SparseVector<F>) -> Vec<F> {
        let mut scores: Vec<F> = self
            .binaries
            .iter()
            .map(|m| m.predict_proba_row(x)[1])
            .collect();
        let total: F = scores.iter().copied().sum();
        if total > F::zero() {
            for s in &mut scores {
                *s /= total;
            }
        } else {
            let uniform = F::one() / from_usize::<F>(scores.len());
            scores.iter_mut().for_each(|s| *s = uniform);
        }
        scores
    }

    pub fn predict_proba_rows(&self, xs: &[SparseVector<F>]) -> Vec<Vec<F>> {
        xs.iter().map(|x| self.predict_proba_row(x)).collect()
    }
}
