//! One-hidden-layer feed-forward classifier over dense inputs (pooled
//! embeddings): ReLU hidden layer, inverted dropout during training,
//! softmax output, cross-entropy loss.
//!
//! Initialization is Glorot uniform (`±sqrt(6 / (fan_in + fan_out))`,
//! biases zero) from a seeded stream, so identical seed and data give
//! bitwise-identical weights.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::softmax_in_place;
use crate::error::{Error, Result};
use crate::scalar::{from_f64, from_usize, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig<F> {
    pub hidden: usize,
    pub dropout: F,
    pub step: F,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl<F: Scalar> Default for MlpConfig<F> {
    fn default() -> Self {
        MlpConfig {
            hidden: 32,
            dropout: F::zero(),
            step: from_f64(0.01),
            epochs: 100,
            batch_size: 32,
            seed: 0,
        }
    }
}

/// Trained feed-forward classifier.
///
/// `w1` is `H x (D + 1)` (bias last), `w2` is `K x (H + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel<F> {
    w1: Vec<F>,
    w2: Vec<F>,
    hidden: usize,
    n_features: usize,
    n_classes: usize,
    dropout: F,
    seed: u64,
}

impl<F: Scalar> MlpModel<F> {
    /// Assemble a model from explicit weights; used by tests that need a
    /// known starting point.
    pub fn from_weights(
        w1: Vec<F>,
        w2: Vec<F>,
        hidden: usize,
        n_features: usize,
        n_classes: usize,
    ) -> Result<Self> {
        if w1.len() != hidden * (n_features + 1) || w2.len() != n_classes * (hidden + 1) {
            return Err(Error::invalid("weight shapes do not match declared dimensions"));
        }
        if w1.iter().chain(&w2).any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite weight"));
        }
        Ok(MlpModel {
            w1,
            w2,
            hidden,
            n_features,
            n_classes,
            dropout: F::zero(),
            seed: 0,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    /// Evaluation-mode forward pass (no dropout).
    pub fn predict_proba_row(&self, x: &[F]) -> Vec<F> {
        self.forward(x, None)
    }

    pub fn predict_proba_rows(&self, xs: &[Vec<F>]) -> Vec<Vec<F>> {
        xs.iter().map(|x| self.predict_proba_row(x)).collect()
    }

    /// Training-mode forward pass with an explicit hidden-unit multiplier
    /// (inverted-dropout mask). A mask of ones reproduces evaluation mode.
    pub fn forward_train(&self, x: &[F], mask: &[F]) -> Vec<F> {
        self.forward(x, Some(mask))
    }

    fn forward(&self, x: &[F], mask: Option<&[F]>) -> Vec<F> {
        let hidden = hidden_activations(&self.w1, self.hidden, self.n_features, x, mask);
        let mut scores = output_scores(&self.w2, self.n_classes, self.hidden, &hidden);
        softmax_in_place(&mut scores);
        scores
    }
}

fn hidden_activations<F: Scalar>(
    w1: &[F],
    hidden: usize,
    n_features: usize,
    x: &[F],
    mask: Option<&[F]>,
) -> Vec<F> {
    let cols = n_features + 1;
    (0..hidden)
        .map(|h| {
            let row = &w1[h * cols..(h + 1) * cols];
            let mut z = row[n_features];
            for (j, &v) in x.iter().enumerate() {
                z += row[j] * v;
            }
            let a = if z > F::zero() { z } else { F::zero() };
            match mask {
                Some(m) => a * m[h],
                None => a,
            }
        })
        .collect()
}

fn output_scores<F: Scalar>(w2: &[F], n_classes: usize, hidden: usize, a: &[F]) -> Vec<F> {
    let cols = hidden + 1;
    (0..n_classes)
        .map(|c| {
            let row = &w2[c * cols..(c + 1) * cols];
            let mut z = row[hidden];
            for (h, &v) in a.iter().enumerate() {
                z += row[h] * v;
            }
            z
        })
        .collect()
}

/// Mean cross-entropy and gradients for both layers with dropout disabled.
/// Exposed for finite-difference checking.
pub fn mlp_loss_grad<F: Scalar>(
    w1: &[F],
    w2: &[F],
    hidden: usize,
    xs: &[Vec<F>],
    ys: &[usize],
    n_classes: usize,
) -> (F, Vec<F>, Vec<F>) {
    let idx: Vec<usize> = (0..xs.len()).collect();
    loss_grad_batch(w1, w2, hidden, xs, ys, &idx, n_classes, None)
}

#[allow(clippy::too_many_arguments)]
fn loss_grad_batch<F: Scalar>(
    w1: &[F],
    w2: &[F],
    hidden: usize,
    xs: &[Vec<F>],
    ys: &[usize],
    batch: &[usize],
    n_classes: usize,
    masks: Option<&[Vec<F>]>,
) -> (F, Vec<F>, Vec<F>) {
    let n_features = xs.first().map_or(0, Vec::len);
    let cols1 = n_features + 1;
    let cols2 = hidden + 1;
    let mut g1 = vec![F::zero(); w1.len()];
    let mut g2 = vec![F::zero(); w2.len()];
    let mut total = F::zero();
    let inv_b = if batch.is_empty() {
        F::zero()
    } else {
        F::one() / from_usize::<F>(batch.len())
    };

    for (bi, &i) in batch.iter().enumerate() {
        let x = &xs[i];
        let y = ys[i];
        let mask = masks.map(|m| m[bi].as_slice());

        // Forward, keeping pre-activation signs for the ReLU derivative.
        let cols = n_features + 1;
        let z1: Vec<F> = (0..hidden)
            .map(|h| {
                let row = &w1[h * cols..(h + 1) * cols];
                let mut z = row[n_features];
                for (j, &v) in x.iter().enumerate() {
                    z += row[j] * v;
                }
                z
            })
            .collect();
        let a1: Vec<F> = z1
            .iter()
            .enumerate()
            .map(|(h, &z)| {
                let a = if z > F::zero() { z } else { F::zero() };
                match mask {
                    Some(m) => a * m[h],
                    None => a,
                }
            })
            .collect();
        let mut probs = output_scores(w2, n_classes, hidden, &a1);
        softmax_in_place(&mut probs);
        total -= probs[y].ln() * inv_b;

        // Backward.
        let dz2: Vec<F> = probs
            .iter()
            .enumerate()
            .map(|(c, &p)| (p - if c == y { F::one() } else { F::zero() }) * inv_b)
            .collect();
        for (c, &d) in dz2.iter().enumerate() {
            let row = &mut g2[c * cols2..(c + 1) * cols2];
            for (h, &a) in a1.iter().enumerate() {
                row[h] += d * a;
            }
            row[hidden] += d;
        }
        for h in 0..hidden {
            let mut da = F::zero();
            for (c, &d) in dz2.iter().enumerate() {
                da += w2[c * cols2 + h] * d;
            }
            if let Some(m) = mask {
                da *= m[h];
            }
            if z1[h] > F::zero() {
                let row = &mut g1[h * cols1..(h + 1) * cols1];
                for (j, &v) in x.iter().enumerate() {
                    row[j] += da * v;
                }
                row[n_features] += da;
            }
        }
    }
    (total, g1, g2)
}

/// Train on dense inputs by seeded mini-batch gradient descent.
pub fn train_mlp<F: Scalar>(
    xs: &[Vec<F>],
    y: &[usize],
    n_classes: usize,
    cfg: &MlpConfig<F>,
) -> Result<MlpModel<F>> {
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
    if cfg.hidden < 1 {
        return Err(Error::invalid("hidden width must be >= 1"));
    }
    if !(cfg.dropout >= F::zero() && cfg.dropout < F::one()) {
        return Err(Error::invalid("dropout must lie in [0, 1)"));
    }
    if cfg.epochs < 1 || cfg.batch_size < 1 {
        return Err(Error::invalid("epochs and batch size must be >= 1"));
    }
    let n_features = xs[0].len();
    for x in xs {
        if x.len() != n_features {
            return Err(Error::invalid("inconsistent feature dimensions"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::invalid(format!(
            "class index {bad} out of range for {n_classes} classes"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w1 = glorot_init(&mut rng, cfg.hidden, n_features);
    let mut w2 = glorot_init(&mut rng, n_classes, cfg.hidden);

    let keep = F::one() - cfg.dropout;
    let use_dropout = cfg.dropout > F::zero();
    let mut order: Vec<usize> = (0..xs.len()).collect();

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let masks: Option<Vec<Vec<F>>> = use_dropout.then(|| {
                batch
                    .iter()
                    .map(|_| {
                        (0..cfg.hidden)
                            .map(|_| {
                                if from_f64::<F>(rng.random::<f64>()) < keep {
                                    F::one() / keep
                                } else {
                                    F::zero()
                                }
                            })
                            .collect()
                    })
                    .collect()
            });
            let (_, g1, g2) = loss_grad_batch(
                &w1,
                &w2,
                cfg.hidden,
                xs,
                y,
                batch,
                n_classes,
                masks.as_deref(),
            );
            for (w, g) in w1.iter_mut().zip(&g1) {
                *w -= cfg.step * *g;
            }
            for (w, g) in w2.iter_mut().zip(&g2) {
                *w -= cfg.step * *g;
            }
        }
    }

    Ok(MlpModel {
        w1,
        w2,
        hidden: cfg.hidden,
        n_features,
        n_classes,
        dropout: cfg.dropout,
        seed: cfg.seed,
    })
}

/// Uniform `±sqrt(6 / (fan_in + fan_out))` for the non-bias columns,
/// zeros for biases; sampled row-major.
fn glorot_init<F: Scalar>(rng: &mut ChaCha8Rng, rows: usize, fan_in: usize) -> Vec<F> {
    let limit = (6.0 / (fan_in + rows) as f64).sqrt();
    let cols = fan_in + 1;
    let mut w = vec![F::zero(); rows * cols];
    for r in 0..rows {
        for j in 0..fan_in {
            let u: f64 = rng.random();
            w[r * cols + j] = from_f64::<F>((2.0 * u - 1.0) * limit);
        }
    }
    w
}
