//! Class balancing by random-shuffle augmentation.
//!
//! Under-represented classes are enlarged by sampling one of their
//! original examples (with replacement) and emitting a uniformly random
//! permutation of its tokens. Originals are kept unchanged and synthetic
//! texts carry the source id plus a counter suffix, so augmentation never
//! discards data and is fully reproducible from the seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{corpus_stats, Corpus, LabeledExample};
use crate::error::{Error, Result};
use crate::text::tokenize;

/// Per-class target count policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetPolicy {
    /// Bring every class up to the largest observed class count.
    MaxClassCount,
    /// Bring every class up to a fixed count (must be >= every observed
    /// count, since originals are never dropped).
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentationConfig {
    pub seed: u64,
    pub target: TargetPolicy,
}

impl AugmentationConfig {
    pub fn new(seed: u64) -> Self {
        AugmentationConfig { seed, target: TargetPolicy::MaxClassCount }
    }
}

/// Balance a labeled corpus by shuffle augmentation.
///
/// The output keeps the original examples (in order) followed by the
/// synthetic ones, grouped by class in registry order; every class ends
/// at exactly the target count. An already balanced corpus comes back
/// unchanged.
pub fn balance_by_shuffle(c: &Corpus, cfg: &AugmentationConfig) -> Result<Corpus> {
    let counts = corpus_stats(c)?;
    if let Some(empty) = counts.iter().position(|&n| n == 0) {
        return Err(Error::invalid(format!(
            "class {} has no examples to augment from",
            c.registry().label(empty)
        )));
    }
    let max_count = *counts.iter().max().expect("non-empty registry");
    let target = match cfg.target {
        TargetPolicy::MaxClassCount => max_count,
        TargetPolicy::Fixed(t) => {
            if t < max_count {
                return Err(Error::invalid(format!(
                    "fixed target {t} below the largest class count {max_count}"
                )));
            }
            t
        }
    };

    let y = c.label_indices()?;
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); c.registry().len()];
    for (i, &class) in y.iter().enumerate() {
        per_class[class].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut examples = c.examples().to_vec();
    for (class, members) in per_class.iter().enumerate() {
        for synth_counter in 0..target - counts[class] {
            let source = &c.examples()[members[rng.random_range(0..members.len())]];
            let mut tokens = tokenize(&source.text).into_tokens();
            tokens.shuffle(&mut rng);
            examples.push(LabeledExample {
                id: format!("{}-aug{}", source.id, synth_counter),
                text: tokens.join(" "),
                label: source.label.clone(),
            });
        }
    }
    Corpus::new(examples, c.registry().clone())
}
