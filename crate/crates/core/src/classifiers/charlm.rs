//! Per-class character n-gram language models with interpolated
//! Witten-Bell smoothing.
//!
//! Each class keeps count tables for context lengths `0..order`. The
//! probability of a symbol given a context interpolates the maximum-
//! likelihood estimate at that context with the estimate one order lower,
//! weighted by `lambda = c(h) / (c(h) + t(h))` where `c(h)` is the total
//! count after context `h` and `t(h)` the number of distinct continuation
//! symbols. The recursion bottoms out in an add-1 unigram distribution
//! over the alphabet (training characters plus a reserved UNK symbol), so
//! unseen characters keep strictly positive probability. Contexts are
//! padded on the left with a reserved begin-of-text symbol; end of text is
//! not modeled as an event.
//!
//! Classification scores a query under every class model, normalizes by
//! query length (average log probability per character), and applies a
//! softmax across classes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, Scalar};
use crate::text::{duplicate_words, tokenize};

use super::softmax_in_place;

/// Reserved symbol for characters unseen at training time.
pub const UNK_SYMBOL: u32 = 0;
/// Reserved begin-of-text padding symbol; appears in contexts only.
pub const BOS_SYMBOL: u32 = 1;
const FIRST_CHAR_SYMBOL: u32 = 2;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
struct ContextStats {
    total: u32,
    continuations: BTreeMap<u32, u32>,
}

impl ContextStats {
    fn count(&self, sym: u32) -> u32 {
        self.continuations.get(&sym).copied().unwrap_or(0)
    }

    fn distinct(&self) -> u32 {
        self.continuations.len() as u32
    }
}

/// Count tables of one class: `levels[l]` maps contexts of length `l` to
/// continuation statistics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct ClassLm {
    levels: Vec<BTreeMap<Vec<u32>, ContextStats>>,
}

impl ClassLm {
    fn observe(&mut self, context: &[u32], sym: u32) {
        let stats = self.levels[context.len()]
            .entry(context.to_vec())
            .or_default();
        stats.total += 1;
        *stats.continuations.entry(sym).or_insert(0) += 1;
    }
}

/// Class-conditional character n-gram language model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassConditionalLm {
    order: usize,
    duplicate_words: bool,
    alphabet: BTreeMap<char, u32>,
    class_lms: Vec<ClassLm>,
}

/// Train one model per registry class on the corpus.
///
/// With `duplicate_words = true` each text is word-duplicated before
/// counting (and queries are preprocessed the same way at prediction
/// time). Every registry class must have at least one example.
pub fn train_charlm(corpus: &Corpus, order: usize, duplicate: bool) -> Result<ClassConditionalLm> {
    if order < 1 {
        return Err(Error::invalid("language model order must be >= 1"));
    }
    let y = corpus.label_indices()?;
    let n_classes = corpus.registry().len();
    let mut per_class_texts: Vec<Vec<String>> = vec![Vec::new(); n_classes];
    for (ex, &c) in corpus.examples().iter().zip(&y) {
        let text = if duplicate {
            duplicate_words(&tokenize(&ex.text))
        } else {
            ex.text.clone()
        };
        per_class_texts[c].push(text);
    }
    for (c, texts) in per_class_texts.iter().enumerate() {
        if texts.is_empty() {
            return Err(Error::invalid(format!(
                "class {} has no training examples",
                corpus.registry().label(c)
            )));
        }
    }

    let mut chars: BTreeSet<char> = BTreeSet::new();
    for texts in &per_class_texts {
        for t in texts {
            chars.extend(t.chars());
        }
    }
    let alphabet: BTreeMap<char, u32> = chars
        .into_iter()
        .enumerate()
        .map(|(i, ch)| (ch, FIRST_CHAR_SYMBOL + i as u32))
        .collect();

    let mut model = ClassConditionalLm {
        order,
        duplicate_words: duplicate,
        alphabet,
        class_lms: vec![
            ClassLm {
                levels: vec![BTreeMap::new(); order],
            };
            n_classes
        ],
    };

    for (c, texts) in per_class_texts.iter().enumerate() {
        for text in texts {
            let symbols = model.encode(text);
            let mut padded = vec![BOS_SYMBOL; order - 1];
            padded.extend(&symbols);
            for (i, &sym) in symbols.iter().enumerate() {
                let end = order - 1 + i;
                for level in 0..order {
                    model.class_lms[c].observe(&padded[end - level..end], sym);
                }
            }
        }
    }
    Ok(model)
}

impl ClassConditionalLm {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n_classes(&self) -> usize {
        self.class_lms.len()
    }

    pub fn duplicates_words(&self) -> bool {
        self.duplicate_words
    }

    /// All predictable symbols: the training characters plus UNK.
    pub fn alphabet_symbols(&self) -> Vec<u32> {
        std::iter::once(UNK_SYMBOL)
            .chain(self.alphabet.values().copied())
            .collect()
    }

    /// Map text to symbol ids; unseen characters become UNK.
    pub fn encode(&self, text: &str) -> Vec<u32> {
        text.chars()
            .map(|ch| self.alphabet.get(&ch).copied().unwrap_or(UNK_SYMBOL))
            .collect()
    }

    /// Every context observed in training for `class`, across all levels.
    pub fn observed_contexts(&self, class: usize) -> impl Iterator<Item = &[u32]> {
        self.class_lms[class]
            .levels
            .iter()
            .flat_map(|level| level.keys().map(Vec::as_slice))
    }

    /// Interpolated `P(sym | context)` under `class`. Only the last
    /// `order - 1` context symbols are used.
    pub fn next_symbol_prob<F: Scalar>(&self, class: usize, context: &[u32], sym: u32) -> F {
        let context = &context[context.len().saturating_sub(self.order - 1)..];
        let lm = &self.class_lms[class];
        let alphabet_size = from_usize::<F>(self.alphabet.len() + 1); // + UNK
        let mut prob = {
            // Add-1 unigram base distribution.
            let stats = lm.levels[0].get([].as_slice());
            let (count, total) = match stats {
                Some(s) => (s.count(sym), s.total),
                None => (0, 0),
            };
            (from_usize::<F>(count as usize) + F::one())
                / (from_usize::<F>(total as usize) + alphabet_size)
        };
        // Interpolate upward through increasingly long suffixes of the
        // context: level l uses the last l context symbols.
        for level in 1..=context.len() {
            let suffix = &context[context.len() - level..];
            if let Some(stats) = lm.levels[level].get(suffix) {
                let total = from_usize::<F>(stats.total as usize);
                let distinct = from_usize::<F>(stats.distinct() as usize);
                let lambda = total / (total + distinct);
                let ml = from_usize::<F>(stats.count(sym) as usize) / total;
                prob = lambda * ml + (F::one() - lambda) * prob;
            }
            // An unseen context contributes nothing: full weight stays on
            // the shorter-context estimate.
        }
        prob
    }

    /// Total log probability of `text` under `class` (after the model's
    /// stored preprocessing), with BOS-padded contexts.
    pub fn log_prob<F: Scalar>(&self, class: usize, text: &str) -> F {
        let prepared = self.preprocess(text);
        let symbols = self.encode(&prepared);
        let mut padded = vec![BOS_SYMBOL; self.order - 1];
        padded.extend(&symbols);
        let mut total = F::zero();
        for (i, &sym) in symbols.iter().enumerate() {
            let end = self.order - 1 + i;
            total += self.next_symbol_prob::<F>(class, &padded[i..end], sym).ln();
        }
        total
    }

    /// Average log probability per character; `None` for text that is
    /// empty after preprocessing.
    pub fn per_char_log_prob<F: Scalar>(&self, class: usize, text: &str) -> Option<F> {
        let prepared = self.preprocess(text);
        let n = prepared.chars().count();
        if n == 0 {
            return None;
        }
        Some(self.log_prob::<F>(class, text) / from_usize::<F>(n))
    }

    /// Probability row over classes: softmax of per-character-normalized
    /// log probabilities. Empty text gives the uniform row.
    pub fn predict_proba_row<F: Scalar>(&self, text: &str) -> Vec<F> {
        let k = self.n_classes();
        let mut scores: Vec<F> = Vec::with_capacity(k);
        for class in 0..k {
            match self.per_char_log_prob::<F>(class, text) {
                Some(s) => scores.push(s),
                None => return vec![F::one() / from_usize::<F>(k); k],
            }
        }
        softmax_in_place(&mut scores);
        scores
    }

    pub fn predict_proba_rows<F: Scalar>(&self, texts: &[String]) -> Vec<Vec<F>> {
        texts.iter().map(|t| self.predict_proba_row(t)).collect()
    }

    fn preprocess(&self, text: &str) -> String {
        if self.duplicate_words {
            duplicate_words(&tokenize(text))
        } else {
            text.to_owned()
        }
    }
}
