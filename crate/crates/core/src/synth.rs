//! Seeded synthetic benchmark corpora.
//!
//! Real shared-task data cannot ship with the toolkit, so end-to-end
//! behaviour is exercised on a generated "toy dialect" corpus: each class
//! owns a disjoint set of function words built from class-specific
//! characters, all classes share a vowel-only noise vocabulary, and every
//! text mixes the two. Both word-level learners (disjoint word
//! inventories) and character-level learners (disjoint consonant
//! inventories) can separate the classes, which is exactly what the
//! pipelines need for a meaningful smoke benchmark.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, LabelRegistry, LabeledExample};
use crate::embedding::EmbeddingTable;

/// Up to eight classes; each row is the consonant inventory of one class.
const CLASS_CHARS: [[char; 3]; 8] = [
    ['q', 'w', 'z'],
    ['m', 'n', 'p'],
    ['s', 't', 'v'],
    ['b', 'd', 'g'],
    ['f', 'h', 'j'],
    ['k', 'l', 'r'],
    ['c', 'x', 'y'],
    ['0', '1', '2'],
];

const NOISE_WORDS: [&str; 10] = [
    "aeio", "eaiu", "ioae", "oaei", "uiae", "aiou", "eoia", "iuea", "oeua", "ueoi",
];

#[derive(Debug, Clone)]
pub struct ToyCorpusConfig {
    pub seed: u64,
    pub n_examples: usize,
    pub n_classes: usize,
    /// Tokens per example (inclusive range).
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Probability that a token is a class function word rather than
    /// shared noise; the first token is always a function word.
    pub function_word_share: f64,
}

impl Default for ToyCorpusConfig {
    fn default() -> Self {
        ToyCorpusConfig {
            seed: 42,
            n_examples: 600,
            n_classes: 3,
            min_tokens: 8,
            max_tokens: 14,
            function_word_share: 0.65,
        }
    }
}

/// The six function words of one class: length-4 patterns over its
/// three-character inventory.
pub fn class_function_words(class: usize) -> Vec<String> {
    let [a, b, c] = CLASS_CHARS[class];
    [(a, b), (b, c), (a, c), (b, a), (c, b), (c, a)]
        .iter()
        .map(|&(x, y)| format!("{x}{y}{x}{y}"))
        .collect()
}

/// Class labels are two-letter codes `AA`, `BB`, ...
pub fn toy_labels(n_classes: usize) -> Vec<String> {
    (0..n_classes)
        .map(|c| {
            let ch = (b'A' + c as u8) as char;
            format!("{ch}{ch}")
        })
        .collect()
}

/// Generate a balanced labeled corpus (labels assigned round-robin).
pub fn toy_corpus(cfg: &ToyCorpusConfig) -> Corpus {
    assert!(
        cfg.n_classes >= 1 && cfg.n_classes <= CLASS_CHARS.len(),
        "toy corpus supports 1..={} classes",
        CLASS_CHARS.len()
    );
    assert!(cfg.min_tokens >= 1 && cfg.min_tokens <= cfg.max_tokens);

    let labels = toy_labels(cfg.n_classes);
    let registry = LabelRegistry::new(labels.clone()).expect("valid labels");
    let words: Vec<Vec<String>> = (0..cfg.n_classes).map(class_function_words).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let examples = (0..cfg.n_examples)
        .map(|i| {
            let class = i % cfg.n_classes;
            let n_tokens = rng.random_range(cfg.min_tokens..=cfg.max_tokens);
            let tokens: Vec<&str> = (0..n_tokens)
                .map(|t| {
                    let own = t == 0 || rng.random::<f64>() < cfg.function_word_share;
                    if own {
                        words[class][rng.random_range(0..words[class].len())].as_str()
                    } else {
                        NOISE_WORDS[rng.random_range(0..NOISE_WORDS.len())]
                    }
                })
                .collect();
            LabeledExample {
                id: format!("ex{i:04}"),
                text: tokens.join(" "),
                label: Some(labels[class].clone()),
            }
        })
        .collect();
    Corpus::new(examples, registry).expect("generated corpus is valid")
}

/// A deterministic embedding table covering the toy vocabulary: function
/// words point along their class axis, noise words share a flat vector.
pub fn toy_embedding_table(corpus: &Corpus, dim: usize) -> EmbeddingTable<f64> {
    assert!(dim >= CLASS_CHARS.len(), "need dim >= {}", CLASS_CHARS.len());
    let mut pairs = Vec::new();
    for (class, label) in corpus.registry().labels().iter().enumerate() {
        let _ = label;
        for (j, word) in class_function_words(class).into_iter().enumerate() {
            let mut v = vec![0.02; dim];
            v[class] = 1.0 + 0.01 * j as f64;
            pairs.push((word, v));
        }
    }
    for word in NOISE_WORDS {
        pairs.push((word.to_string(), vec![0.1; dim]));
    }
    EmbeddingTable::from_pairs(dim, pairs).expect("consistent dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_stats;

    #[test]
    fn generation_is_seeded_and_balanced() {
        let cfg = ToyCorpusConfig::default();
        let a = toy_corpus(&cfg);
        let b = toy_corpus(&cfg);
        assert_eq!(a, b);
        assert_eq!(a.len(), 600);
        assert_eq!(corpus_stats(&a).unwrap(), vec![200, 200, 200]);
    }

    #[test]
    fn function_words_are_disjoint_across_classes() {
        let w0 = class_function_words(0);
        let w1 = class_function_words(1);
        let w2 = class_function_words(2);
        for w in &w0 {
            assert!(!w1.contains(w) && !w2.contains(w));
        }
        // Character inventories are disjoint too.
        let chars = |ws: &[String]| -> std::collections::BTreeSet<char> {
            ws.iter().flat_map(|w| w.chars()).collect()
        };
        assert!(chars(&w0).is_disjoint(&chars(&w1)));
        assert!(chars(&w0).is_disjoint(&chars(&w2)));
        assert!(chars(&w1).is_disjoint(&chars(&w2)));
    }

    #[test]
    fn every_text_contains_a_function_word() {
        let c = toy_corpus(&ToyCorpusConfig { n_examples: 90, ..Default::default() });
        for (ex, label) in c.examples().iter().zip(c.label_indices().unwrap()) {
            let words = class_function_words(label);
            let has = ex.text.split_whitespace().any(|t| words.iter().any(|w| w == t));
            assert!(has, "example {} lacks a class word", ex.id);
        }
    }

    #[test]
    fn embedding_table_covers_the_vocabulary() {
        let c = toy_corpus(&ToyCorpusConfig { n_examples: 30, ..Default::default() });
        let t = toy_embedding_table(&c, 8);
        for ex in c.examples() {
            for token in ex.text.split_whitespace() {
                assert!(t.get(token).is_some(), "{token} missing");
            }
        }
    }
}
