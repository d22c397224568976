//! Voting combiners and lexicon-rule post-processing.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use crate::corpus::{Corpus, LabelRegistry};
use crate::error::{Error, Result};
use crate::probability::ProbabilityMatrix;
use crate::scalar::{from_usize, Scalar};
use crate::text::tokenize;

use crate::classifiers::argmax;

/// One scored example: the predicted label plus the probability row that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<F> {
    pub id: String,
    pub label: String,
    pub row: Vec<F>,
}

pub type Predictions<F> = Vec<Prediction<F>>;

/// Element-wise average of aligned probability matrices.
pub fn soft_vote<F: Scalar>(mats: &[ProbabilityMatrix<F>]) -> Result<ProbabilityMatrix<F>> {
    let first = mats
        .first()
        .ok_or_else(|| Error::invalid("soft vote needs at least one matrix"))?;
    for m in &mats[1..] {
        if !first.is_aligned_with(m) {
            return Err(Error::invalid(
                "probability matrices disagree on ids or label order",
            ));
        }
    }
    let n = from_usize::<F>(mats.len());
    let rows: Vec<Vec<F>> = (0..first.n_rows())
        .map(|i| {
            (0..first.n_classes())
                .map(|c| mats.iter().map(|m| m.row(i)[c]).sum::<F>() / n)
                .collect()
        })
        .collect();
    ProbabilityMatrix::new(first.ids().to_vec(), first.labels().to_vec(), rows)
}

/// Majority label per example; ties resolve to the lowest class index.
pub fn hard_vote(votes: &[Vec<usize>], n_classes: usize) -> Result<Vec<usize>> {
    let first = votes
        .first()
        .ok_or_else(|| Error::invalid("hard vote needs at least one voter"))?;
    for v in &votes[1..] {
        if v.len() != first.len() {
            return Err(Error::invalid("voters disagree on the number of examples"));
        }
    }
    Ok((0..first.len())
        .map(|i| {
            let mut counts = vec![0usize; n_classes];
            for voter in votes {
                counts[voter[i]] += 1;
            }
            let mut best = 0;
            for (c, &n) in counts.iter().enumerate().skip(1) {
                if n > counts[best] {
                    best = c;
                }
            }
            best
        })
        .collect())
}

/// Per row, the label with maximal probability; ties resolve to the lowest
/// registry index.
pub fn argmax_labels<F: Scalar>(m: &ProbabilityMatrix<F>) -> Predictions<F> {
    m.ids()
        .iter()
        .zip(m.rows())
        .map(|(id, row)| Prediction {
            id: id.clone(),
            label: m.labels()[argmax(row)].clone(),
            row: row.clone(),
        })
        .collect()
}

/// Build predictions from `(id, label)` pairs, attaching one-hot rows.
pub fn predictions_from_label_pairs<F: Scalar>(
    pairs: &[(String, String)],
    registry: &LabelRegistry,
) -> Result<Predictions<F>> {
    pairs
        .iter()
        .map(|(id, label)| {
            let idx = registry
                .index_of(label)
                .ok_or_else(|| Error::invalid(format!("unknown label {label} for id {id}")))?;
            let mut row = vec![F::zero(); registry.len()];
            row[idx] = F::one();
            Ok(Prediction {
                id: id.clone(),
                label: label.clone(),
                row,
            })
        })
        .collect()
}

/// A whole-token trigger forcing a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconRule {
    pub trigger: String,
    pub label: String,
    pub priority: i64,
}

/// Load rules from a TSV with rows `token<TAB>label<TAB>priority`.
/// Labels must exist in the registry and priorities must be unique.
pub fn load_lexicon_rules(path: impl AsRef<Path>, registry: &LabelRegistry) -> Result<Vec<LexiconRule>> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rules = Vec::new();
    let mut seen_priorities = HashSet::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(path, lineno, "expected `token\\tlabel\\tpriority`"));
        }
        if registry.index_of(cols[1]).is_none() {
            return Err(Error::parse(path, lineno, format!("unknown label {}", cols[1])));
        }
        let priority: i64 = cols[2]
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("bad priority {:?}", cols[2])))?;
        if !seen_priorities.insert(priority) {
            return Err(Error::parse(path, lineno, format!("duplicate priority {priority}")));
        }
        rules.push(LexiconRule {
            trigger: cols[0].to_owned(),
            label: cols[1].to_owned(),
            priority,
        });
    }
    Ok(rules)
}

/// Override predicted labels by lexicon rules.
///
/// For each example, the highest-priority rule whose trigger occurs as a
/// whole token in the example's text wins; matching is on tokens, not
/// substrings, so a trigger cannot fire inside a longer word. Probability
/// rows are left untouched, which makes the operation idempotent.
pub fn apply_lexicon_rules<F: Scalar>(
    preds: &Predictions<F>,
    rules: &[LexiconRule],
    corpus: &Corpus,
) -> Result<Predictions<F>> {
    for rule in rules {
        if corpus.registry().index_of(&rule.label).is_none() {
            return Err(Error::invalid(format!(
                "rule label {} not in registry",
                rule.label
            )));
        }
    }
    let texts: HashMap<&str, &str> = corpus
        .examples()
        .iter()
        .map(|ex| (ex.id.as_str(), ex.text.as_str()))
        .collect();
    let mut by_priority: Vec<&LexiconRule> = rules.iter().collect();
    by_priority.sort_by_key(|r| std::cmp::Reverse(r.priority));

    preds
        .iter()
        .map(|p| {
            let text = texts
                .get(p.id.as_str())
                .ok_or_else(|| Error::invalid(format!("prediction id {} not in corpus", p.id)))?;
            let tokens: HashSet<String> = tokenize(text).into_tokens().into_iter().collect();
            let label = by_priority
                .iter()
                .find(|r| tokens.contains(&r.trigger))
                .map(|r| r.label.clone())
                .unwrap_or_else(|| p.label.clone());
            Ok(Prediction {
                id: p.id.clone(),
                label,
                row: p.row.clone(),
            })
        })
        .collect()
}
