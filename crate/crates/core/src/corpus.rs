//! Corpora, label registries, and their on-disk formats.
//!
//! A corpus is a TSV file with header `id<TAB>text<TAB>label` (the label
//! column disappears for unlabeled data). The label registry is a standalone
//! one-label-per-line file whose order defines the class index; it is never
//! inferred from data, because dev/test sets may lack some classes while
//! macro-F1 must still be computed over all of them.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Ordered set of unique label strings; position is the class index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRegistry {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelRegistry {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("label registry must not be empty"));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::invalid("empty label in registry"));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate label {label}")));
            }
        }
        Ok(LabelRegistry { labels, index })
    }

    /// Read a one-label-per-line file; order defines the class index.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let labels: Vec<String> = content
            .lines()
            .map(|l| l.trim_end_matches('\r').to_owned())
            .filter(|l| !l.is_empty())
            .collect();
        LabelRegistry::new(labels)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }
}

/// A single example: a tweet-sized text with an optional gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
}

/// A sequence of examples tied to the registry they were validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    examples: Vec<LabeledExample>,
    registry: LabelRegistry,
}

impl Corpus {
    /// Validates ids non-empty and all present labels against the registry.
    pub fn new(examples: Vec<LabeledExample>, registry: LabelRegistry) -> Result<Self> {
        for ex in &examples {
            if ex.id.is_empty() {
                return Err(Error::invalid("example with empty id"));
            }
            if let Some(label) = &ex.label {
                if registry.index_of(label).is_none() {
                    return Err(Error::invalid(format!(
                        "unknown label {label} on example {}",
                        ex.id
                    )));
                }
            }
        }
        Ok(Corpus { examples, registry })
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn registry(&self) -> &LabelRegistry {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.examples.iter().map(|e| e.id.clone()).collect()
    }

    /// Class index of every example; errors if any example is unlabeled.
    pub fn label_indices(&self) -> Result<Vec<usize>> {
        self.examples
            .iter()
            .map(|ex| match &ex.label {
                Some(l) => Ok(self.registry.index_of(l).expect("validated at construction")),
                None => Err(Error::invalid(format!("example {} has no label", ex.id))),
            })
            .collect()
    }
}

/// Load a corpus TSV. With `labeled = false` the file has no label column.
///
/// Rows are kept in input order; only the trailing newline / carriage
/// return is stripped from fields, nothing else.
pub fn load_corpus(
    path: impl AsRef<Path>,
    registry: &LabelRegistry,
    labeled: bool,
) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let expected_header = if labeled { "id\ttext\tlabel" } else { "id\ttext" };
    let expected_cols = if labeled { 3 } else { 2 };

    let raw_lines: Vec<&str> = content.split('\n').collect();
    let header = raw_lines
        .first()
        .map(|h| h.strip_suffix('\r').unwrap_or(h))
        .unwrap_or("");
    if header != expected_header {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {expected_header:?}, found {header:?}"),
        ));
    }

    let mut examples = Vec::new();
    for (i, raw) in raw_lines.iter().enumerate().skip(1) {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        // A trailing newline produces one final empty split; skip it.
        if line.is_empty() && i + 1 == raw_lines.len() {
            break;
        }
        let lineno = i + 1;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != expected_cols {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {expected_cols} columns, found {}", cols.len()),
            ));
        }
        if cols[0].is_empty() {
            return Err(Error::parse(path, lineno, "empty id"));
        }
        let label = if labeled {
            let l = cols[2];
            if registry.index_of(l).is_none() {
                return Err(Error::parse(path, lineno, format!("unknown label {l}")));
            }
            Some(l.to_owned())
        } else {
            None
        };
        examples.push(LabeledExample {
            id: cols[0].to_owned(),
            text: cols[1].to_owned(),
            label,
        });
    }
    Corpus::new(examples, registry.clone())
}

/// Load a corpus TSV, detecting from the header whether it carries a
/// label column.
pub fn load_corpus_auto(path: impl AsRef<Path>, registry: &LabelRegistry) -> Result<Corpus> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = content
        .split('\n')
        .next()
        .map(|h| h.strip_suffix('\r').unwrap_or(h))
        .unwrap_or("");
    match header {
        "id\ttext\tlabel" => load_corpus(path, registry, true),
        "id\ttext" => load_corpus(path, registry, false),
        other => Err(Error::parse(
            path,
            1,
            format!("unrecognized corpus header {other:?}"),
        )),
    }
}

/// Replace characters that would break the TSV framing with spaces.
fn sanitize_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Serialize a corpus to the TSV format accepted by [`load_corpus`].
///
/// Tab, newline, and carriage return inside fields are replaced by spaces
/// so the output always round-trips.
pub fn corpus_to_tsv(c: &Corpus) -> String {
    let labeled = c.examples().iter().all(|e| e.label.is_some()) && !c.is_empty();
    let mut out = String::from(if labeled { "id\ttext\tlabel\n" } else { "id\ttext\n" });
    for ex in c.examples() {
        out.push_str(&sanitize_field(&ex.id));
        out.push('\t');
        out.push_str(&sanitize_field(&ex.text));
        if labeled {
            out.push('\t');
            out.push_str(&sanitize_field(ex.label.as_deref().unwrap_or("")));
        }
        out.push('\n');
    }
    out
}

pub fn save_corpus(c: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus_to_tsv(c)).map_err(|e| Error::io(path, e))
}

/// Per-label example counts in registry order; errors on unlabeled corpora.
pub fn corpus_stats(c: &Corpus) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; c.registry().len()];
    for idx in c.label_indices()? {
        counts[idx] += 1;
    }
    Ok(counts)
}

/// Seeded shuffle split; the first `train_fraction` of the shuffled order
/// becomes the first returned corpus.
pub fn split_corpus(c: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::invalid(format!(
            "train fraction {train_fraction} outside [0, 1]"
        )));
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = (c.len() as f64 * train_fraction).round() as usize;
    let pick = |idxs: &[usize]| -> Result<Corpus> {
        let examples = idxs.iter().map(|&i| c.examples()[i].clone()).collect();
        Corpus::new(examples, c.registry().clone())
    };
    Ok((pick(&order[..n_train])?, pick(&order[n_train..])?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn registry(labels: &[&str]) -> LabelRegistry {
        LabelRegistry::new(labels.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn registry_rejects_duplicates_and_empty() {
        assert!(LabelRegistry::new(vec![]).is_err());
        assert!(registry(&["EG", "BH"]).index_of("EG") == Some(0));
        assert!(LabelRegistry::new(vec!["EG".into(), "EG".into()]).is_err());
    }

    #[test]
    fn load_corpus_parses_rows_in_order() {
        let f = write_tmp("id\ttext\tlabel\nt1\tabc\tEG\nt2\txyz\tBH\n");
        let c = load_corpus(f.path(), &registry(&["EG", "BH"]), true).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.examples()[0].id, "t1");
        assert_eq!(c.examples()[0].label.as_deref(), Some("EG"));
        assert_eq!(c.examples()[1].label.as_deref(), Some("BH"));
    }

    #[test]
    fn load_corpus_empty_after_header() {
        let f = write_tmp("id\ttext\tlabel\n");
        let c = load_corpus(f.path(), &registry(&["EG"]), true).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn load_corpus_unknown_label_names_line() {
        let f = write_tmp("id\ttext\tlabel\nt1\tabc\tEG\nt2\txyz\tXX\n");
        let err = load_corpus(f.path(), &registry(&["EG"]), true).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown label XX"), "{msg}");
        assert!(msg.contains(":3:"), "{msg}");
    }

    #[test]
    fn load_corpus_wrong_column_count_names_line() {
        let f = write_tmp("id\ttext\tlabel\nt1\tabc\n");
        let err = load_corpus(f.path(), &registry(&["EG"]), true).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn load_corpus_missing_file_is_io_error() {
        let err = load_corpus("/nonexistent/x.tsv", &registry(&["EG"]), true).unwrap_err();
        assert!(err.is_io());
    }

    #[test]
    fn load_corpus_unlabeled_has_two_columns() {
        let f = write_tmp("id\ttext\nt1\tabc\n");
        let c = load_corpus(f.path(), &registry(&["EG"]), false).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.examples()[0].label.is_none());
    }

    #[test]
    fn corpus_stats_counts_per_registry_label() {
        let reg = registry(&["EG", "BH", "SD"]);
        let examples = vec![
            LabeledExample { id: "a".into(), text: "x".into(), label: Some("EG".into()) },
            LabeledExample { id: "b".into(), text: "y".into(), label: Some("EG".into()) },
            LabeledExample { id: "c".into(), text: "z".into(), label: Some("BH".into()) },
        ];
        let c = Corpus::new(examples, reg).unwrap();
        assert_eq!(corpus_stats(&c).unwrap(), vec![2, 1, 0]);
    }

    #[test]
    fn corpus_stats_empty_corpus_is_all_zeros() {
        let c = Corpus::new(vec![], registry(&["EG", "BH"])).unwrap();
        assert_eq!(corpus_stats(&c).unwrap(), vec![0, 0]);
    }

    #[test]
    fn corpus_stats_rejects_unlabeled() {
        let c = Corpus::new(
            vec![LabeledExample { id: "a".into(), text: "x".into(), label: None }],
            registry(&["EG"]),
        )
        .unwrap();
        assert!(corpus_stats(&c).is_err());
    }

    #[test]
    fn split_is_seed_deterministic_and_partitions() {
        let reg = registry(&["EG", "BH"]);
        let examples: Vec<LabeledExample> = (0..10)
            .map(|i| LabeledExample {
                id: format!("t{i}"),
                text: format!("text {i}"),
                label: Some(if i % 2 == 0 { "EG" } else { "BH" }.into()),
            })
            .collect();
        let c = Corpus::new(examples, reg).unwrap();
        let (tr1, dev1) = split_corpus(&c, 0.8, 7).unwrap();
        let (tr2, dev2) = split_corpus(&c, 0.8, 7).unwrap();
        assert_eq!(tr1, tr2);
        assert_eq!(dev1, dev2);
        assert_eq!(tr1.len(), 8);
        assert_eq!(dev1.len(), 2);
        let mut all: Vec<String> = tr1.ids().into_iter().chain(dev1.ids()).collect();
        all.sort();
        let mut want = c.ids();
        want.sort();
        assert_eq!(all, want);
    }

    proptest! {
        // Round trip is lossless for texts free of TSV framing characters.
        #[test]
        fn tsv_round_trip_preserves_text(texts in proptest::collection::vec("[^\\t\\n\\r]{0,30}", 1..8)) {
            let reg = registry(&["EG"]);
            let examples: Vec<LabeledExample> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| LabeledExample {
                    id: format!("t{i}"),
                    text: t.clone(),
                    label: Some("EG".into()),
                })
                .collect();
            let c = Corpus::new(examples, reg.clone()).unwrap();
            let f = write_tmp(&corpus_to_tsv(&c));
            let back = load_corpus(f.path(), &reg, true).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
