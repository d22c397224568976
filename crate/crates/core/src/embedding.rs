//! Pretrained word-embedding tables and mean pooling.
//!
//! Tables are consumed from the standard word-vector text format
//! (`word v1 ... vd` per line, optional `count dim` header); training the
//! tables themselves is out of scope.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{from_f64, from_usize, Scalar};
use crate::text::TokenSequence;

/// Word-to-dense-vector map with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<F> {
    vectors: HashMap<String, Vec<F>>,
    dim: usize,
}

impl<F: Scalar> EmbeddingTable<F> {
    /// Build from `(word, vector)` pairs; every vector must have length
    /// `dim`. Later duplicates overwrite earlier ones.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (String, Vec<F>)>) -> Result<Self> {
        let mut vectors = HashMap::new();
        for (word, vec) in pairs {
            if vec.len() != dim {
                return Err(Error::invalid(format!(
                    "vector for {word:?} has dimension {}, expected {dim}",
                    vec.len()
                )));
            }
            vectors.insert(word, vec);
        }
        Ok(EmbeddingTable { vectors, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[F]> {
        self.vectors.get(word).map(Vec::as_slice)
    }
}

/// Load a word-vector text file.
///
/// A first line consisting of exactly two integers is treated as the
/// conventional `count dimension` header and skipped. Every remaining line
/// is `word v1 ... vd`; a dimension change mid-file is an error naming the
/// line.
pub fn load_embeddings<F: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingTable<F>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vectors: HashMap<String, Vec<F>> = HashMap::new();
    let mut dim: Option<usize> = None;

    for (i, raw) in content.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if lineno == 1
            && fields.len() == 2
            && fields.iter().all(|f| f.parse::<usize>().is_ok())
        {
            continue; // count/dimension header
        }
        if fields.len() < 2 {
            return Err(Error::parse(path, lineno, "expected `word v1 ... vd`"));
        }
        let word = fields[0].to_owned();
        let mut vec = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad float {f:?}")))?;
            vec.push(from_f64::<F>(v));
        }
        match dim {
            None => dim = Some(vec.len()),
            Some(d) if d != vec.len() => {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("vector of dimension {} in a table of dimension {d}", vec.len()),
                ));
            }
            _ => {}
        }
        vectors.insert(word, vec);
    }

    match dim {
        Some(dim) => Ok(EmbeddingTable { vectors, dim }),
        None => Err(Error::parse(path, 1, "embedding file contains no vectors")),
    }
}

/// Serialize to the text format accepted by [`load_embeddings`], words in
/// sorted order for deterministic output.
pub fn embeddings_to_text<F: Scalar>(table: &EmbeddingTable<F>) -> String {
    let mut words: Vec<&String> = table.vectors.keys().collect();
    words.sort();
    let mut out = String::new();
    for word in words {
        out.push_str(word);
        for v in &table.vectors[word] {
            out.push(' ');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn save_embeddings<F: Scalar>(table: &EmbeddingTable<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, embeddings_to_text(table)).map_err(|e| Error::io(path, e))
}

/// Arithmetic mean of the vectors of in-vocabulary tokens; the zero vector
/// when no token is covered.
pub fn pool_embedding<F: Scalar>(tokens: &TokenSequence, table: &EmbeddingTable<F>) -> Vec<F> {
    let mut acc = vec![F::zero(); table.dim()];
    let mut covered = 0usize;
    for token in tokens.iter() {
        if let Some(vec) = table.get(token) {
            for (a, &v) in acc.iter_mut().zip(vec) {
                *a += v;
            }
            covered += 1;
        }
    }
    if covered > 0 {
        let n = from_usize::<F>(covered);
        for a in &mut acc {
            *a /= n;
        }
    }
    acc
}
