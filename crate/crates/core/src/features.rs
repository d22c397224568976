//! Vocabulary fitting, TF-IDF and count vectorization, feature
//! concatenation, and probability-feature stacking.
//!
//! The TF-IDF weighting is `count(t, doc) * idf(t)` with
//! `idf(t) = ln((1 + N) / (1 + df(t))) + 1`, L2-normalized unless the
//! result is the all-zero vector. The `1 +` smoothing keeps the weight
//! well-posed for terms unseen in the fitting collection.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probability::ProbabilityMatrix;
use crate::scalar::{from_usize, Scalar};

/// Term-to-index mapping with document frequencies.
///
/// Indices are dense `0..len` and assigned in lexicographic term order, so
/// a vocabulary fitted from the same documents is identical across runs
/// and platforms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    index: BTreeMap<String, usize>,
    document_frequency: Vec<usize>,
    n_documents: usize,
}

impl Vocabulary {
    /// Fit from tokenized documents, keeping terms with `df >= min_df`.
    pub fn fit<D: AsRef<[String]>>(docs: &[D], min_df: usize) -> Result<Self> {
        if min_df < 1 {
            return Err(Error::invalid("min_df must be >= 1"));
        }
        if docs.is_empty() {
            return Err(Error::invalid("cannot fit a vocabulary on zero documents"));
        }
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let distinct: BTreeSet<&str> = doc.as_ref().iter().map(String::as_str).collect();
            for term in distinct {
                *df.entry(term).or_insert(0) += 1;
            }
        }
        let mut index = BTreeMap::new();
        let mut document_frequency = Vec::new();
        for (term, count) in df {
            if count >= min_df {
                index.insert(term.to_owned(), document_frequency.len());
                document_frequency.push(count);
            }
        }
        Ok(Vocabulary {
            index,
            document_frequency,
            n_documents: docs.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.document_frequency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.document_frequency.is_empty()
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.document_frequency[index]
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, usize)> {
        self.index.iter().map(|(t, &i)| (t.as_str(), i))
    }

    /// `ln((1 + N) / (1 + df)) + 1`
    pub fn idf<F: Scalar>(&self, index: usize) -> F {
        let n = from_usize::<F>(self.n_documents) + F::one();
        let df = from_usize::<F>(self.document_frequency[index]) + F::one();
        (n / df).ln() + F::one()
    }
}

/// Sorted `(index, weight)` pairs with an explicit dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector<F> {
    dim: usize,
    entries: Vec<(usize, F)>,
}

impl<F: Scalar> SparseVector<F> {
    /// Build from entries already sorted by strictly increasing index.
    /// Explicit zeros are dropped; out-of-range or disordered indices are
    /// rejected.
    pub fn new(dim: usize, entries: Vec<(usize, F)>) -> Result<Self> {
        let mut last: Option<usize> = None;
        for &(i, _) in &entries {
            if i >= dim {
                return Err(Error::invalid(format!(
                    "sparse index {i} out of range for dimension {dim}"
                )));
            }
            if let Some(prev) = last {
                if i <= prev {
                    return Err(Error::invalid("sparse indices must strictly increase"));
                }
            }
            last = Some(i);
        }
        Ok(SparseVector {
            dim,
            entries: entries.into_iter().filter(|&(_, w)| w != F::zero()).collect(),
        })
    }

    pub fn empty(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    /// Densify `values`, dropping zeros.
    pub fn from_dense(values: &[F]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|&(_, &v)| v != F::zero())
            .map(|(i, &v)| (i, v))
            .collect();
        SparseVector { dim: values.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, F)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim];
        for &(i, w) in &self.entries {
            out[i] = w;
        }
        out
    }

    pub fn l2_norm(&self) -> F {
        self.entries
            .iter()
            .map(|&(_, w)| w * w)
            .sum::<F>()
            .sqrt()
    }

    /// L2-normalize in place; the all-zero vector is left unchanged.
    pub fn l2_normalized(mut self) -> Self {
        let norm = self.l2_norm();
        if norm > F::zero() {
            for (_, w) in &mut self.entries {
                *w /= norm;
            }
        }
        self
    }

    /// Dot product by merge walk over the sorted entries.
    pub fn dot(&self, other: &Self) -> F {
        let mut acc = F::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some(&&(ia, wa)), Some(&&(ib, wb))) = (a.peek(), b.peek()) {
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += wa * wb;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    /// True if any stored weight is NaN or infinite.
    pub fn has_non_finite(&self) -> bool {
        self.entries.iter().any(|&(_, w)| !w.is_finite())
    }
}

/// Raw term counts against a fitted vocabulary; out-of-vocabulary terms
/// are ignored.
pub fn count_transform<F: Scalar>(doc: &[String], vocab: &Vocabulary) -> SparseVector<F> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for term in doc {
        if let Some(idx) = vocab.index_of(term) {
            *counts.entry(idx).or_insert(0) += 1;
        }
    }
    let entries = counts
        .into_iter()
        .map(|(i, c)| (i, from_usize::<F>(c)))
        .collect();
    SparseVector { dim: vocab.len(), entries }
}

/// TF-IDF weights, L2-normalized unless all-zero.
pub fn tfidf_transform<F: Scalar>(doc: &[String], vocab: &Vocabulary) -> SparseVector<F> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for term in doc {
        if let Some(idx) = vocab.index_of(term) {
            *counts.entry(idx).or_insert(0) += 1;
        }
    }
    let entries: Vec<(usize, F)> = counts
        .into_iter()
        .map(|(i, c)| (i, from_usize::<F>(c) * vocab.idf::<F>(i)))
        .collect();
    SparseVector { dim: vocab.len(), entries }.l2_normalized()
}

/// Concatenate sparse vectors; part `i`'s indices are offset by the sum of
/// the dimensions before it.
pub fn concat_features<F: Scalar>(parts: &[SparseVector<F>]) -> SparseVector<F> {
    let dim = parts.iter().map(SparseVector::dim).sum();
    let mut entries = Vec::with_capacity(parts.iter().map(SparseVector::nnz).sum());
    let mut offset = 0;
    for part in parts {
        entries.extend(part.entries().iter().map(|&(i, w)| (i + offset, w)));
        offset += part.dim();
    }
    SparseVector { dim, entries }
}

/// Stack the probability rows of several aligned matrices in front of a
/// TF-IDF block, one stacked vector per example.
///
/// All matrices must share ids and label order, and `tfidf` must be
/// aligned to the same ids.
pub fn stack_probability_features<F: Scalar>(
    mats: &[&ProbabilityMatrix<F>],
    tfidf: &[SparseVector<F>],
) -> Result<Vec<SparseVector<F>>> {
    let first = mats
        .first()
        .ok_or_else(|| Error::invalid("need at least one probability matrix to stack"))?;
    for m in &mats[1..] {
        if !first.is_aligned_with(m) {
            return Err(Error::invalid(
                "probability matrices disagree on ids or label order",
            ));
        }
    }
    if tfidf.len() != first.n_rows() {
        return Err(Error::invalid(format!(
            "{} tf-idf vectors for {} probability rows",
            tfidf.len(),
            first.n_rows()
        )));
    }
    let mut stacked = Vec::with_capacity(first.n_rows());
    for (i, tfidf_vec) in tfidf.iter().enumerate() {
        let mut parts: Vec<SparseVector<F>> =
            mats.iter().map(|m| SparseVector::from_dense(m.row(i))).collect();
        parts.push(tfidf_vec.clone());
        stacked.push(concat_features(&parts));
    }
    Ok(stacked)
}

/// Dedicated brute-force lookup used in tests: dense TF-IDF of a document.
#[doc(hidden)]
pub fn dense_tfidf_reference<F: Scalar>(doc: &[String], vocab: &Vocabulary) -> Vec<F> {
    let mut dense = vec![F::zero(); vocab.len()];
    for term in doc {
        if let Some(i) = vocab.index_of(term) {
            dense[i] += F::one();
        }
    }
    for (i, v) in dense.iter_mut().enumerate() {
        *v *= vocab.idf::<F>(i);
    }
    let norm = dense.iter().map(|&v| v * v).sum::<F>().sqrt();
    if norm > F::zero() {
        for v in &mut dense {
            *v /= norm;
        }
    }
    dense
}

/// Convenience: tokenized documents for a batch of texts.
pub fn tokenized_docs(texts: &[String]) -> Vec<Vec<String>> {
    texts
        .iter()
        .map(|t| crate::text::tokenize(t).into_tokens())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn docs(texts: &[&str]) -> Vec<Vec<String>> {
        texts
            .iter()
            .map(|t| t.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn fit_vocabulary_counts_document_frequencies() {
        let v = Vocabulary::fit(&docs(&["a b", "a"]), 1).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.index_of("a"), Some(0));
        assert_eq!(v.index_of("b"), Some(1));
        assert_eq!(v.document_frequency(0), 2);
        assert_eq!(v.document_frequency(1), 1);
        assert_eq!(v.n_documents(), 2);
    }

    #[test]
    fn fit_vocabulary_min_df_filters() {
        let v = Vocabulary::fit(&docs(&["a b", "a"]), 2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.index_of("a"), Some(0));
        assert_eq!(v.index_of("b"), None);
    }

    #[test]
    fn fit_vocabulary_empty_document_is_fine() {
        let v = Vocabulary::fit(&docs(&[""]), 1).unwrap();
        assert!(v.is_empty());
        assert_eq!(v.n_documents(), 1);
    }

    #[test]
    fn fit_vocabulary_rejects_zero_documents() {
        let empty: Vec<Vec<String>> = vec![];
        assert!(Vocabulary::fit(&empty, 1).is_err());
        assert!(Vocabulary::fit(&docs(&["a"]), 0).is_err());
    }

    #[test]
    fn tfidf_matches_hand_computation() {
        // Corpus {d1: "a b", d2: "a"}: idf(a) = ln(3/3)+1 = 1,
        // idf(b) = ln(3/2)+1. Transform of d1, L2-normalized.
        let v = Vocabulary::fit(&docs(&["a b", "a"]), 1).unwrap();
        let idf_b = (3.0f64 / 2.0).ln() + 1.0;
        let norm = (1.0 + idf_b * idf_b).sqrt();
        let got = tfidf_transform::<f64>(&docs(&["a b"])[0], &v);
        assert_eq!(got.nnz(), 2);
        assert_relative_eq!(got.entries()[0].1, 1.0 / norm, max_relative = 1e-12);
        assert_relative_eq!(got.entries()[1].1, idf_b / norm, max_relative = 1e-12);
        // Values quoted to four decimals in the worked example.
        assert_relative_eq!(got.entries()[0].1, 0.5797, max_relative = 1e-4);
        assert_relative_eq!(got.entries()[1].1, 0.8148, max_relative = 1e-4);
    }

    #[test]
    fn tfidf_works_in_single_precision() {
        let v = Vocabulary::fit(&docs(&["a b", "a"]), 1).unwrap();
        let got = tfidf_transform::<f32>(&docs(&["a b"])[0], &v);
        let norm = got.l2_norm();
        assert!((norm - 1.0).abs() < 1e-6, "{norm}");
        let wide = tfidf_transform::<f64>(&docs(&["a b"])[0], &v);
        for (&(i32_, w32), &(i64_, w64)) in got.entries().iter().zip(wide.entries()) {
            assert_eq!(i32_, i64_);
            assert!((f64::from(w32) - w64).abs() < 1e-6);
        }
    }

    #[test]
    fn tfidf_oov_only_doc_is_zero_vector() {
        let v = Vocabulary::fit(&docs(&["a b", "a"]), 1).unwrap();
        let got = tfidf_transform::<f64>(&docs(&["z q"])[0], &v);
        assert!(got.is_zero());
        assert_eq!(got.dim(), 2);
    }

    #[test]
    fn tfidf_single_component_normalizes_to_one() {
        let v = Vocabulary::fit(&docs(&["a"]), 1).unwrap();
        let got = tfidf_transform::<f64>(&docs(&["a a"])[0], &v);
        assert_eq!(got.nnz(), 1);
        assert_relative_eq!(got.entries()[0].1, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn concat_offsets_indices() {
        let a = SparseVector::new(2, vec![(0, 1.0f64)]).unwrap();
        let b = SparseVector::new(3, vec![(1, 5.0f64)]).unwrap();
        let c = concat_features(&[a.clone(), b]);
        assert_eq!(c.dim(), 5);
        assert_eq!(c.entries(), &[(0, 1.0), (3, 5.0)]);

        let all_empty = concat_features(&[SparseVector::<f64>::empty(2), SparseVector::empty(3)]);
        assert_eq!(all_empty.dim(), 5);
        assert!(all_empty.is_zero());

        let single = concat_features(std::slice::from_ref(&a));
        assert_eq!(single, a);
    }

    #[test]
    fn sparse_vector_rejects_disorder_and_overflow() {
        assert!(SparseVector::new(2, vec![(1, 1.0f64), (0, 1.0)]).is_err());
        assert!(SparseVector::new(2, vec![(2, 1.0f64)]).is_err());
        // Explicit zeros are dropped.
        let v = SparseVector::new(3, vec![(0, 0.0f64), (2, 1.0)]).unwrap();
        assert_eq!(v.nnz(), 1);
    }

    #[test]
    fn stack_probability_features_widths_and_order() {
        let m = ProbabilityMatrix::new(
            vec!["t1".into()],
            vec!["A".into(), "B".into()],
            vec![vec![0.6f64, 0.4]],
        )
        .unwrap();
        let stacked = stack_probability_features(&[&m], &[SparseVector::empty(0)]).unwrap();
        assert_eq!(stacked[0].dim(), 2);
        assert_eq!(stacked[0].entries(), &[(0, 0.6), (1, 0.4)]);
    }

    #[test]
    fn stack_rejects_permuted_ids() {
        let a = ProbabilityMatrix::new(
            vec!["t1".into(), "t2".into()],
            vec!["A".into(), "B".into()],
            vec![vec![0.6f64, 0.4], vec![0.5, 0.5]],
        )
        .unwrap();
        let b = ProbabilityMatrix::new(
            vec!["t2".into(), "t1".into()],
            vec!["A".into(), "B".into()],
            vec![vec![0.6f64, 0.4], vec![0.5, 0.5]],
        )
        .unwrap();
        let tfidf = vec![SparseVector::empty(0), SparseVector::empty(0)];
        assert!(stack_probability_features(&[&a, &b], &tfidf).is_err());
    }

    proptest! {
        #[test]
        fn tfidf_norm_is_zero_or_one(
            texts in proptest::collection::vec("[a-d ]{0,12}", 1..6),
            query in "[a-f ]{0,12}",
        ) {
            let d = docs(&texts.iter().map(String::as_str).collect::<Vec<_>>());
            let v = Vocabulary::fit(&d, 1).unwrap();
            let q: Vec<String> = query.split_whitespace().map(str::to_owned).collect();
            let t = tfidf_transform::<f64>(&q, &v);
            let norm = t.l2_norm();
            prop_assert!(norm == 0.0 || (norm - 1.0).abs() < 1e-9);
        }

        #[test]
        fn tfidf_agrees_with_dense_reference(
            texts in proptest::collection::vec("[a-d ]{0,12}", 1..6),
            query in "[a-d ]{0,12}",
        ) {
            let d = docs(&texts.iter().map(String::as_str).collect::<Vec<_>>());
            let v = Vocabulary::fit(&d, 1).unwrap();
            let q: Vec<String> = query.split_whitespace().map(str::to_owned).collect();
            let sparse = tfidf_transform::<f64>(&q, &v).to_dense();
            let dense = dense_tfidf_reference::<f64>(&q, &v);
            for (s, r) in sparse.iter().zip(&dense) {
                prop_assert!((s - r).abs() < 1e-12);
            }
        }

        #[test]
        fn concat_is_associative_in_bookkeeping(
            xa in proptest::collection::vec(0.0f64..2.0, 0..4),
            xb in proptest::collection::vec(0.0f64..2.0, 0..4),
            xc in proptest::collection::vec(0.0f64..2.0, 0..4),
        ) {
            let a = SparseVector::from_dense(&xa);
            let b = SparseVector::from_dense(&xb);
            let c = SparseVector::from_dense(&xc);
            let left = concat_features(&[concat_features(&[a.clone(), b.clone()]), c.clone()]);
            let right = concat_features(&[a, concat_features(&[b, c])]);
            prop_assert_eq!(left, right);
        }
    }
}
