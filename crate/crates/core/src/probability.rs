//! Validated per-example, per-class probability rows.
//!
//! The probability matrix is the lingua franca between classifiers and the
//! ensemble layer: every model emits one, the voting combinators consume
//! them, and externally produced matrices (e.g. softmax exports from neural
//! systems) enter through the same CSV format. The CSV carries a full label
//! header rather than positional columns so that label-order drift between
//! exporting systems and this toolkit is caught at load time.

use std::fs::File;
use std::path::Path;

use crate::corpus::LabelRegistry;
use crate::error::{Error, Result};
use crate::scalar::{from_f64, Scalar};

/// Tolerance on row sums: accommodates single-precision softmax exports.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Rows of non-negative reals, one per example id, each summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix<F: Scalar> {
    ids: Vec<String>,
    labels: Vec<String>,
    rows: Vec<Vec<F>>,
}

impl<F: Scalar> ProbabilityMatrix<F> {
    /// Validates shape, entry range `[0, 1]`, row sums within
    /// [`ROW_SUM_TOLERANCE`] of 1, and id uniqueness.
    pub fn new(ids: Vec<String>, labels: Vec<String>, rows: Vec<Vec<F>>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("probability matrix needs at least one label"));
        }
        if ids.len() != rows.len() {
            return Err(Error::invalid(format!(
                "{} ids but {} rows",
                ids.len(),
                rows.len()
            )));
        }
        {
            let mut seen = std::collections::HashSet::with_capacity(ids.len());
            for id in &ids {
                if !seen.insert(id.as_str()) {
                    return Err(Error::invalid(format!("duplicate example id {id}")));
                }
            }
        }
        let tol = from_f64::<F>(ROW_SUM_TOLERANCE);
        for (id, row) in ids.iter().zip(&rows) {
            if row.len() != labels.len() {
                return Err(Error::invalid(format!(
                    "row {id} has {} entries for {} labels",
                    row.len(),
                    labels.len()
                )));
            }
            let mut sum = F::zero();
            for &v in row {
                if !(v >= F::zero() && v <= F::one()) {
                    return Err(Error::invalid(format!(
                        "row {id} has entry {v} outside [0, 1]"
                    )));
                }
                sum += v;
            }
            if (sum - F::one()).abs() > tol {
                return Err(Error::invalid(format!("row {id} sums to {sum}, not 1")));
            }
        }
        Ok(ProbabilityMatrix { ids, labels, rows })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.rows[i]
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    /// True when `other` covers the same ids and labels in the same order.
    pub fn is_aligned_with(&self, other: &Self) -> bool {
        self.ids == other.ids && self.labels == other.labels
    }
}

/// Load a probability CSV with header `id,<label1>,...,<labelK>`.
///
/// The header labels must equal the registry labels in order; rows failing
/// the range or sum checks are rejected naming the offending id.
pub fn load_probability_matrix<F: Scalar>(
    path: impl AsRef<Path>,
    registry: &LabelRegistry,
) -> Result<ProbabilityMatrix<F>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let header_fields: Vec<&str> = headers.iter().collect();
    let expected: Vec<&str> = std::iter::once("id")
        .chain(registry.labels().iter().map(String::as_str))
        .collect();
    if header_fields != expected {
        return Err(Error::parse(
            path,
            1,
            format!("header {header_fields:?} does not match registry {expected:?}"),
        ));
    }

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let lineno = i + 2;
        let record = record.map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if record.len() != registry.len() + 1 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} fields, found {}", registry.len() + 1, record.len()),
            ));
        }
        let id = record[0].to_owned();
        let mut row = Vec::with_capacity(registry.len());
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad float {field:?} in row {id}")))?;
            row.push(from_f64::<F>(v));
        }
        ids.push(id);
        rows.push(row);
    }
    ProbabilityMatrix::new(ids, registry.labels().to_vec(), rows)
}

/// Serialize to the CSV format accepted by [`load_probability_matrix`].
/// Floats are written with shortest round-trip precision.
pub fn probability_matrix_to_csv<F: Scalar>(m: &ProbabilityMatrix<F>) -> String {
    let mut out = String::from("id");
    for label in m.labels() {
        out.push(',');
        out.push_str(label);
    }
    out.push('\n');
    for (id, row) in m.ids().iter().zip(m.rows()) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn save_probability_matrix<F: Scalar>(
    m: &ProbabilityMatrix<F>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, probability_matrix_to_csv(m)).map_err(|e| Error::io(path, e))
}
