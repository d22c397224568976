//! Shared-task scoring: accuracy, micro/macro F1, per-class metrics, and
//! confusion-matrix emission.
//!
//! Macro-F1 averages per-class F1 over the FULL registry, including
//! classes with zero support; zero-denominator precision/recall/F1 are
//! defined as 0. Micro-F1 is computed from pooled counts as
//! `2 TP / (2 TP + FP + FN)`, which in single-label multiclass scoring
//! reduces to the same real number as accuracy (`TP / N`), so the two are
//! equal not just approximately but float-exactly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::corpus::Corpus;
use crate::ensemble::Predictions;
use crate::error::{Error, Result};
use crate::scalar::{from_usize, Scalar};

/// Gold-by-predicted count matrix in registry order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Gold support per class.
    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Prediction count per class.
    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.labels.len())
            .map(|c| self.counts.iter().map(|r| r[c]).sum())
            .collect()
    }

    /// CSV with a label header row and a label column. With `normalized`
    /// each row is divided by its sum (rows of an unobserved gold class
    /// stay zero), matching the percentage view used for confusion-matrix
    /// figures.
    pub fn to_csv(&self, normalized: bool) -> String {
        let mut out = String::new();
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(label);
            if normalized {
                let total: usize = row.iter().sum();
                for &v in row {
                    let share = if total == 0 { 0.0 } else { v as f64 / total as f64 };
                    let _ = write!(out, ",{share}");
                }
            } else {
                for &v in row {
                    let _ = write!(out, ",{v}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Precision/recall/F1 and gold support of one class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics<F> {
    pub label: String,
    pub precision: F,
    pub recall: F,
    pub f1: F,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport<F> {
    pub accuracy: F,
    pub micro_f1: F,
    pub macro_f1: F,
    pub per_class: Vec<ClassMetrics<F>>,
    pub confusion: ConfusionMatrix,
}

/// Score predictions against a fully labeled gold corpus, matching by id.
pub fn evaluate<F: Scalar>(gold: &Corpus, preds: &Predictions<F>) -> Result<EvaluationReport<F>> {
    let gold_labels = gold.label_indices()?;
    let registry = gold.registry();
    let k = registry.len();

    let mut gold_by_id: HashMap<&str, usize> = HashMap::with_capacity(gold.len());
    for (ex, &c) in gold.examples().iter().zip(&gold_labels) {
        if gold_by_id.insert(ex.id.as_str(), c).is_some() {
            return Err(Error::invalid(format!("duplicate gold id {}", ex.id)));
        }
    }

    let mut counts = vec![vec![0usize; k]; k];
    let mut seen: HashMap<&str, ()> = HashMap::with_capacity(preds.len());
    let mut unknown_ids = Vec::new();
    for p in preds {
        if seen.insert(p.id.as_str(), ()).is_some() {
            return Err(Error::invalid(format!("duplicate prediction id {}", p.id)));
        }
        let Some(&gold_class) = gold_by_id.get(p.id.as_str()) else {
            unknown_ids.push(p.id.clone());
            continue;
        };
        let pred_class = registry
            .index_of(&p.label)
            .ok_or_else(|| Error::invalid(format!("predicted label {} not in registry", p.label)))?;
        counts[gold_class][pred_class] += 1;
    }
    if !unknown_ids.is_empty() {
        return Err(Error::invalid(format!(
            "predictions for ids missing from gold: {}",
            unknown_ids.join(", ")
        )));
    }
    if preds.len() != gold.len() {
        let missing: Vec<&str> = gold
            .examples()
            .iter()
            .map(|e| e.id.as_str())
            .filter(|id| !seen.contains_key(id))
            .collect();
        return Err(Error::invalid(format!(
            "gold ids without predictions: {}",
            missing.join(", ")
        )));
    }

    let confusion = ConfusionMatrix {
        labels: registry.labels().to_vec(),
        counts,
    };
    Ok(report_from_confusion(confusion))
}

fn report_from_confusion<F: Scalar>(confusion: ConfusionMatrix) -> EvaluationReport<F> {
    let k = confusion.labels.len();
    let row_sums = confusion.row_sums();
    let col_sums = confusion.col_sums();
    let total: usize = row_sums.iter().sum();

    let zero = F::zero();
    let mut per_class = Vec::with_capacity(k);
    let mut tp_sum = 0usize;
    let mut macro_acc = zero;
    for c in 0..k {
        let tp = confusion.counts[c][c];
        let fp = col_sums[c] - tp;
        let fn_ = row_sums[c] - tp;
        tp_sum += tp;
        let precision = if tp + fp == 0 {
            zero
        } else {
            from_usize::<F>(tp) / from_usize::<F>(tp + fp)
        };
        let recall = if tp + fn_ == 0 {
            zero
        } else {
            from_usize::<F>(tp) / from_usize::<F>(tp + fn_)
        };
        let f1 = if precision + recall == zero {
            zero
        } else {
            from_f2(precision, recall)
        };
        macro_acc += f1;
        per_class.push(ClassMetrics {
            label: confusion.labels[c].clone(),
            precision,
            recall,
            f1,
            support: row_sums[c],
        });
    }

    let accuracy = if total == 0 {
        zero
    } else {
        from_usize::<F>(tp_sum) / from_usize::<F>(total)
    };
    // Pooled counts: in single-label scoring FP and FN both pool to
    // total - TP, making this the same quotient as accuracy.
    let fp_sum: usize = (0..k).map(|c| col_sums[c] - confusion.counts[c][c]).sum();
    let fn_sum: usize = (0..k).map(|c| row_sums[c] - confusion.counts[c][c]).sum();
    let micro_denom = 2 * tp_sum + fp_sum + fn_sum;
    let micro_f1 = if micro_denom == 0 {
        zero
    } else {
        from_usize::<F>(2 * tp_sum) / from_usize::<F>(micro_denom)
    };
    let macro_f1 = macro_acc / from_usize::<F>(k);

    EvaluationReport {
        accuracy,
        micro_f1,
        macro_f1,
        per_class,
        confusion,
    }
}

fn from_f2<F: Scalar>(p: F, r: F) -> F {
    let two = F::one() + F::one();
    two * p * r / (p + r)
}

/// Output formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown report format {other}"))),
        }
    }
}

/// Render a report deterministically in the requested format.
pub fn render_report<F: Scalar + Serialize>(
    report: &EvaluationReport<F>,
    format: ReportFormat,
) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serializes") + "\n"
        }
        ReportFormat::Csv => {
            let mut out = String::from("label,precision,recall,f1,support\n");
            for m in &report.per_class {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    m.label, m.precision, m.recall, m.f1, m.support
                );
            }
            let _ = writeln!(out, "accuracy,,,{},", report.accuracy);
            let _ = writeln!(out, "micro_f1,,,{},", report.micro_f1);
            let _ = writeln!(out, "macro_f1,,,{},", report.macro_f1);
            out
        }
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "accuracy  {:.4}", report.accuracy);
            let _ = writeln!(out, "micro F1  {:.4}", report.micro_f1);
            let _ = writeln!(out, "macro F1  {:.4}", report.macro_f1);
            let _ = writeln!(out, "{:<12} {:>9} {:>9} {:>9} {:>9}", "label", "prec", "recall", "f1", "support");
            for m in &report.per_class {
                let _ = writeln!(
                    out,
                    "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>9}",
                    m.label, m.precision, m.recall, m.f1, m.support
                );
            }
            out
        }
    }
}

pub fn emit_report<F: Scalar + Serialize>(
    report: &EvaluationReport<F>,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_report(report, format)).map_err(|e| Error::io(path, e))
}

pub fn emit_confusion_csv(
    confusion: &ConfusionMatrix,
    normalized: bool,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, confusion.to_csv(normalized)).map_err(|e| Error::io(path, e))
}
