//! Classification metrics: binned accuracies, confusion matrices, and
//! per-class / macro / weighted precision-recall-F1 reports.

use std::fmt::Display;

use serde::Serialize;
use thiserror::Error;

use crate::binning::{bin_binary, Binner};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("prediction and gold lists differ in length ({preds} vs {golds})")]
    LengthMismatch { preds: usize, golds: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("label '{0}' does not appear in the label order")]
    UnknownLabel(String),
    #[error("confusion matrix must be square and match its label list")]
    BadShape,
}

/// Fraction of index pairs that land in the same bin under `bin`.
pub fn binned_agreement<B: PartialEq>(
    preds: &[f64],
    golds: &[f64],
    bin: impl Fn(f64) -> B,
) -> Result<f64, MetricsError> {
    if preds.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            preds: preds.len(),
            golds: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let matches = preds
        .iter()
        .zip(golds)
        .filter(|(p, g)| bin(**p) == bin(**g))
        .count();
    Ok(matches as f64 / preds.len() as f64)
}

/// Three-level accuracy after binning predictions and gold values with a
/// shared binning function.
pub fn acc3(preds: &[f64], golds: &[f64], binner: &Binner) -> Result<f64, MetricsError> {
    binned_agreement(preds, golds, |v| binner.apply(v))
}

/// Binary accuracy at the fixed threshold of 3.
pub fn acc2(preds: &[f64], golds: &[f64]) -> Result<f64, MetricsError> {
    binned_agreement(preds, golds, bin_binary)
}

/// Row-major confusion matrix: rows are true labels, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    /// Counts `(gold, pred)` pairs over an explicit label order.
    pub fn from_labels<T: Eq + Display>(
        gold: &[T],
        pred: &[T],
        order: &[T],
    ) -> Result<Self, MetricsError> {
        if gold.len() != pred.len() {
            return Err(MetricsError::LengthMismatch {
                preds: pred.len(),
                golds: gold.len(),
            });
        }
        let index_of = |label: &T| -> Result<usize, MetricsError> {
            order
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| MetricsError::UnknownLabel(label.to_string()))
        };
        let n = order.len();
        let mut counts = vec![vec![0u64; n]; n];
        for (g, p) in gold.iter().zip(pred) {
            counts[index_of(g)?][index_of(p)?] += 1;
        }
        Ok(ConfusionMatrix {
            labels: order.iter().map(|l| l.to_string()).collect(),
            counts,
        })
    }

    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self, MetricsError> {
        if counts.len() != labels.len() || counts.iter().any(|row| row.len() != labels.len()) {
            return Err(MetricsError::BadShape);
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Support (true count) of each class.
    pub fn supports(&self) -> Vec<u64> {
        self.counts.iter().map(|row| row.iter().sum()).collect()
    }

    /// CSV rendering with a label header row and label-prefixed rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("true\\pred,{}\n", self.labels.join(",")));
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&format!("{},{}\n", label, cells.join(",")));
        }
        out
    }
}

/// Precision, recall, and F1 of one class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when a zero denominator forced any of the scores to 0.
    pub zero_division: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Full metrics over a confusion matrix. Weighted recall always equals
/// accuracy; weighted F1 is the support-weighted mean of per-class F1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: Aggregate,
    pub weighted: Aggregate,
}

fn ratio(num: u64, den: u64, flagged: &mut bool) -> f64 {
    if den == 0 {
        *flagged = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Derives the full report from a non-empty confusion matrix.
pub fn report(cm: &ConfusionMatrix) -> Result<MetricsReport, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let n = cm.labels().len();
    let counts = cm.counts();
    let supports = cm.supports();
    let mut per_class = Vec::with_capacity(n);
    for i in 0..n {
        let mut zero_division = false;
        let col_sum: u64 = counts.iter().map(|row| row[i]).sum();
        let precision = ratio(counts[i][i], col_sum, &mut zero_division);
        let recall = ratio(counts[i][i], supports[i], &mut zero_division);
        let f1 = if precision + recall == 0.0 {
            zero_division = true;
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            label: cm.labels()[i].clone(),
            precision,
            recall,
            f1,
            support: supports[i],
            zero_division,
        });
    }
    let accuracy = (0..n).map(|i| counts[i][i]).sum::<u64>() as f64 / total as f64;
    let macro_avg = Aggregate {
        precision: per_class.iter().map(|c| c.precision).sum::<f64>() / n as f64,
        recall: per_class.iter().map(|c| c.recall).sum::<f64>() / n as f64,
        f1: per_class.iter().map(|c| c.f1).sum::<f64>() / n as f64,
    };
    let weight = |f: &dyn Fn(&ClassMetrics) -> f64| -> f64 {
        per_class
            .iter()
            .map(|c| c.support as f64 * f(c))
            .sum::<f64>()
            / total as f64
    };
    let weighted = Aggregate {
        precision: weight(&|c| c.precision),
        recall: weight(&|c| c.recall),
        f1: weight(&|c| c.f1),
    };
    Ok(MetricsReport {
        accuracy,
        per_class,
        macro_avg,
        weighted,
    })
}

/// Rounds to four decimals for presentation; internal math stays full
/// precision.
pub fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}
