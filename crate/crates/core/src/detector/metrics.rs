//! Binary-classification scoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion-matrix counts and the derived rates for a binary classifier
/// (positive class = attack).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub true_positives: u64,
    pub true_negatives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// True when any of precision/recall/f1 had a zero denominator and was
    /// reported as 0 rather than left undefined.
    pub degenerate: bool,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Scores predictions against labels (`true` = attack).
pub fn evaluate_predictions(labels: &[bool], predictions: &[bool]) -> Result<EvalMetrics> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("evaluation needs at least one sample".into()));
    }
    if labels.len() != predictions.len() {
        return Err(Error::ArityMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    let mut tp = 0u64;
    let mut tn = 0u64;
    let mut fp = 0u64;
    let mut fne = 0u64;
    for (&y, &p) in labels.iter().zip(predictions) {
        match (y, p) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (false, true) => fp += 1,
            (true, false) => fne += 1,
        }
    }
    let total = (tp + tn + fp + fne) as f64;
    let mut degenerate = false;
    let mut rate = |num: u64, den: u64| -> f64 {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = rate(tp, tp + fp);
    let recall = rate(tp, tp + fne);
    let accuracy = (tp + tn) as f64 / total;
    let f1 = f1_score(precision, recall);
    if precision + recall == 0.0 {
        degenerate = true;
    }
    Ok(EvalMetrics {
        true_positives: tp,
        true_negatives: tn,
        false_positives: fp,
        false_negatives: fne,
        accuracy,
        precision,
        recall,
        f1,
        degenerate,
    })
}
