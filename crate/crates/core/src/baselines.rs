//! Reference scorers. Every scorer returns "higher = more problematic".

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::tensorio::{FeatureMatrix, LabelVector, LogitMatrix, ProbMatrix};

/// Floor applied to `p[y]` inside the loss.
pub const LOSS_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("{0} is not a {1} baseline")]
    WrongKind(BaselineKind, &'static str),
    #[error("{0} requires {1}")]
    MissingInput(BaselineKind, &'static str),
    #[error("input sizes disagree: {0}")]
    ShapeMismatch(String),
    #[error("unknown baseline kind {0:?}")]
    UnknownKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Entropy,
    LeastConfidence,
    Margin,
    Loss,
    Msp,
    MaxLogit,
    Energy,
    Knn,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 8] = [
        BaselineKind::Entropy,
        BaselineKind::LeastConfidence,
        BaselineKind::Margin,
        BaselineKind::Loss,
        BaselineKind::Msp,
        BaselineKind::MaxLogit,
        BaselineKind::Energy,
        BaselineKind::Knn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Entropy => "entropy",
            BaselineKind::LeastConfidence => "least-confidence",
            BaselineKind::Margin => "margin",
            BaselineKind::Loss => "loss",
            BaselineKind::Msp => "msp",
            BaselineKind::MaxLogit => "max-logit",
            BaselineKind::Energy => "energy",
            BaselineKind::Knn => "knn",
        }
    }

    pub fn is_label_baseline(self) -> bool {
        matches!(
            self,
            BaselineKind::Entropy | BaselineKind::LeastConfidence | BaselineKind::Margin | BaselineKind::Loss
        )
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineKind {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| BaselineError::UnknownKind(s.to_string()))
    }
}

fn row_f64(row: &[f32]) -> impl Iterator<Item = f64> + '_ {
    row.iter().map(|&v| v as f64)
}

/// Label-quality scores: entropy, least confidence, margin or loss.
pub fn score_label_baseline(
    kind: BaselineKind,
    probs: &ProbMatrix,
    labels: &LabelVector,
) -> Result<Vec<f64>, BaselineError> {
    if !kind.is_label_baseline() {
        return Err(BaselineError::WrongKind(kind, "label"));
    }
    if probs.rows() != labels.len() {
        return Err(BaselineError::ShapeMismatch(format!(
            "{} probability rows vs {} labels",
            probs.rows(),
            labels.len()
        )));
    }
    labels
        .check_classes(probs.classes())
        .map_err(|e| BaselineError::ShapeMismatch(e.to_string()))?;
    Ok((0..probs.rows())
        .map(|i| {
            let row = probs.row(i);
            let y = labels.get(i);
            let py = row[y] as f64;
            match kind {
                BaselineKind::Entropy => -row_f64(row)
                    .filter(|&p| p > 0.0)
                    .map(|p| p * p.ln())
                    .sum::<f64>(),
                BaselineKind::LeastConfidence => 1.0 - py,
                BaselineKind::Margin => {
                    let other = row_f64(row)
                        .enumerate()
                        .filter(|&(c, _)| c != y)
                        .map(|(_, p)| p)
                        .fold(f64::NEG_INFINITY, f64::max);
                    // a single class has no competitor
                    let other = if other.is_finite() { other } else { 0.0 };
                    -(py - other)
                }
                BaselineKind::Loss => -py.max(LOSS_FLOOR).ln(),
                _ => unreachable!(),
            }
        })
        .collect())
}

/// Inputs for the OOD scorers; which ones are needed depends on the kind.
#[derive(Debug, Clone, Copy, Default)]
pub struct OodInputs<'a> {
    pub probs: Option<&'a ProbMatrix>,
    pub logits: Option<&'a LogitMatrix>,
    pub features: Option<&'a FeatureMatrix>,
    pub reference: Option<&'a FeatureMatrix>,
    /// Fraction of the full reference set present in `reference`; sets the
    /// KNN neighbor rank to `max(1, round(1000 * alpha))`.
    pub reference_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OodScores {
    pub scores: Vec<f64>,
    /// KNN neighbor rank actually used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Set when the requested rank exceeded the reference size.
    pub k_clamped: bool,
}

impl OodScores {
    fn plain(scores: Vec<f64>) -> Self {
        Self {
            scores,
            k: None,
            k_clamped: false,
        }
    }
}

/// `max(1, round(1000 * alpha))`.
pub fn knn_rank(alpha: f64) -> usize {
    ((1000.0 * alpha).round() as usize).max(1)
}

/// Stable log-sum-exp via max shift.
pub fn log_sum_exp(row: &[f32]) -> f64 {
    let m = row_f64(row).fold(f64::NEG_INFINITY, f64::max);
    m + row_f64(row).map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub fn score_ood_baseline(kind: BaselineKind, inputs: &OodInputs<'_>) -> Result<OodScores, BaselineError> {
    let max_of = |row: &[f32]| row_f64(row).fold(f64::NEG_INFINITY, f64::max);
    match kind {
        BaselineKind::Msp => {
            let probs = inputs.probs.ok_or(BaselineError::MissingInput(kind, "probabilities"))?;
            Ok(OodScores::plain((0..probs.rows()).map(|i| -max_of(probs.row(i))).collect()))
        }
        BaselineKind::MaxLogit => {
            let logits = inputs.logits.ok_or(BaselineError::MissingInput(kind, "logits"))?;
            Ok(OodScores::plain((0..logits.rows()).map(|i| -max_of(logits.row(i))).collect()))
        }
        BaselineKind::Energy => {
            let logits = inputs.logits.ok_or(BaselineError::MissingInput(kind, "logits"))?;
            Ok(OodScores::plain((0..logits.rows()).map(|i| -log_sum_exp(logits.row(i))).collect()))
        }
        BaselineKind::Knn => {
            let query = inputs.features.ok_or(BaselineError::MissingInput(kind, "query features"))?;
            let reference = inputs
                .reference
                .ok_or(BaselineError::MissingInput(kind, "reference features"))?;
            knn_scores(query, reference, knn_rank(inputs.reference_fraction))
        }
        _ => Err(BaselineError::WrongKind(kind, "OOD")),
    }
}

fn normalized(m: &FeatureMatrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| {
            let row: Vec<f64> = row_f64(m.row(i)).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter().map(|v| v / norm).collect()
            } else {
                row
            }
        })
        .collect()
}

/// Cosine distance to the `k`-th nearest reference row on L2-normalized
/// features. `k` is clamped to the reference size.
pub fn knn_scores(query: &FeatureMatrix, reference: &FeatureMatrix, k: usize) -> Result<OodScores, BaselineError> {
    if query.cols() != reference.cols() {
        return Err(BaselineError::ShapeMismatch(format!(
            "feature dims {} vs {}",
            query.cols(),
            reference.cols()
        )));
    }
    let k_clamped = k > reference.rows();
    let k = k.clamp(1, reference.rows());
    let q = normalized(query);
    let r = normalized(reference);
    let scores = q
        .par_iter()
        .map(|qi| {
            let mut dist: Vec<f64> = r
                .iter()
                .map(|rj| 1.0 - qi.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>())
                .collect();
            let (_, kth, _) = dist.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect();
    Ok(OodScores {
        scores,
        k: Some(k),
        k_clamped,
    })
}
