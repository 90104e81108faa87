//! Detection metrics: average precision, AUROC and TNR at a target TPR.
//!
//! Scores are "higher = more likely positive". `+inf` is a valid score;
//! NaN is rejected.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("scores and truth have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no positive samples")]
    NoPositives,
    #[error("need at least one positive and one negative sample")]
    DegenerateTruth,
    #[error("NaN score at index {0}")]
    NanScore(usize),
    #[error("target TPR must lie in (0, 1], got {0}")]
    InvalidTarget(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct LabeledScores<'a> {
    scores: &'a [f64],
    truth: &'a [bool],
    positives: usize,
}

impl<'a> LabeledScores<'a> {
    pub fn new(scores: &'a [f64], truth: &'a [bool]) -> Result<Self, MetricError> {
        if scores.len() != truth.len() {
            return Err(MetricError::LengthMismatch(scores.len(), truth.len()));
        }
        if let Some(i) = scores.iter().position(|s| s.is_nan()) {
            return Err(MetricError::NanScore(i));
        }
        let positives = truth.iter().filter(|&&t| t).count();
        Ok(Self {
            scores,
            truth,
            positives,
        })
    }

    pub fn positives(&self) -> usize {
        self.positives
    }

    pub fn negatives(&self) -> usize {
        self.truth.len() - self.positives
    }

    fn require_both(&self) -> Result<(), MetricError> {
        if self.positives == 0 || self.negatives() == 0 {
            Err(MetricError::DegenerateTruth)
        } else {
            Ok(())
        }
    }

    /// Indices by descending score; equal scores keep index order.
    fn descending(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.scores.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        order
    }

    /// Groups of equal scores, descending, as (positives, negatives) counts.
    fn tie_groups(&self) -> Vec<(usize, usize)> {
        let order = self.descending();
        let mut groups: Vec<(usize, usize)> = Vec::new();
        let mut last: Option<f64> = None;
        for i in order {
            let s = self.scores[i];
            if last != Some(s) {
                groups.push((0, 0));
                last = Some(s);
            }
            let g = groups.last_mut().unwrap();
            if self.truth[i] {
                g.0 += 1;
            } else {
                g.1 += 1;
            }
        }
        groups
    }
}

/// Step-wise AP: mean precision at the rank of each positive.
pub fn average_precision(ls: &LabeledScores<'_>) -> Result<f64, MetricError> {
    if ls.positives == 0 {
        return Err(MetricError::NoPositives);
    }
    let mut hits = 0usize;
    let mut sum = 0.0f64;
    for (rank, i) in ls.descending().into_iter().enumerate() {
        if ls.truth[i] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / ls.positives as f64)
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half.
pub fn auroc(ls: &LabeledScores<'_>) -> Result<f64, MetricError> {
    ls.require_both()?;
    // doubled pair counts stay exact in u128
    let mut twice_wins: u128 = 0;
    let mut negatives_below = ls.negatives() as u128;
    for (pos, neg) in ls.tie_groups() {
        let (pos, neg) = (pos as u128, neg as u128);
        negatives_below -= neg;
        twice_wins += 2 * pos * negatives_below + pos * neg;
    }
    let pairs = ls.positives as u128 * ls.negatives() as u128;
    Ok(twice_wins as f64 / (2 * pairs) as f64)
}

/// TNR at the largest threshold whose TPR reaches `tpr_target`, with
/// `score >= threshold` predicted positive.
pub fn tnr_at_tpr(ls: &LabeledScores<'_>, tpr_target: f64) -> Result<f64, MetricError> {
    if !(tpr_target > 0.0 && tpr_target <= 1.0) {
        return Err(MetricError::InvalidTarget(tpr_target));
    }
    ls.require_both()?;
    let p = ls.positives as f64;
    let n = ls.negatives();
    let mut tp = 0usize;
    let mut fp = 0usize;
    for (pos, neg) in ls.tie_groups() {
        tp += pos;
        fp += neg;
        if tp as f64 / p >= tpr_target {
            return Ok((n - fp) as f64 / n as f64);
        }
    }
    unreachable!("the lowest threshold admits every positive")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub ap: f64,
    pub auroc: f64,
    pub tnr95: f64,
}

pub fn evaluate(scores: &[f64], truth: &[bool]) -> Result<MetricReport, MetricError> {
    let ls = LabeledScores::new(scores, truth)?;
    Ok(MetricReport {
        ap: average_precision(&ls)?,
        auroc: auroc(&ls)?,
        tnr95: tnr_at_tpr(&ls, 0.95)?,
    })
}
