//! Synthetic label noise: relabel a share of correctly classified samples
//! with their second most likely class.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::tensorio::{LabelVector, ProbMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum NoiseGenError {
    #[error("noise ratio must lie in [0, 1), got {0}")]
    InvalidRatio(f64),
    #[error("need at least two classes")]
    TooFewClasses,
    #[error("{labels} labels for {rows} probability rows")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("only {pool} correctly classified samples, {target} flips requested")]
    PoolTooSmall { pool: usize, target: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseSpec {
    pub ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyLabels {
    pub labels: LabelVector,
    pub flipped: Vec<bool>,
}

impl NoisyLabels {
    pub fn flip_count(&self) -> usize {
        self.flipped.iter().filter(|&&f| f).count()
    }
}

/// `floor(ratio * n)`, robust to products like `0.29 * 100` landing just
/// below an integer.
pub fn flip_target(ratio: f64, n: usize) -> usize {
    (ratio * n as f64 + 1e-9).floor() as usize
}

/// Second most likely class; ties go to the lowest index.
fn runner_up(row: &[f32], top: usize) -> usize {
    let mut best: Option<usize> = None;
    for (c, &p) in row.iter().enumerate() {
        if c != top && best.is_none_or(|b| p > row[b]) {
            best = Some(c);
        }
    }
    best.expect("at least two classes")
}

pub fn inject_noise(
    probs: &ProbMatrix,
    labels: &LabelVector,
    spec: &NoiseSpec,
) -> Result<NoisyLabels, NoiseGenError> {
    if !(0.0..1.0).contains(&spec.ratio) {
        return Err(NoiseGenError::InvalidRatio(spec.ratio));
    }
    inject_noise_count(probs, labels, flip_target(spec.ratio, labels.len()), spec.seed)
}

/// Flips exactly `target` labels chosen uniformly from the correctly
/// classified pool.
pub fn inject_noise_count(
    probs: &ProbMatrix,
    labels: &LabelVector,
    target: usize,
    seed: u64,
) -> Result<NoisyLabels, NoiseGenError> {
    if probs.classes() < 2 {
        return Err(NoiseGenError::TooFewClasses);
    }
    let n = labels.len();
    if probs.rows() != n {
        return Err(NoiseGenError::LengthMismatch {
            rows: probs.rows(),
            labels: n,
        });
    }
    let pool: Vec<usize> = (0..n).filter(|&i| probs.argmax(i) == labels.get(i)).collect();
    if pool.len() < target {
        return Err(NoiseGenError::PoolTooSmall {
            pool: pool.len(),
            target,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, pool.len(), target);
    let mut new_labels = labels.as_slice().to_vec();
    let mut flipped = vec![false; n];
    for k in chosen.iter() {
        let i = pool[k];
        new_labels[i] = runner_up(probs.row(i), labels.get(i)) as i64;
        flipped[i] = true;
    }
    Ok(NoisyLabels {
        labels: LabelVector::new(new_labels).expect("labels stay in range"),
        flipped,
    })
}
