//! Label-noise scoring by regularized max-cut over the relation graph.
//!
//! The estimated noisy set `N` maximizes
//! `cut(N, T \ N) - lambda * |N|`, where the cut sums edge weights
//! `w(i, j) = -r(i, j)` across the partition. Two local-search solvers are
//! provided: a set-level one that re-thresholds every node at once
//! ([`SetLevelSolver`]) and a single-node Kernighan-Lin style one
//! ([`detect_label_noise_single`]) that is guaranteed to climb the objective.
//!
//! `lambda` is expressed against max-abs-scaled scores. In objective values
//! it becomes `lambda * max_i |s0[i]|`, with `s0` the initial scores, so
//! traces from both solvers are comparable.

mod graph;
mod partition;
mod setlevel;
mod single;

pub use graph::{DenseWeights, EdgeWeights, RelationGraph};
pub use partition::detect_partitioned;
pub use setlevel::{run_set_level, SetLevelSolver, Step};
pub use single::{run_single_node, SINGLE_NODE_LIMIT};

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{KernelConfig, KernelError};
use crate::tensorio::DatasetHandle;

pub const DEFAULT_LAMBDA: f64 = 0.05;
pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum LabelNoiseError {
    #[error("lambda must be finite and non-negative, got {0}")]
    InvalidLambda(f64),
    #[error("max_iters must be at least 1")]
    InvalidMaxIters,
    #[error("partition size {size} outside [2, {n}]")]
    InvalidPartitionSize { size: usize, n: usize },
    #[error("{n} nodes exceed the dense single-node limit of {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("score vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no score vectors to ensemble")]
    EmptyEnsemble,
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxCutConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// 0 disables partitioning.
    pub partition_size: usize,
    pub seed: u64,
}

impl Default for MaxCutConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            max_iters: DEFAULT_MAX_ITERS,
            partition_size: 0,
            seed: 0,
        }
    }
}

impl MaxCutConfig {
    pub fn validate(&self) -> Result<(), LabelNoiseError> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(LabelNoiseError::InvalidLambda(self.lambda));
        }
        if self.max_iters == 0 {
            return Err(LabelNoiseError::InvalidMaxIters);
        }
        Ok(())
    }
}

/// Scores (higher = noisier) and the estimated noisy set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseScoreResult {
    pub scores: Vec<f64>,
    pub noisy_set: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

/// `s0[i] = sum_{j != i} -r(i, j)`, streamed over relation tiles.
pub fn initial_scores(handle: &DatasetHandle, config: &KernelConfig) -> Vec<f64> {
    RelationGraph::new(handle, *config).row_sums()
}

/// Runs the set-level solver, or the partitioned variant when
/// `partition_size > 0`.
pub fn detect_label_noise(
    handle: &DatasetHandle,
    kconfig: &KernelConfig,
    mconfig: &MaxCutConfig,
) -> Result<NoiseScoreResult, LabelNoiseError> {
    kconfig.validate()?;
    mconfig.validate()?;
    if mconfig.partition_size > 0 {
        return detect_partitioned(handle, kconfig, mconfig);
    }
    Ok(run_set_level(&RelationGraph::new(handle, *kconfig), mconfig))
}

/// Single-node local search on the dense relation graph.
pub fn detect_label_noise_single(
    handle: &DatasetHandle,
    kconfig: &KernelConfig,
    mconfig: &MaxCutConfig,
) -> Result<NoiseScoreResult, LabelNoiseError> {
    kconfig.validate()?;
    mconfig.validate()?;
    if handle.len() > SINGLE_NODE_LIMIT {
        return Err(LabelNoiseError::TooLarge {
            n: handle.len(),
            limit: SINGLE_NODE_LIMIT,
        });
    }
    let dense = DenseWeights::from_weights(&RelationGraph::new(handle, *kconfig));
    run_single_node(&dense, mconfig)
}

/// `cut(N, T \ N) - lambda_abs * |N|` evaluated directly from weights.
pub fn objective(weights: &impl EdgeWeights, noisy: &[usize], lambda_abs: f64) -> f64 {
    let n = weights.len();
    let mut inside = vec![false; n];
    for &i in noisy {
        inside[i] = true;
    }
    let cut: f64 = noisy
        .iter()
        .map(|&i| (0..n).filter(|&j| !inside[j]).map(|j| weights.weight(i, j)).sum::<f64>())
        .sum();
    cut - lambda_abs * noisy.len() as f64
}

pub(crate) fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Averages per-checkpoint scores after scaling each vector to max-abs 1.
/// All-zero vectors are left as zeros.
pub fn ensemble_scores(per_checkpoint: &[Vec<f64>]) -> Result<Vec<f64>, LabelNoiseError> {
    let first = per_checkpoint.first().ok_or(LabelNoiseError::EmptyEnsemble)?;
    let n = first.len();
    let mut mean = vec![0.0f64; n];
    for scores in per_checkpoint {
        if scores.len() != n {
            return Err(LabelNoiseError::LengthMismatch(n, scores.len()));
        }
        let m = max_abs(scores);
        let scale = if m > 0.0 { 1.0 / m } else { 0.0 };
        for (acc, s) in mean.iter_mut().zip(scores) {
            *acc += s * scale;
        }
    }
    let k = per_checkpoint.len() as f64;
    mean.iter_mut().for_each(|v| *v /= k);
    Ok(mean)
}
