use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{run_set_level, LabelNoiseError, MaxCutConfig, NoiseScoreResult, RelationGraph};
use crate::kernel::KernelConfig;
use crate::tensorio::DatasetHandle;

/// Splits a seeded shuffle of the samples into consecutive partitions of
/// `partition_size` and runs the set-level solver on each independently.
///
/// Indices inside a partition keep their original relative order, so a
/// single partition reproduces the unpartitioned run exactly.
pub fn detect_partitioned(
    handle: &DatasetHandle,
    kconfig: &KernelConfig,
    mconfig: &MaxCutConfig,
) -> Result<NoiseScoreResult, LabelNoiseError> {
    kconfig.validate()?;
    mconfig.validate()?;
    let n = handle.len();
    let size = mconfig.partition_size;
    if size < 2 || size > n {
        return Err(LabelNoiseError::InvalidPartitionSize { size, n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mconfig.seed));
    let parts: Vec<Vec<usize>> = order
        .chunks(size)
        .map(|c| {
            let mut part = c.to_vec();
            part.sort_unstable();
            part
        })
        .collect();

    let results: Vec<NoiseScoreResult> = parts
        .par_iter()
        .map(|part| {
            let sub = handle.select(part);
            run_set_level(&RelationGraph::new(&sub, *kconfig), mconfig)
        })
        .collect();

    let mut scores = vec![0.0; n];
    let mut noisy_set = Vec::new();
    for (part, res) in parts.iter().zip(&results) {
        for (&global, &s) in part.iter().zip(&res.scores) {
            scores[global] = s;
        }
        noisy_set.extend(res.noisy_set.iter().map(|&local| part[local]));
    }
    noisy_set.sort_unstable();

    let iterations = results.iter().map(|r| r.iterations).max().unwrap_or(0);
    // per-iteration sum of partition objectives, holding finished partitions
    // at their last value
    let objective_trace = (0..iterations)
        .map(|t| {
            results
                .iter()
                .map(|r| r.objective_trace.get(t).or(r.objective_trace.last()).copied().unwrap_or(0.0))
                .sum()
        })
        .collect();

    Ok(NoiseScoreResult {
        scores,
        noisy_set,
        iterations,
        converged: results.iter().all(|r| r.converged),
        objective_trace,
    })
}
