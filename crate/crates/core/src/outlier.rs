//! Outlier scores from aggregated kernel mass.
//!
//! A query row is scored by `1 / sum_{i in S} k(x, x_i)` against a reference
//! subset `S`. Rows with no kernel mass at all get `+inf`. Query and
//! reference are separate collections: a query row that also appears in the
//! reference keeps its self term.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kernel::{check_compatible, kernel_value, KernelConfig, KernelError};
use crate::tensorio::Embeddings;

#[derive(Debug, Error, PartialEq)]
pub enum OutlierError {
    #[error("subset size {size} exceeds reference size {n}")]
    SubsetTooLarge { size: usize, n: usize },
    #[error("reference index {index} out of range for {n} rows")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(KernelError),
    #[error(transparent)]
    Kernel(KernelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutlierConfig {
    /// 0 uses the whole reference set.
    pub subset_size: usize,
    pub seed: u64,
    pub kernel: KernelConfig,
}

impl OutlierConfig {
    /// OOD scoring defaults (t = 1).
    pub fn ood() -> Self {
        Self {
            subset_size: 0,
            seed: 0,
            kernel: KernelConfig::ood(),
        }
    }

    /// Training-set outlier defaults (t = 6).
    pub fn training_outliers() -> Self {
        Self {
            kernel: KernelConfig::outlier(),
            ..Self::ood()
        }
    }
}

impl Default for OutlierConfig {
    fn default() -> Self {
        Self::ood()
    }
}

/// Uniform sample of reference indices without replacement, sorted.
pub fn sample_reference(n: usize, config: &OutlierConfig) -> Result<Vec<usize>, OutlierError> {
    let size = config.subset_size;
    if size > n {
        return Err(OutlierError::SubsetTooLarge { size, n });
    }
    if size == 0 || size == n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, size).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// One score per query row. Denominators accumulate over `subset` in the
/// order given.
pub fn outlier_scores(
    query: &Embeddings,
    reference: &Embeddings,
    subset: &[usize],
    kernel: &KernelConfig,
) -> Result<Vec<f64>, OutlierError> {
    kernel.validate().map_err(OutlierError::Kernel)?;
    check_compatible(query, reference).map_err(OutlierError::DimensionMismatch)?;
    if let Some(&index) = subset.iter().find(|&&i| i >= reference.len()) {
        return Err(OutlierError::IndexOutOfRange {
            index,
            n: reference.len(),
        });
    }
    Ok((0..query.len())
        .into_par_iter()
        .map(|q| {
            let mass: f64 = subset
                .iter()
                .map(|&i| kernel_value(query, q, reference, i, kernel) as f64)
                .sum();
            if mass > 0.0 {
                1.0 / mass
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorio::{FeatureMatrix, ProbMatrix};

    fn emb(features: Vec<f32>, d: usize, probs: Vec<f32>, c: usize) -> Embeddings {
        let n = features.len() / d;
        Embeddings::new(
            FeatureMatrix::new(n, d, features).unwrap(),
            ProbMatrix::new(n, c, probs).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn sampling_examples() {
        let cfg = OutlierConfig::default();
        assert_eq!(sample_reference(5, &cfg).unwrap(), vec![0, 1, 2, 3, 4]);
        let all = OutlierConfig {
            subset_size: 5,
            ..cfg
        };
        assert_eq!(sample_reference(5, &all).unwrap(), vec![0, 1, 2, 3, 4]);
        let big = OutlierConfig {
            subset_size: 6,
            ..cfg
        };
        assert_eq!(
            sample_reference(5, &big),
            Err(OutlierError::SubsetTooLarge { size: 6, n: 5 })
        );
    }

    #[test]
    fn sampling_is_seeded() {
        let a = OutlierConfig {
            subset_size: 100,
            seed: 1,
            ..Default::default()
        };
        let b = OutlierConfig { seed: 2, ..a };
        let s1 = sample_reference(10_000, &a).unwrap();
        assert_eq!(s1, sample_reference(10_000, &a).unwrap());
        assert_ne!(s1, sample_reference(10_000, &b).unwrap());
        assert!(s1.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn identical_rows_score_inverse_count() {
        let m = 4;
        let reference = emb(vec![1.0, 2.0].repeat(m), 2, vec![1.0, 0.0].repeat(m), 2);
        let query = emb(vec![2.0, 4.0], 2, vec![1.0, 0.0], 2);
        let s = outlier_scores(&query, &reference, &[0, 1, 2, 3], &KernelConfig::ood()).unwrap();
        assert!((s[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_query_is_infinite() {
        let reference = emb(vec![1.0, 0.0, 2.0, 0.0], 2, vec![1.0; 2], 1);
        let query = emb(vec![0.0, 1.0], 2, vec![1.0], 1);
        let s = outlier_scores(&query, &reference, &[0, 1], &KernelConfig::ood()).unwrap();
        assert_eq!(s[0], f64::INFINITY);
    }

    #[test]
    fn hand_mass() {
        // kernel terms 0.5 and 0.25 through the compatibility factor
        let reference = emb(vec![1.0, 1.0], 1, vec![0.5, 0.5, 0.25, 0.75], 2);
        let query = emb(vec![1.0], 1, vec![1.0, 0.0], 2);
        let s = outlier_scores(&query, &reference, &[0, 1], &KernelConfig::ood()).unwrap();
        assert!((s[0] - 1.0 / 0.75).abs() < 1e-7);
    }

    #[test]
    fn dimension_mismatch() {
        let reference = emb(vec![1.0, 1.0], 2, vec![1.0], 1);
        let query = emb(vec![1.0], 1, vec![1.0], 1);
        assert!(matches!(
            outlier_scores(&query, &reference, &[0], &KernelConfig::ood()),
            Err(OutlierError::DimensionMismatch(_))
        ));
    }
}
