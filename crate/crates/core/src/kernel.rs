//! Similarity kernel and signed relation values.
//!
//! For samples `i`, `j` the kernel is `|s(f_i, f_j) * c(p_i, p_j)|^t`, where
//! `s` is the truncated cosine similarity of the feature rows (or an RBF
//! kernel) and `c = p_i . p_j` is the probability that both samples get the
//! same predicted class. Bases below `clamp` are zeroed before
//! exponentiation. The relation value carries the kernel with a `+` sign
//! when the assigned labels match and `-` otherwise.
//!
//! All inner products accumulate in `f64` in index order, so every value is
//! symmetric and independent of how work is split across threads. Kernel
//! and relation values are returned at `f32` storage precision.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::tensorio::{DatasetHandle, Embeddings, ProbMatrix};

pub const DEFAULT_CLAMP: f64 = 0.03;
pub const DEFAULT_TILE_SIZE: usize = 1024;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("temperature must be positive, got {0}")]
    Temperature(f64),
    #[error("clamp must lie in [0, 1), got {0}")]
    Clamp(f64),
    #[error("rbf gamma must be positive, got {0}")]
    Gamma(f64),
    #[error("feature dimensions differ: {0} vs {1}")]
    FeatureDims(usize, usize),
    #[error("class counts differ: {0} vs {1}")]
    ClassCounts(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    TruncatedCosine,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub temperature: f64,
    pub clamp: f64,
    pub use_compatibility: bool,
    pub rbf_gamma: f64,
}

impl KernelConfig {
    /// Truncated-cosine kernel with compatibility, the given temperature and
    /// the default clamp.
    pub fn with_temperature(temperature: f64) -> Self {
        Self {
            kind: KernelKind::TruncatedCosine,
            temperature,
            clamp: DEFAULT_CLAMP,
            use_compatibility: true,
            rbf_gamma: 1.0,
        }
    }

    /// Defaults for label-error detection (t = 4).
    pub fn label_error() -> Self {
        Self::with_temperature(4.0)
    }

    /// Defaults for training-set outlier scoring (t = 6).
    pub fn outlier() -> Self {
        Self::with_temperature(6.0)
    }

    /// Defaults for OOD scoring (t = 1).
    pub fn ood() -> Self {
        Self::with_temperature(1.0)
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(KernelError::Temperature(self.temperature));
        }
        if !(0.0..1.0).contains(&self.clamp) {
            return Err(KernelError::Clamp(self.clamp));
        }
        if self.kind == KernelKind::Rbf && !(self.rbf_gamma > 0.0 && self.rbf_gamma.is_finite()) {
            return Err(KernelError::Gamma(self.rbf_gamma));
        }
        Ok(())
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self::label_error()
    }
}

/// Checks that two collections can be compared under the kernel.
pub fn check_compatible(a: &Embeddings, b: &Embeddings) -> Result<(), KernelError> {
    if a.features().cols() != b.features().cols() {
        return Err(KernelError::FeatureDims(a.features().cols(), b.features().cols()));
    }
    if a.probs().classes() != b.probs().classes() {
        return Err(KernelError::ClassCounts(a.probs().classes(), b.probs().classes()));
    }
    Ok(())
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

/// Feature similarity in [0, 1]: truncated cosine (0 against a zero row)
/// or `exp(-gamma * ||f_i - f_j||^2)`.
pub fn feature_similarity(
    a: &Embeddings,
    i: usize,
    b: &Embeddings,
    j: usize,
    config: &KernelConfig,
) -> f64 {
    let fi = a.features().row(i);
    let fj = b.features().row(j);
    match config.kind {
        KernelKind::TruncatedCosine => {
            let denom = a.norms()[i] * b.norms()[j];
            if denom == 0.0 {
                return 0.0;
            }
            (dot(fi, fj) / denom).clamp(0.0, 1.0)
        }
        KernelKind::Rbf => {
            let sq: f64 = fi
                .iter()
                .zip(fj)
                .map(|(&x, &y)| {
                    let d = x as f64 - y as f64;
                    d * d
                })
                .sum();
            (-config.rbf_gamma * sq).exp()
        }
    }
}

/// Probability that samples `i` and `j` are assigned the same class.
pub fn compatibility(a: &ProbMatrix, i: usize, b: &ProbMatrix, j: usize) -> f64 {
    dot(a.row(i), b.row(j)).clamp(0.0, 1.0)
}

/// Applies the clamp and temperature to a base value in [0, 1].
#[inline]
pub fn sharpen(base: f64, config: &KernelConfig) -> f64 {
    if base < config.clamp || base <= 0.0 {
        0.0
    } else {
        base.powf(config.temperature)
    }
}

/// Kernel value between row `i` of `a` and row `j` of `b`.
pub fn kernel_value(
    a: &Embeddings,
    i: usize,
    b: &Embeddings,
    j: usize,
    config: &KernelConfig,
) -> f32 {
    let s = feature_similarity(a, i, b, j, config);
    let base = if config.use_compatibility {
        if s == 0.0 {
            return 0.0;
        }
        s * compatibility(a.probs(), i, b.probs(), j)
    } else {
        s
    };
    sharpen(base, config) as f32
}

/// Signed relation value: `+k` for matching labels, `-k` otherwise.
///
/// Defined for `i == j` too; graph code treats self-edges as zero weight.
pub fn relation_value(handle: &DatasetHandle, i: usize, j: usize, config: &KernelConfig) -> f32 {
    let emb = handle.embeddings();
    let k = kernel_value(emb, i, emb, j, config);
    if handle.labels().get(i) == handle.labels().get(j) {
        k
    } else {
        -k
    }
}

/// A block of kernel or relation values, row-major over `rows x cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTile {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
    pub values: Vec<f32>,
}

impl KernelTile {
    /// Value at global indices `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f32 {
        let width = self.cols.len();
        self.values[(i - self.rows.start) * width + (j - self.cols.start)]
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let width = self.cols.len();
        let r = i - self.rows.start;
        &self.values[r * width..(r + 1) * width]
    }
}

fn fill_tile(rows: Range<usize>, cols: Range<usize>, f: impl Fn(usize, usize) -> f32 + Sync) -> KernelTile {
    let width = cols.len();
    let mut values = vec![0.0f32; rows.len() * width];
    if width > 0 {
        values
            .par_chunks_mut(width)
            .zip(rows.clone())
            .for_each(|(out, i)| {
                for (slot, j) in out.iter_mut().zip(cols.clone()) {
                    *slot = f(i, j);
                }
            });
    }
    KernelTile { rows, cols, values }
}

/// Kernel values between `a[rows]` and `b[cols]`.
pub fn kernel_tile(
    a: &Embeddings,
    rows: Range<usize>,
    b: &Embeddings,
    cols: Range<usize>,
    config: &KernelConfig,
) -> KernelTile {
    fill_tile(rows, cols, |i, j| kernel_value(a, i, b, j, config))
}

/// Relation values over a block of the dataset; entries with `i == j` are 0.
pub fn relation_tile(
    handle: &DatasetHandle,
    rows: Range<usize>,
    cols: Range<usize>,
    config: &KernelConfig,
) -> KernelTile {
    fill_tile(rows, cols, |i, j| {
        if i == j {
            0.0
        } else {
            relation_value(handle, i, j, config)
        }
    })
}

/// Splits `0..n` into consecutive half-open blocks of at most `size`.
pub fn blocks(n: usize, size: usize) -> impl Iterator<Item = Range<usize>> + Clone {
    let size = size.max(1);
    (0..n.div_ceil(size)).map(move |b| b * size..((b + 1) * size).min(n))
}
