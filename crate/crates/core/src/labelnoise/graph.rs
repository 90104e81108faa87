//! Edge-weight views over a relation graph.
//!
//! Edge weights are negated relation values, `w(i, j) = -r(i, j)`, with
//! `w(i, i) = 0`. A positive weight marks a conflicting pair.

use rayon::prelude::*;

use crate::kernel::{blocks, relation_tile, relation_value, KernelConfig, DEFAULT_TILE_SIZE};
use crate::tensorio::DatasetHandle;

/// Symmetric weights of a complete graph over `0..len()`.
///
/// Implementations must return `0` on the diagonal and must be symmetric.
/// Row reductions sum columns in increasing index order so results do not
/// depend on the thread count.
pub trait EdgeWeights: Sync {
    fn len(&self) -> usize;

    fn weight(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `sum_j w(i, j)` for every node.
    fn row_sums(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| self.weight(i, j)).sum())
            .collect()
    }

    /// `sum_{j in cols} w(i, j)` for every node `i`; `cols` must be sorted.
    fn gather(&self, cols: &[usize]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|i| cols.iter().map(|&j| self.weight(i, j)).sum())
            .collect()
    }
}

/// Weights materialized in a dense `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseWeights {
    n: usize,
    values: Vec<f32>,
}

impl DenseWeights {
    /// Builds from a symmetric function; only `i < j` is evaluated.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f32) -> Self {
        let mut values = vec![0.0f32; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let w = f(i, j);
                values[i * n + j] = w;
                values[j * n + i] = w;
            }
        }
        Self { n, values }
    }

    /// Materializes any weight view. Weights are stored at `f32` precision.
    pub fn from_weights(weights: &impl EdgeWeights) -> Self {
        let n = weights.len();
        let mut values = vec![0.0f32; n * n];
        values.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = if i == j { 0.0 } else { weights.weight(i, j) as f32 };
            }
        });
        Self { n, values }
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

impl EdgeWeights for DenseWeights {
    fn len(&self) -> usize {
        self.n
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j] as f64
    }
}

/// Weights computed on demand from a dataset through the kernel.
#[derive(Debug, Clone, Copy)]
pub struct RelationGraph<'a> {
    handle: &'a DatasetHandle,
    config: KernelConfig,
    tile_size: usize,
}

impl<'a> RelationGraph<'a> {
    pub fn new(handle: &'a DatasetHandle, config: KernelConfig) -> Self {
        Self {
            handle,
            config,
            tile_size: DEFAULT_TILE_SIZE,
        }
    }

    pub fn with_tile_size(mut self, tile_size: usize) -> Self {
        self.tile_size = tile_size.max(1);
        self
    }

    pub fn handle(&self) -> &DatasetHandle {
        self.handle
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }
}

impl EdgeWeights for RelationGraph<'_> {
    fn len(&self) -> usize {
        self.handle.len()
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            -(relation_value(self.handle, i, j, &self.config) as f64)
        }
    }

    /// Streams relation tiles; each row band accumulates its column tiles
    /// in order.
    fn row_sums(&self) -> Vec<f64> {
        let n = self.len();
        let bands: Vec<_> = blocks(n, self.tile_size).collect();
        bands
            .into_par_iter()
            .flat_map_iter(|rows| {
                let mut sums = vec![0.0f64; rows.len()];
                for cols in blocks(n, self.tile_size) {
                    let tile = relation_tile(self.handle, rows.clone(), cols, &self.config);
                    for (r, acc) in sums.iter_mut().enumerate() {
                        for &v in tile.row(rows.start + r) {
                            *acc -= v as f64;
                        }
                    }
                }
                sums
            })
            .collect()
    }
}
