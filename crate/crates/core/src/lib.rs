//! Data diagnosis over feature-embedding relation graphs.
//!
//! Given model embeddings, predicted probabilities and assigned labels, the
//! toolkit scores samples for label errors ([`labelnoise`]) and for being
//! outliers ([`outlier`]). Both build on a bounded similarity kernel
//! ([`kernel`]). Baseline scorers, detection metrics, synthetic noise
//! injection and relation-map export support evaluation and inspection.
//! Tensors move through the RGT1 binary format ([`tensorio`]).

pub mod baselines;
pub mod cli;
pub mod kernel;
pub mod labelnoise;
pub mod metrics;
pub mod noisegen;
pub mod outlier;
pub mod relmap;
pub mod tensorio;

pub use kernel::{KernelConfig, KernelKind};
pub use labelnoise::{detect_label_noise, MaxCutConfig, NoiseScoreResult};
pub use tensorio::{validate_dataset, DatasetHandle, Embeddings, FeatureMatrix, LabelVector, ProbMatrix};
