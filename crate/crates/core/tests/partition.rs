mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relgraph::labelnoise::{detect_partitioned, LabelNoiseError};
use relgraph::metrics::evaluate;
use relgraph::noisegen::{inject_noise, NoiseSpec};
use relgraph::tensorio::{FeatureMatrix, LabelVector, ProbMatrix};
use relgraph::{detect_label_noise, validate_dataset, KernelConfig, MaxCutConfig};

use common::{blob_centers, random_dataset, sample_blobs, SoftmaxHead};

#[test]
fn one_partition_reproduces_full_run() {
    let h = random_dataset(40, 4, 3, &mut ChaCha8Rng::seed_from_u64(11));
    let kcfg = KernelConfig::with_temperature(2.0);
    let full = detect_label_noise(&h, &kcfg, &MaxCutConfig::default()).unwrap();
    let part = detect_partitioned(
        &h,
        &kcfg,
        &MaxCutConfig {
            partition_size: 40,
            seed: 5,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(full, part);
}

#[test]
fn clean_clusters_stay_clean_under_any_split() {
    // two orthogonal clusters, each consistently labeled
    let n = 12;
    let features: Vec<f32> = (0..n).flat_map(|i| if i < 6 { [1.0, 0.0] } else { [0.0, 1.0] }).collect();
    let probs: Vec<f32> = (0..n).flat_map(|i| if i < 6 { [1.0, 0.0] } else { [0.0, 1.0] }).collect();
    let labels: Vec<i64> = (0..n).map(|i| (i >= 6) as i64).collect();
    let h = validate_dataset(
        FeatureMatrix::new(n, 2, features).unwrap(),
        ProbMatrix::new(n, 2, probs).unwrap(),
        LabelVector::new(labels).unwrap(),
    )
    .unwrap();
    for size in 2..=n {
        for seed in 0..4 {
            let cfg = MaxCutConfig {
                partition_size: size,
                seed,
                ..Default::default()
            };
            let r = detect_partitioned(&h, &KernelConfig::label_error(), &cfg).unwrap();
            assert!(r.noisy_set.is_empty(), "size {size} seed {seed}");
        }
    }
}

#[test]
fn partition_size_bounds() {
    let h = random_dataset(5, 2, 2, &mut ChaCha8Rng::seed_from_u64(0));
    for size in [1, 6] {
        let cfg = MaxCutConfig {
            partition_size: size,
            ..Default::default()
        };
        assert_eq!(
            detect_partitioned(&h, &KernelConfig::label_error(), &cfg),
            Err(LabelNoiseError::InvalidPartitionSize { size, n: 5 })
        );
    }
}

#[test]
fn quarter_partitions_keep_ap_on_noisy_blobs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let centers = blob_centers(10, 16, 6.0, 2.0, &mut rng);
    let blobs = sample_blobs(&centers, 2000, &mut rng);
    let head = SoftmaxHead::fit(&blobs.features, &blobs.labels, 10, 16, 150, 0.5, 1e-3);
    let probs = head.probs(&blobs.features);
    let noisy = inject_noise(&probs, &blobs.label_vector(), &NoiseSpec { ratio: 0.1, seed: 21 }).unwrap();
    let h = validate_dataset(blobs.feature_matrix(), probs, noisy.labels.clone()).unwrap();

    let kcfg = KernelConfig::label_error();
    let full = detect_label_noise(&h, &kcfg, &MaxCutConfig::default()).unwrap();
    let part = detect_label_noise(
        &h,
        &kcfg,
        &MaxCutConfig {
            partition_size: h.len() / 4,
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let ap_full = evaluate(&full.scores, &noisy.flipped).unwrap().ap;
    let ap_part = evaluate(&part.scores, &noisy.flipped).unwrap().ap;
    assert!((ap_full - ap_part).abs() <= 0.05, "full {ap_full} partitioned {ap_part}");
}
