//! Synthetic data shared by the integration suites: Gaussian blobs and a
//! softmax linear head fitted to them by full-batch gradient descent.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use relgraph::tensorio::{FeatureMatrix, LabelVector, LogitMatrix, ProbMatrix};

pub struct Blobs {
    pub dim: usize,
    pub centers: Vec<Vec<f64>>,
    pub features: Vec<f32>,
    pub labels: Vec<i64>,
}

impl Blobs {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_matrix(&self) -> FeatureMatrix {
        FeatureMatrix::new(self.len(), self.dim, self.features.clone()).unwrap()
    }

    pub fn label_vector(&self) -> LabelVector {
        LabelVector::new(self.labels.clone()).unwrap()
    }
}

/// `classes` centers drawn from N(0, spread^2 I), redrawn until every pair is
/// at least `min_dist` apart.
pub fn blob_centers(
    classes: usize,
    dim: usize,
    min_dist: f64,
    spread: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    loop {
        let centers: Vec<Vec<f64>> = (0..classes)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(rng);
                        spread * z
                    })
                    .collect::<Vec<f64>>()
            })
            .collect();
        let ok = (0..classes).all(|a| {
            (a + 1..classes).all(|b| distance(&centers[a], &centers[b]) >= min_dist)
        });
        if ok {
            return centers;
        }
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `n` unit-variance samples split evenly over the centers.
pub fn sample_blobs(centers: &[Vec<f64>], n: usize, rng: &mut ChaCha8Rng) -> Blobs {
    let dim = centers[0].len();
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % centers.len();
        for &mu in &centers[c] {
            let z: f64 = StandardNormal.sample(rng);
            features.push((mu + z) as f32);
        }
        labels.push(c as i64);
    }
    Blobs {
        dim,
        centers: centers.to_vec(),
        features,
        labels,
    }
}

/// Points uniform in `[-half_width, half_width]^dim`, each at least
/// `min_dist` from every center.
pub fn cube_outliers(
    centers: &[Vec<f64>],
    n: usize,
    half_width: f64,
    min_dist: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f32> {
    let dim = centers[0].len();
    let mut out = Vec::with_capacity(n * dim);
    let mut count = 0;
    while count < n {
        let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-half_width..half_width)).collect();
        if centers.iter().all(|c| distance(c, &p) >= min_dist) {
            out.extend(p.iter().map(|&v| v as f32));
            count += 1;
        }
    }
    out
}

/// Multinomial logistic regression `softmax(W x + b)`.
pub struct SoftmaxHead {
    pub classes: usize,
    pub dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl SoftmaxHead {
    /// Full-batch gradient descent on mean cross-entropy plus `l2 * |W|^2 / 2`.
    pub fn fit(features: &[f32], labels: &[i64], classes: usize, dim: usize, epochs: usize, lr: f64, l2: f64) -> Self {
        let n = labels.len();
        let mut head = SoftmaxHead {
            classes,
            dim,
            weights: vec![0.0; classes * dim],
            bias: vec![0.0; classes],
        };
        for _ in 0..epochs {
            let mut gw = vec![0.0; classes * dim];
            let mut gb = vec![0.0; classes];
            for i in 0..n {
                let x = &features[i * dim..(i + 1) * dim];
                let p = head.probs_row(x);
                for c in 0..classes {
                    let err = p[c] - if labels[i] as usize == c { 1.0 } else { 0.0 };
                    gb[c] += err;
                    for k in 0..dim {
                        gw[c * dim + k] += err * x[k] as f64;
                    }
                }
            }
            for (w, g) in head.weights.iter_mut().zip(&gw) {
                *w -= lr * (g / n as f64 + l2 * *w);
            }
            for (b, g) in head.bias.iter_mut().zip(&gb) {
                *b -= lr * g / n as f64;
            }
        }
        head
    }

    pub fn logits_row(&self, x: &[f32]) -> Vec<f64> {
        (0..self.classes)
            .map(|c| {
                self.bias[c]
                    + self.weights[c * self.dim..(c + 1) * self.dim]
                        .iter()
                        .zip(x)
                        .map(|(w, &v)| w * v as f64)
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn probs_row(&self, x: &[f32]) -> Vec<f64> {
        let z = self.logits_row(x);
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|v| v / s).collect()
    }

    pub fn probs(&self, features: &[f32]) -> ProbMatrix {
        let n = features.len() / self.dim;
        let values: Vec<f32> = features
            .chunks(self.dim)
            .flat_map(|x| self.probs_row(x).into_iter().map(|p| p as f32))
            .collect();
        ProbMatrix::new(n, self.classes, values).unwrap()
    }

    pub fn logits(&self, features: &[f32]) -> LogitMatrix {
        let n = features.len() / self.dim;
        let values: Vec<f32> = features
            .chunks(self.dim)
            .flat_map(|x| self.logits_row(x).into_iter().map(|p| p as f32))
            .collect();
        LogitMatrix::new(n, self.classes, values).unwrap()
    }
}

/// Random features, one-hot-ish probabilities and labels for property tests.
pub fn random_dataset(
    n: usize,
    dim: usize,
    classes: usize,
    rng: &mut ChaCha8Rng,
) -> relgraph::DatasetHandle {
    let features: Vec<f32> = (0..n * dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    let mut probs = Vec::with_capacity(n * classes);
    for _ in 0..n {
        let raw: Vec<f64> = (0..classes).map(|_| rng.gen_range(0.05f64..1.0)).collect();
        let s: f64 = raw.iter().sum();
        probs.extend(raw.iter().map(|v| (v / s) as f32));
    }
    let labels: Vec<i64> = (0..n).map(|_| rng.gen_range(0..classes as i64)).collect();
    relgraph::validate_dataset(
        FeatureMatrix::new(n, dim, features).unwrap(),
        ProbMatrix::new(n, classes, probs).unwrap(),
        LabelVector::new(labels).unwrap(),
    )
    .unwrap()
}
