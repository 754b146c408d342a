//! Synthetic Gaussian-blob datasets with controllable separability.

use super::Dataset;
use crate::seed::{derive_seed, seeded_rng};
use rand_distr::{Distribution, StandardNormal};

/// Deterministic unit-norm class centers. Exposed so tests can run
/// nearest-center classification against the generating geometry.
pub fn synthetic_class_centers(classes: usize, dim: usize, seed: u64) -> Vec<Vec<f32>> {
    (0..classes)
        .map(|c| {
            let mut rng = seeded_rng(derive_seed(seed, "synthetic.center", &[c as u64]));
            let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-9 {
                let mut v = vec![0.0f32; dim];
                v[0] = 1.0;
                v
            } else {
                raw.iter().map(|&v| (v / norm) as f32).collect()
            }
        })
        .collect()
}

fn generate_with_label(
    classes: usize,
    dim: usize,
    per_class: usize,
    spread: f64,
    seed: u64,
    sample_label: &str,
) -> Dataset {
    assert!(classes >= 2, "need at least 2 classes");
    assert!(dim >= 2, "need at least 2 feature dims");
    assert!(per_class >= 1, "need at least 1 sample per class");
    assert!(spread >= 0.0, "spread must be non-negative");

    let centers = synthetic_class_centers(classes, dim, seed);
    let mut features = Vec::with_capacity(classes * per_class * dim);
    let mut labels = Vec::with_capacity(classes * per_class);
    for (c, center) in centers.iter().enumerate() {
        let mut rng = seeded_rng(derive_seed(seed, sample_label, &[c as u64]));
        for _ in 0..per_class {
            for &mu in center {
                let noise: f64 = StandardNormal.sample(&mut rng);
                features.push(mu + (spread * noise) as f32);
            }
            labels.push(c);
        }
    }
    Dataset::new(features, dim, labels, classes).expect("generated dataset is always valid")
}

/// Gaussian blobs: class `c` is centered at a deterministic unit-norm center
/// with isotropic standard deviation `spread`; exactly `per_class` samples
/// per class, ordered class-major.
pub fn generate_synthetic(
    classes: usize,
    dim: usize,
    per_class: usize,
    spread: f64,
    seed: u64,
) -> Dataset {
    generate_with_label(classes, dim, per_class, spread, seed, "synthetic.sample")
}

/// A held-out set drawn from the same class geometry as
/// [`generate_synthetic`] with the same seed, but with an independent noise
/// stream, so train and test describe the same task.
pub fn generate_synthetic_holdout(
    classes: usize,
    dim: usize,
    per_class: usize,
    spread: f64,
    seed: u64,
) -> Dataset {
    generate_with_label(classes, dim, per_class, spread, seed, "synthetic.holdout")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_per_class_counts() {
        let ds = generate_synthetic(10, 4, 100, 0.3, 1);
        assert_eq!(ds.len(), 1000);
        let mut counts = [0usize; 10];
        for &l in ds.labels() {
            counts[l] += 1;
        }
        assert!(counts.iter().all(|&c| c == 100));
    }

    #[test]
    fn zero_spread_collapses_to_centers() {
        let ds = generate_synthetic(3, 5, 4, 0.0, 9);
        let centers = synthetic_class_centers(3, 5, 9);
        for i in 0..ds.len() {
            assert_eq!(ds.feature_row(i), &centers[ds.label(i)][..]);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_synthetic(4, 6, 20, 0.2, 5);
        let b = generate_synthetic(4, 6, 20, 0.2, 5);
        for i in 0..a.len() {
            assert_eq!(a.feature_row(i), b.feature_row(i));
        }
    }

    #[test]
    fn holdout_shares_centers_but_not_samples() {
        let train = generate_synthetic(3, 5, 10, 0.0, 8);
        let holdout = generate_synthetic_holdout(3, 5, 10, 0.0, 8);
        // Zero spread: both collapse onto the shared centers.
        for i in 0..train.len() {
            assert_eq!(train.feature_row(i), holdout.feature_row(i));
        }
        let train = generate_synthetic(3, 5, 10, 0.2, 8);
        let holdout = generate_synthetic_holdout(3, 5, 10, 0.2, 8);
        assert_ne!(train.feature_row(0), holdout.feature_row(0));
    }

    #[test]
    fn nearest_center_classifier_separates_tight_blobs() {
        let ds = generate_synthetic(10, 16, 100, 0.1, 3);
        let centers = synthetic_class_centers(10, 16, 3);
        let mut correct = 0usize;
        for i in 0..ds.len() {
            let x = ds.feature_row(i);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, mu) in centers.iter().enumerate() {
                let d: f64 = x
                    .iter()
                    .zip(mu)
                    .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
                    .sum();
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if best == ds.label(i) {
                correct += 1;
            }
        }
        let acc = correct as f64 / ds.len() as f64;
        assert!(acc > 0.99, "nearest-center accuracy {acc}");
    }
}
