//! Dirichlet label-skew partitioning.
//!
//! For each class, proportions are drawn from `Dir(alpha * 1_M)` and the
//! class's shuffled indices are split among clients by cumulative
//! proportions. A repair pass then moves single random indices from the
//! currently largest client to any client below `min_size`.

use super::Dataset;
use crate::seed::{derive_seed, seeded_rng};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("dirichlet alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("need at least one client")]
    NoClients,
    #[error("min_size {min_size} infeasible: {clients} clients need {needed} samples, dataset has {available}")]
    InfeasibleMinSize {
        min_size: usize,
        clients: usize,
        needed: usize,
        available: usize,
    },
}

/// Dirichlet partition parameters. Smaller `alpha` produces more skewed
/// per-client label distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSpec {
    pub alpha: f64,
    pub num_clients: usize,
    pub min_size: usize,
    pub seed: u64,
}

impl DirichletSpec {
    pub fn validate(&self) -> Result<(), PartitionError> {
        if self.alpha <= 0.0 || self.alpha.is_nan() {
            return Err(PartitionError::BadAlpha(self.alpha));
        }
        if self.num_clients == 0 {
            return Err(PartitionError::NoClients);
        }
        Ok(())
    }
}

/// Disjoint per-client index lists over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientPartition {
    index_lists: Vec<Vec<usize>>,
}

impl ClientPartition {
    pub fn num_clients(&self) -> usize {
        self.index_lists.len()
    }

    pub fn client_indices(&self, client: usize) -> &[usize] {
        &self.index_lists[client]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.index_lists.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.index_lists.iter().map(Vec::len).sum()
    }

    /// Stable FNV-1a digest of the index structure; two runs share a
    /// partition iff their checksums match.
    pub fn checksum(&self) -> u64 {
        const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = FNV_OFFSET;
        let absorb = |h: u64, v: u64| {
            let mut h = h;
            for b in v.to_le_bytes() {
                h = (h ^ b as u64).wrapping_mul(FNV_PRIME);
            }
            h
        };
        h = absorb(h, self.index_lists.len() as u64);
        for list in &self.index_lists {
            h = absorb(h, list.len() as u64);
            for &i in list {
                h = absorb(h, i as u64);
            }
        }
        h
    }
}

/// Partition `ds` across `spec.num_clients` clients with per-class
/// `Dir(alpha)` proportions, deterministic in `spec.seed`.
pub fn dirichlet_partition(
    ds: &Dataset,
    spec: &DirichletSpec,
) -> Result<ClientPartition, PartitionError> {
    spec.validate()?;
    let m = spec.num_clients;
    let needed = m * spec.min_size;
    if ds.len() < needed {
        return Err(PartitionError::InfeasibleMinSize {
            min_size: spec.min_size,
            clients: m,
            needed,
            available: ds.len(),
        });
    }

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.classes()];
    for i in 0..ds.len() {
        by_class[ds.label(i)].push(i);
    }

    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (c, mut indices) in by_class.into_iter().enumerate() {
        if indices.is_empty() {
            continue;
        }
        let mut rng = seeded_rng(derive_seed(spec.seed, "dirichlet.class", &[c as u64]));
        let gamma = Gamma::new(spec.alpha, 1.0).expect("alpha validated positive");
        let draws: Vec<f64> = (0..m).map(|_| gamma.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        let proportions: Vec<f64> = if total > 0.0 && total.is_finite() {
            draws.iter().map(|&g| g / total).collect()
        } else {
            // Tiny alpha can underflow every gamma draw to zero.
            vec![1.0 / m as f64; m]
        };

        indices.shuffle(&mut rng);
        let n_c = indices.len();
        let mut cum = 0.0;
        let mut start = 0usize;
        for (k, &p) in proportions.iter().enumerate() {
            cum += p;
            let end = if k + 1 == m {
                n_c
            } else {
                ((cum * n_c as f64).floor() as usize).min(n_c)
            };
            lists[k].extend_from_slice(&indices[start..end.max(start)]);
            start = end.max(start);
        }
    }

    // Repair: move one random index at a time from the largest client to the
    // first deficient one. Feasibility was checked above, so the largest
    // client always holds more than min_size while any deficit remains.
    let mut repair_rng = seeded_rng(derive_seed(spec.seed, "dirichlet.repair", &[]));
    while let Some(deficient) = (0..m).find(|&i| lists[i].len() < spec.min_size) {
        let mut donor = 0usize;
        for i in 1..m {
            if lists[i].len() > lists[donor].len() {
                donor = i;
            }
        }
        debug_assert!(lists[donor].len() > spec.min_size);
        let pos = repair_rng.random_range(0..lists[donor].len());
        let idx = lists[donor].swap_remove(pos);
        lists[deficient].push(idx);
    }

    Ok(ClientPartition { index_lists: lists })
}

/// Per-client label histogram.
pub fn label_histogram(ds: &Dataset, part: &ClientPartition, client: usize) -> Vec<usize> {
    let mut hist = vec![0usize; ds.classes()];
    for &i in part.client_indices(client) {
        hist[ds.label(i)] += 1;
    }
    hist
}

/// Shannon entropy (nats) of a label histogram.
pub fn label_entropy(hist: &[usize]) -> f64 {
    let total: usize = hist.iter().sum();
    if total == 0 {
        return 0.0;
    }
    hist.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum()
}

/// Mean per-client label entropy; the skew diagnostic reported by
/// `partition-stats`.
pub fn mean_label_entropy(ds: &Dataset, part: &ClientPartition) -> f64 {
    let m = part.num_clients();
    (0..m)
        .map(|i| label_entropy(&label_histogram(ds, part, i)))
        .sum::<f64>()
        / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;
    use std::collections::BTreeSet;

    fn balanced_ds() -> Dataset {
        generate_synthetic(10, 4, 100, 0.2, 7)
    }

    fn spec(alpha: f64, seed: u64) -> DirichletSpec {
        DirichletSpec {
            alpha,
            num_clients: 10,
            min_size: 10,
            seed,
        }
    }

    #[test]
    fn partition_is_a_partition() {
        let ds = balanced_ds();
        let part = dirichlet_partition(&ds, &spec(0.3, 1)).unwrap();
        let mut seen = BTreeSet::new();
        for i in 0..part.num_clients() {
            for &idx in part.client_indices(i) {
                assert!(idx < ds.len());
                assert!(seen.insert(idx), "duplicate index {idx}");
            }
        }
        assert_eq!(seen.len(), ds.len());
        assert_eq!(part.total(), ds.len());
    }

    #[test]
    fn min_size_is_enforced() {
        let ds = balanced_ds();
        for seed in 0..5 {
            let part = dirichlet_partition(&ds, &spec(0.05, seed)).unwrap();
            assert!(part.sizes().iter().all(|&s| s >= 10), "{:?}", part.sizes());
        }
    }

    #[test]
    fn infeasible_min_size_is_a_config_error() {
        let ds = generate_synthetic(2, 2, 4, 0.1, 0);
        let bad = DirichletSpec {
            alpha: 1.0,
            num_clients: 3,
            min_size: 5,
            seed: 0,
        };
        assert!(matches!(
            dirichlet_partition(&ds, &bad),
            Err(PartitionError::InfeasibleMinSize { needed: 15, available: 8, .. })
        ));
    }

    #[test]
    fn partition_is_deterministic_in_seed() {
        let ds = balanced_ds();
        let a = dirichlet_partition(&ds, &spec(0.5, 3)).unwrap();
        let b = dirichlet_partition(&ds, &spec(0.5, 3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.checksum(), b.checksum());
        let c = dirichlet_partition(&ds, &spec(0.5, 4)).unwrap();
        assert_ne!(a.checksum(), c.checksum());
    }

    #[test]
    fn huge_alpha_is_near_uniform() {
        let ds = balanced_ds();
        for seed in 0..5 {
            let part = dirichlet_partition(&ds, &spec(1e6, seed)).unwrap();
            for i in 0..part.num_clients() {
                let hist = label_histogram(&ds, &part, i);
                for &count in &hist {
                    // 100 samples/class over 10 clients -> ~10 per cell.
                    let rel = (count as f64 - 10.0).abs() / 10.0;
                    assert!(rel <= 0.1, "seed {seed} client {i} hist {hist:?}");
                }
            }
        }
    }

    #[test]
    fn smaller_alpha_means_lower_entropy() {
        let ds = balanced_ds();
        for seed in 0..5 {
            let skewed = dirichlet_partition(&ds, &spec(0.1, seed)).unwrap();
            let uniform = dirichlet_partition(&ds, &spec(1e6, seed)).unwrap();
            assert!(
                mean_label_entropy(&ds, &skewed) < mean_label_entropy(&ds, &uniform),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn entropy_is_monotone_in_alpha_on_average() {
        let ds = balanced_ds();
        let alphas = [0.1, 0.5, 1.0, 1e6];
        let mut means = Vec::new();
        for &alpha in &alphas {
            let avg: f64 = (0..5)
                .map(|seed| {
                    let part = dirichlet_partition(&ds, &spec(alpha, seed)).unwrap();
                    mean_label_entropy(&ds, &part)
                })
                .sum::<f64>()
                / 5.0;
            means.push(avg);
        }
        for w in means.windows(2) {
            assert!(w[0] <= w[1], "entropy means not monotone: {means:?}");
        }
    }

    #[test]
    fn entropy_helpers() {
        assert_eq!(label_entropy(&[0, 0]), 0.0);
        assert_eq!(label_entropy(&[5, 0]), 0.0);
        assert!((label_entropy(&[5, 5]) - (2.0f64).ln().abs()).abs() < 1e-12);
    }
}
