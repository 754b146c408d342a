//! Deterministic epoch batching: shuffle a client's indices with a seed
//! derived from `(epoch_seed, client)`, then chunk.

use super::{ClientPartition, Dataset};
use crate::model::Batch;
use crate::seed::{derive_seed, seeded_rng};
use rand::seq::SliceRandom;

/// Ordered batches for one client and one epoch. The last partial chunk is
/// kept if it holds at least one sample.
pub fn batch_iter(
    ds: &Dataset,
    part: &ClientPartition,
    client: usize,
    batch_size: usize,
    epoch_seed: u64,
) -> Vec<Batch> {
    assert!(batch_size >= 1, "batch_size must be at least 1");
    let mut indices = part.client_indices(client).to_vec();
    let mut rng = seeded_rng(derive_seed(epoch_seed, "batch", &[client as u64]));
    indices.shuffle(&mut rng);
    indices
        .chunks(batch_size)
        .map(|chunk| ds.gather_batch(chunk))
        .collect()
}
