//! Data plane: in-memory datasets, synthetic blob generation, IDX binary
//! parsing, Dirichlet label-skew partitioning, and deterministic batching.

mod batch;
mod idx;
mod partition;
mod synthetic;

pub use batch::batch_iter;
pub use idx::{
    encode_idx_images, encode_idx_labels, load_idx, parse_idx_images, parse_idx_labels, IdxError,
    IdxImages, IMAGES_MAGIC, LABELS_MAGIC,
};
pub use partition::{
    dirichlet_partition, label_entropy, label_histogram, mean_label_entropy, ClientPartition,
    DirichletSpec, PartitionError,
};
pub use synthetic::{generate_synthetic, generate_synthetic_holdout, synthetic_class_centers};

use crate::model::Batch;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset must hold at least one sample")]
    Empty,
    #[error("feature buffer length {found} is not n*dim = {expected}")]
    FeatureShape { expected: usize, found: usize },
    #[error("label {label} at index {index} out of range for {classes} classes")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        classes: usize,
    },
    #[error("non-finite feature value at index {0}")]
    NonFinite(usize),
}

/// Immutable labeled dataset: row-major feature matrix plus class ids.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Vec<f32>,
    dim: usize,
    labels: Vec<usize>,
    classes: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f32>,
        dim: usize,
        labels: Vec<usize>,
        classes: usize,
    ) -> Result<Self, DataError> {
        if labels.is_empty() {
            return Err(DataError::Empty);
        }
        if features.len() != labels.len() * dim {
            return Err(DataError::FeatureShape {
                expected: labels.len() * dim,
                found: features.len(),
            });
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
            return Err(DataError::LabelOutOfRange {
                index,
                label,
                classes,
            });
        }
        if let Some(index) = features.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite(index));
        }
        Ok(Self {
            features,
            dim,
            labels,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn feature_row(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Copy the given rows into an owned batch.
    pub fn gather_batch(&self, indices: &[usize]) -> Batch {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.feature_row(i));
            labels.push(self.labels[i]);
        }
        Batch::new(features, self.dim, labels)
    }
}
