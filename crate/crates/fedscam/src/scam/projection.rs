//! Signed random projection to a low-dimensional summary space.
//!
//! The implicit matrix has entries `±1/sqrt(d)`; each input coordinate's
//! column is generated on the fly from `(seed, coordinate index)`, so server
//! and clients agree on the projection without ever materializing or
//! transmitting it.

use crate::seed::{derive_seed, seeded_rng};
use rand::RngCore;

#[derive(Debug, Clone)]
pub struct RandomProjection {
    dim: usize,
    seed: u64,
}

impl RandomProjection {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1, "projection dim must be at least 1");
        Self { dim, seed }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `y = R v`, accumulated in f64. Linear in `v` by construction.
    pub fn project(&self, v: &[f32]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.dim];
        let words = self.dim.div_ceil(64);
        for (j, &x) in v.iter().enumerate() {
            if x == 0.0 {
                continue; // a zero contributes nothing regardless of sign
            }
            let x = x as f64;
            let mut rng = seeded_rng(derive_seed(self.seed, "proj.column", &[j as u64]));
            for w in 0..words {
                let bits = rng.next_u64();
                let lo = w * 64;
                let hi = (lo + 64).min(self.dim);
                for (b, slot) in out[lo..hi].iter_mut().enumerate() {
                    if (bits >> b) & 1 == 1 {
                        *slot += x;
                    } else {
                        *slot -= x;
                    }
                }
            }
        }
        let scale = 1.0 / (self.dim as f64).sqrt();
        for slot in &mut out {
            *slot *= scale;
        }
        out
    }
}

pub(crate) fn cosine_f64(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na < crate::model::DEGENERATE_NORM || nb < crate::model::DEGENERATE_NORM {
        return 0.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}
