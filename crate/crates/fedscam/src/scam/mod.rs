//! Heterogeneity-modulated SAM with alignment-aware aggregation.
//!
//! Per round, each client estimates a heterogeneity score from early-batch
//! gradient norms, computes a projected pilot direction and its alignment
//! with the server's direction memory, and trains with a per-client
//! perturbation radius shrunk by the alignment-adjusted score. The server
//! clusters projected update summaries to dampen within-cluster conflicts,
//! weights clients by sample count, heterogeneity penalty, and alignment
//! boost, and refreshes the direction memory from the aggregated step.

mod kmeans;
mod projection;

pub use kmeans::kmeans_assign;
pub use projection::RandomProjection;

use crate::model::{
    loss_and_grad, weighted_combination, Batch, ModelError, ModelSpec, ParamVector,
    DEGENERATE_NORM,
};
use crate::optim::sam_step;
use projection::cosine_f64;

/// Ablation variants: the full method, aggregation-only (plain SGD locally),
/// or radius-only (sample-count weights at the server).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScamVariant {
    Full,
    WaOnly,
    SamOnly,
}

impl ScamVariant {
    pub fn name(&self) -> &'static str {
        match self {
            ScamVariant::Full => "full",
            ScamVariant::WaOnly => "wa_only",
            ScamVariant::SamOnly => "sam_only",
        }
    }
}

/// Hyperparameters of the heterogeneity-modulated pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct FedScamConfig {
    /// Maximum perturbation radius; every per-client radius stays in
    /// `(0, rho_max]`.
    pub rho_max: f64,
    /// Radius modulation strength.
    pub alpha_rho: f64,
    /// Heterogeneity penalty in the aggregation weight.
    pub gamma: f64,
    /// Alignment boost in the aggregation weight.
    pub beta: f64,
    /// Alignment-to-heterogeneity coupling.
    pub kappa: f64,
    /// Within-cluster conflict downweight factor, in `(0, 1]`.
    pub lambda: f64,
    pub clusters: usize,
    pub summary_dim: usize,
    /// Batches used for the heterogeneity estimate (fewer if the client has
    /// fewer).
    pub het_batches: usize,
    pub clustering_enabled: bool,
    pub variant: ScamVariant,
    /// Overrides the adaptive radius for every client when set; used to
    /// reproduce fixed-radius and zero-radius trajectories exactly.
    pub fixed_rho: Option<f64>,
}

impl Default for FedScamConfig {
    fn default() -> Self {
        Self {
            rho_max: 0.05,
            alpha_rho: 1.0,
            gamma: 1.0,
            beta: 0.0,
            kappa: 0.5,
            lambda: 0.5,
            clusters: 3,
            summary_dim: 256,
            het_batches: 3,
            clustering_enabled: true,
            variant: ScamVariant::Full,
            fixed_rho: None,
        }
    }
}

/// Per-client, per-round signal bundle.
#[derive(Debug, Clone)]
pub struct ClientSignals {
    /// Mean early-batch gradient norm at the global model.
    pub h: f64,
    /// Cosine between the projected pilot direction and the direction memory.
    pub c: f64,
    /// `h * max(0, 1 - kappa * c)`.
    pub h_adj: f64,
    /// `rho_max / (1 + alpha_rho * h_adj)`, always in `(0, rho_max]`.
    pub rho: f64,
    /// Projected normalized pilot direction.
    pub summary: Vec<f64>,
    /// Projected normalized local update, filled in after training.
    pub update_summary: Vec<f64>,
}

/// Unit-norm low-dimensional summary of the most recent global update, or
/// unset before the first nonzero step.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionMemory {
    u: Option<Vec<f64>>,
}

impl DirectionMemory {
    pub fn unset() -> Self {
        Self { u: None }
    }

    pub fn get(&self) -> Option<&[f64]> {
        self.u.as_deref()
    }

    /// Normalizes and stores; degenerate vectors leave the memory unchanged.
    pub fn update_from(&mut self, direction: &[f64]) {
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < DEGENERATE_NORM {
            return;
        }
        self.u = Some(direction.iter().map(|x| x / norm).collect());
    }
}

/// Mean L2 gradient norm at the unmodified global model over the supplied
/// batches (the caller passes the first `B` available).
pub fn estimate_heterogeneity(
    spec: &ModelSpec,
    global: &ParamVector,
    batches: &[Batch],
) -> Result<f64, ModelError> {
    assert!(!batches.is_empty(), "heterogeneity needs at least one batch");
    let mut total = 0.0f64;
    for batch in batches {
        let (_, grad) = loss_and_grad(spec, global, batch)?;
        total += grad.l2_norm();
    }
    Ok(total / batches.len() as f64)
}

/// Conservative pilot radius: `0.5 * rho_max / (1 + alpha_rho * h)`.
pub fn pilot_radius(rho_max: f64, alpha_rho: f64, h: f64) -> f64 {
    0.5 * rho_max / (1.0 + alpha_rho * h)
}

/// Projected, normalized pilot direction: one SAM displacement at the global
/// model on a single batch, at the pilot radius. The step never touches the
/// client's actual training start point. Zero when the displacement is
/// degenerate.
pub fn pilot_summary(
    spec: &ModelSpec,
    global: &ParamVector,
    batch: &Batch,
    lr: f64,
    rho_pilot: f64,
    proj: &RandomProjection,
) -> Result<Vec<f64>, ModelError> {
    let moved = sam_step(spec, global, batch, lr, rho_pilot)?;
    let v = moved.sub(global);
    let norm = v.l2_norm();
    if norm < DEGENERATE_NORM {
        return Ok(vec![0.0; proj.dim()]);
    }
    let unit = v.scaled((1.0 / norm) as f32);
    Ok(proj.project(unit.as_slice()))
}

/// Cosine between a summary and the direction memory; 0 while the memory is
/// unset.
pub fn alignment(summary: &[f64], memory: &DirectionMemory) -> f64 {
    match memory.get() {
        Some(u) => cosine_f64(summary, u),
        None => 0.0,
    }
}

/// `h_adj = h * max(0, 1 - kappa*c)` and `rho = rho_max / (1 + alpha_rho * h_adj)`.
pub fn adjust_and_modulate(h: f64, c: f64, cfg: &FedScamConfig) -> (f64, f64) {
    let h_adj = h * (1.0 - cfg.kappa * c).max(0.0);
    let rho = cfg.rho_max / (1.0 + cfg.alpha_rho * h_adj);
    (h_adj, rho)
}

/// Projected, normalized local update; zero for a degenerate delta.
pub fn update_summary(delta: &ParamVector, proj: &RandomProjection) -> Vec<f64> {
    let norm = delta.l2_norm();
    if norm < DEGENERATE_NORM {
        return vec![0.0; proj.dim()];
    }
    let unit = delta.scaled((1.0 / norm) as f32);
    proj.project(unit.as_slice())
}

/// Cluster the update summaries (k-means++, fixed 20 iterations) and, for
/// every same-cluster pair with negative cosine similarity, multiply the
/// smaller-norm member's multiplier by `lambda`. Equal norms treat the lower
/// client id as the larger member, so the higher id is dampened.
pub fn cluster_conflict_dampen(
    summaries: &[Vec<f64>],
    delta_norms: &[f64],
    k: usize,
    lambda: f64,
    seed: u64,
) -> Vec<f64> {
    assert_eq!(summaries.len(), delta_norms.len());
    let n = summaries.len();
    let mut multipliers = vec![1.0f64; n];
    if n < 2 {
        return multipliers;
    }
    let assignment = kmeans_assign(summaries, k, 20, seed);
    for i in 0..n {
        for j in (i + 1)..n {
            if assignment[i] != assignment[j] {
                continue;
            }
            if cosine_f64(&summaries[i], &summaries[j]) < 0.0 {
                // equal norms: lower id counts as larger, higher id loses
                let loser = if delta_norms[i] < delta_norms[j] { i } else { j };
                multipliers[loser] *= lambda;
            }
        }
    }
    multipliers
}

/// Normalized aggregation weights:
/// `S_i = N_i * m_i / (1 + gamma*h_adj_i) * max(0, 1 + beta*c_i)`.
/// Falls back to sample-count weights (with a logged warning) if every raw
/// weight clamps to zero.
pub fn scam_weights(
    sample_counts: &[usize],
    h_adj: &[f64],
    c: &[f64],
    multipliers: &[f64],
    gamma: f64,
    beta: f64,
) -> Vec<f64> {
    assert_eq!(sample_counts.len(), h_adj.len());
    assert_eq!(sample_counts.len(), c.len());
    assert_eq!(sample_counts.len(), multipliers.len());
    let raw: Vec<f64> = (0..sample_counts.len())
        .map(|i| {
            sample_counts[i] as f64 * multipliers[i] / (1.0 + gamma * h_adj[i])
                * (1.0 + beta * c[i]).max(0.0)
        })
        .collect();
    if raw.iter().sum::<f64>() <= 0.0 {
        log::warn!("all aggregation weights are zero; falling back to sample-count weights");
        return crate::baselines::fedavg_weights(sample_counts);
    }
    crate::baselines::normalize_weights(&raw)
}

/// `w_{t+1} = w_t + sum_i s_i * delta_i`, plus the refreshed direction
/// memory (left unchanged on a zero global step).
pub fn scam_aggregate(
    global: &ParamVector,
    deltas: &[&ParamVector],
    weights: &[f64],
    memory: &DirectionMemory,
    proj: &RandomProjection,
) -> (ParamVector, DirectionMemory) {
    let step = weighted_combination(deltas, weights);
    let next = global.add(&step);
    let mut memory = memory.clone();
    let norm = step.l2_norm();
    if norm >= DEGENERATE_NORM {
        let unit = step.scaled((1.0 / norm) as f32);
        memory.update_from(&proj.project(unit.as_slice()));
    }
    (next, memory)
}
