//! Server-side weighting and update rules for the non-adaptive baselines:
//! sample-count (FedAvg), uniform, server momentum, loss-power fairness
//! reweighting, softmin loss weighting, and min-max-normalized loss
//! weighting.

use crate::model::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregatorKind {
    FedAvg,
    Uniform,
    FedAvgM,
    QFedAvg,
    FedLw,
    FedNoLoWe,
}

/// Server aggregation state: only the momentum rule is stateful.
#[derive(Debug, Clone)]
pub struct AggregatorState {
    pub kind: AggregatorKind,
    pub momentum_buffer: Option<ParamVector>,
    pub server_momentum: f64,
    pub q: f64,
    pub lw_temperature: f64,
}

impl AggregatorState {
    pub fn new(kind: AggregatorKind) -> Self {
        Self {
            kind,
            momentum_buffer: None,
            server_momentum: 0.9,
            q: 1.0,
            lw_temperature: 1.0,
        }
    }
}

/// Normalize raw non-negative scores to a probability vector.
pub(crate) fn normalize_weights(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    assert!(
        total > 0.0 && total.is_finite(),
        "weights must have a positive finite sum, got {total}"
    );
    raw.iter().map(|&r| r / total).collect()
}

/// Weights proportional to client sample counts.
pub fn fedavg_weights(sample_counts: &[usize]) -> Vec<f64> {
    let raw: Vec<f64> = sample_counts.iter().map(|&n| n as f64).collect();
    normalize_weights(&raw)
}

/// `1/M` for every client, regardless of sample counts.
pub fn uniform_weights(count: usize) -> Vec<f64> {
    assert!(count >= 1);
    vec![1.0 / count as f64; count]
}

/// Server momentum: `buffer' = m * buffer + weighted_delta`,
/// `w_{t+1} = w_t + buffer'`. The buffer starts at zero.
pub fn fedavgm_apply(
    global: &ParamVector,
    weighted_delta: &ParamVector,
    state: &mut AggregatorState,
) -> ParamVector {
    let buffer = state
        .momentum_buffer
        .take()
        .unwrap_or_else(|| ParamVector::zeros(weighted_delta.len()));
    let updated = buffer
        .scaled(state.server_momentum as f32)
        .add(weighted_delta);
    let next = global.add(&updated);
    state.momentum_buffer = Some(updated);
    next
}

/// Loss-power fairness reweighting: `S_i = N_i * (loss_i + 1e-10)^q`,
/// normalized. Emphasizes clients that currently incur larger losses.
pub fn qfedavg_weights(sample_counts: &[usize], losses: &[f64], q: f64) -> Vec<f64> {
    assert_eq!(sample_counts.len(), losses.len());
    let raw: Vec<f64> = sample_counts
        .iter()
        .zip(losses)
        .map(|(&n, &l)| n as f64 * (l + 1e-10).powf(q))
        .collect();
    normalize_weights(&raw)
}

/// Softmin loss weighting: `S_i = N_i * exp(-loss_i / tau)`, normalized.
/// Downweights high-loss clients. Losses are shifted by their minimum before
/// exponentiation, which cancels under normalization and avoids underflow.
pub fn fedlw_weights(sample_counts: &[usize], losses: &[f64], temperature: f64) -> Vec<f64> {
    assert_eq!(sample_counts.len(), losses.len());
    assert!(temperature > 0.0, "temperature must be positive");
    let min = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = sample_counts
        .iter()
        .zip(losses)
        .map(|(&n, &l)| n as f64 * (-(l - min) / temperature).exp())
        .collect();
    normalize_weights(&raw)
}

/// Min-max-normalized loss weighting: losses are scaled to `[0,1]` within
/// the round (constant losses map to all zeros), then
/// `S_i = N_i * (1 - norm_loss_i + 0.5)`. The 0.5 floor keeps every client
/// positive.
pub fn fednolowe_weights(sample_counts: &[usize], losses: &[f64]) -> Vec<f64> {
    assert_eq!(sample_counts.len(), losses.len());
    assert!(!losses.is_empty());
    let min = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = losses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = max - min;
    let raw: Vec<f64> = sample_counts
        .iter()
        .zip(losses)
        .map(|(&n, &l)| {
            let norm = if spread > 0.0 { (l - min) / spread } else { 0.0 };
            n as f64 * (1.0 - norm + 0.5)
        })
        .collect();
    normalize_weights(&raw)
}
