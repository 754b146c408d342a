//! Flat-parameter MLP kernel.
//!
//! Deterministic initialization, softmax cross-entropy with exact
//! reverse-mode gradients, dataset evaluation, and the vector algebra shared
//! by every optimizer and aggregator. Parameters are stored as one flat
//! `f32` vector; norms, dots, and gradient accumulation run in `f64`.

use crate::data::Dataset;
use crate::seed::seeded_rng;
use rand::Rng;
use thiserror::Error;

/// Norm threshold below which a direction is treated as degenerate (no
/// perturbation, cosine 0, memory left unchanged).
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model needs at least 2 layer widths, got {0}")]
    TooFewLayers(usize),
    #[error("layer widths must all be positive")]
    ZeroWidth,
    #[error("parameter vector has length {actual}, spec requires {expected}")]
    ParamLength { expected: usize, actual: usize },
    #[error("batch feature dim {actual} does not match model input dim {expected}")]
    FeatureDim { expected: usize, actual: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelRange { label: usize, classes: usize },
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("dataset is empty")]
    EmptyDataset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

/// Architecture of the flat-parameter classifier: layer widths (input dim
/// first, class count last) plus the initialization seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    layer_widths: Vec<usize>,
    pub activation: Activation,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(layer_widths: Vec<usize>, seed: u64) -> Result<Self, ModelError> {
        if layer_widths.len() < 2 {
            return Err(ModelError::TooFewLayers(layer_widths.len()));
        }
        if layer_widths.contains(&0) {
            return Err(ModelError::ZeroWidth);
        }
        Ok(Self {
            layer_widths,
            activation: Activation::Relu,
            seed,
        })
    }

    pub fn layer_widths(&self) -> &[usize] {
        &self.layer_widths
    }

    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn classes(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    /// Total parameter count: sum of `w_in * w_out + w_out` over consecutive
    /// layer pairs (weights stored `[out][in]` row-major, then biases).
    pub fn param_count(&self) -> usize {
        self.layer_widths
            .windows(2)
            .map(|p| p[0] * p[1] + p[1])
            .sum()
    }
}

/// Flat model-parameter vector. Also carries gradients, deltas, and
/// perturbations; the length is fixed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f32>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn from_vec(values: Vec<f32>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }

    pub fn all_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// L2 norm, accumulated in f64.
    pub fn l2_norm(&self) -> f64 {
        self.0
            .iter()
            .map(|&v| v as f64 * v as f64)
            .sum::<f64>()
            .sqrt()
    }

    /// `self + coeff * other`, elementwise in f32.
    pub fn add_scaled(&self, other: &ParamVector, coeff: f32) -> ParamVector {
        assert_eq!(self.len(), other.len(), "param vector length mismatch");
        ParamVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a + coeff * b)
                .collect(),
        )
    }

    pub fn add(&self, other: &ParamVector) -> ParamVector {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &ParamVector) -> ParamVector {
        self.add_scaled(other, -1.0)
    }

    pub fn scaled(&self, coeff: f32) -> ParamVector {
        ParamVector(self.0.iter().map(|&a| coeff * a).collect())
    }
}

/// Norm/dot/cosine triple returned by [`vec_metrics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecMetrics {
    pub l2_a: f64,
    pub dot: f64,
    pub cosine: f64,
}

/// L2 norm of `a`, inner product, and cosine similarity, all in f64.
/// Cosine is 0 by convention when either norm is below [`DEGENERATE_NORM`].
pub fn vec_metrics(a: &ParamVector, b: &ParamVector) -> Result<VecMetrics, ModelError> {
    if a.len() != b.len() {
        return Err(ModelError::LengthMismatch(a.len(), b.len()));
    }
    let l2_a = a.l2_norm();
    let l2_b = b.l2_norm();
    let dot = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| x as f64 * y as f64)
        .sum::<f64>();
    let cosine = if l2_a < DEGENERATE_NORM || l2_b < DEGENERATE_NORM {
        0.0
    } else {
        (dot / (l2_a * l2_b)).clamp(-1.0, 1.0)
    };
    Ok(VecMetrics { l2_a, dot, cosine })
}

/// A minibatch: row-major feature matrix plus class labels.
#[derive(Debug, Clone)]
pub struct Batch {
    features: Vec<f32>,
    labels: Vec<usize>,
    dim: usize,
}

impl Batch {
    pub fn new(features: Vec<f32>, dim: usize, labels: Vec<usize>) -> Self {
        assert!(!labels.is_empty(), "batch must hold at least one sample");
        assert_eq!(
            features.len(),
            labels.len() * dim,
            "feature row count must equal label count"
        );
        Self {
            features,
            labels,
            dim,
        }
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

    pub fn feature_row(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// Deterministic init: weights uniform in `±sqrt(6/(fan_in+fan_out))`,
/// biases zero, drawn in flat-layout order from a stream seeded by
/// `spec.seed`.
pub fn init_params(spec: &ModelSpec) -> ParamVector {
    let mut rng = seeded_rng(spec.seed);
    let mut values = Vec::with_capacity(spec.param_count());
    for pair in spec.layer_widths().windows(2) {
        let (w_in, w_out) = (pair[0], pair[1]);
        let bound = (6.0 / (w_in + w_out) as f64).sqrt();
        for _ in 0..w_in * w_out {
            values.push(rng.random_range(-bound..bound) as f32);
        }
        values.resize(values.len() + w_out, 0.0);
    }
    ParamVector(values)
}

/// Per-sample forward pass: post-activation values per layer (index 0 is the
/// input) with raw logits last.
fn forward(spec: &ModelSpec, params: &ParamVector, x: &[f32]) -> Vec<Vec<f32>> {
    let widths = spec.layer_widths();
    let mut acts: Vec<Vec<f32>> = Vec::with_capacity(widths.len());
    acts.push(x.to_vec());
    let mut offset = 0;
    for (l, pair) in widths.windows(2).enumerate() {
        let (w_in, w_out) = (pair[0], pair[1]);
        let weights = &params.0[offset..offset + w_in * w_out];
        let biases = &params.0[offset + w_in * w_out..offset + w_in * w_out + w_out];
        offset += w_in * w_out + w_out;
        let input = &acts[l];
        let last_layer = l + 2 == widths.len();
        let mut out = Vec::with_capacity(w_out);
        for o in 0..w_out {
            let row = &weights[o * w_in..(o + 1) * w_in];
            let mut z = biases[o];
            for (w, v) in row.iter().zip(input) {
                z += w * v;
            }
            out.push(if last_layer { z } else { z.max(0.0) });
        }
        acts.push(out);
    }
    acts
}

/// Stable softmax cross-entropy: returns `(loss, probabilities)` in f64.
fn softmax_ce(logits: &[f32], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f32::NEG_INFINITY, f32::max) as f64;
    let exps: Vec<f64> = logits.iter().map(|&z| (z as f64 - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let probs: Vec<f64> = exps.iter().map(|e| e / total).collect();
    let loss = -(probs[label].max(f64::MIN_POSITIVE)).ln();
    (loss, probs)
}

fn check_batch(spec: &ModelSpec, params: &ParamVector, batch: &Batch) -> Result<(), ModelError> {
    if params.len() != spec.param_count() {
        return Err(ModelError::ParamLength {
            expected: spec.param_count(),
            actual: params.len(),
        });
    }
    if batch.dim() != spec.input_dim() {
        return Err(ModelError::FeatureDim {
            expected: spec.input_dim(),
            actual: batch.dim(),
        });
    }
    if let Some(&label) = batch.labels().iter().find(|&&l| l >= spec.classes()) {
        return Err(ModelError::LabelRange {
            label,
            classes: spec.classes(),
        });
    }
    Ok(())
}

/// Mean cross-entropy over the batch and its exact gradient.
///
/// Per-sample backprop runs in f32; the gradient is accumulated across the
/// batch in f64 and rounded once at the end.
pub fn loss_and_grad(
    spec: &ModelSpec,
    params: &ParamVector,
    batch: &Batch,
) -> Result<(f64, ParamVector), ModelError> {
    check_batch(spec, params, batch)?;
    let widths = spec.layer_widths();
    let n_layers = widths.len() - 1;

    // Offsets of each layer's weight block within the flat vector.
    let mut offsets = Vec::with_capacity(n_layers);
    let mut offset = 0;
    for pair in widths.windows(2) {
        offsets.push(offset);
        offset += pair[0] * pair[1] + pair[1];
    }

    let mut grad_acc = vec![0.0f64; params.len()];
    let mut loss_acc = 0.0f64;

    for i in 0..batch.len() {
        let acts = forward(spec, params, batch.feature_row(i));
        let logits = acts.last().unwrap();
        let (loss, probs) = softmax_ce(logits, batch.label(i));
        loss_acc += loss;

        // dL/dlogits = softmax - onehot
        let mut delta: Vec<f32> = probs
            .iter()
            .enumerate()
            .map(|(k, &p)| (p - if k == batch.label(i) { 1.0 } else { 0.0 }) as f32)
            .collect();

        for l in (0..n_layers).rev() {
            let (w_in, w_out) = (widths[l], widths[l + 1]);
            let base = offsets[l];
            let input = &acts[l];
            let weights = &params.0[base..base + w_in * w_out];

            for o in 0..w_out {
                let d = delta[o] as f64;
                let g_row = &mut grad_acc[base + o * w_in..base + (o + 1) * w_in];
                for (g, &v) in g_row.iter_mut().zip(input) {
                    *g += d * v as f64;
                }
                grad_acc[base + w_in * w_out + o] += d;
            }

            if l > 0 {
                let mut prev = vec![0.0f32; w_in];
                for o in 0..w_out {
                    let d = delta[o];
                    let row = &weights[o * w_in..(o + 1) * w_in];
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
                // ReLU mask: zero where the activation was clamped.
                for (p, &a) in prev.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }

    let n = batch.len() as f64;
    let grad = ParamVector(grad_acc.iter().map(|&g| (g / n) as f32).collect());
    Ok((loss_acc / n, grad))
}

/// Argmax-of-logits accuracy (ties broken by lowest class id) and mean
/// cross-entropy over a whole dataset.
pub fn evaluate(
    spec: &ModelSpec,
    params: &ParamVector,
    dataset: &Dataset,
) -> Result<(f64, f64), ModelError> {
    if dataset.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if params.len() != spec.param_count() {
        return Err(ModelError::ParamLength {
            expected: spec.param_count(),
            actual: params.len(),
        });
    }
    if dataset.dim() != spec.input_dim() {
        return Err(ModelError::FeatureDim {
            expected: spec.input_dim(),
            actual: dataset.dim(),
        });
    }
    let mut correct = 0usize;
    let mut loss_acc = 0.0f64;
    for i in 0..dataset.len() {
        let label = dataset.label(i);
        if label >= spec.classes() {
            return Err(ModelError::LabelRange {
                label,
                classes: spec.classes(),
            });
        }
        let acts = forward(spec, params, dataset.feature_row(i));
        let logits = acts.last().unwrap();
        let mut best = 0usize;
        for (k, &z) in logits.iter().enumerate() {
            if z > logits[best] {
                best = k;
            }
        }
        if best == label {
            correct += 1;
        }
        loss_acc += softmax_ce(logits, label).0;
    }
    let n = dataset.len() as f64;
    Ok((correct as f64 / n, loss_acc / n))
}

/// `sum_i weights[i] * vectors[i]`, accumulated in f64 and rounded to f32
/// once. Shared by every aggregation rule so degenerate configurations stay
/// bit-identical across algorithms.
pub fn weighted_combination(vectors: &[&ParamVector], weights: &[f64]) -> ParamVector {
    assert_eq!(vectors.len(), weights.len());
    assert!(!vectors.is_empty(), "nothing to combine");
    let len = vectors[0].len();
    let mut acc = vec![0.0f64; len];
    for (vec, &w) in vectors.iter().zip(weights) {
        assert_eq!(vec.len(), len, "param vector length mismatch");
        for (a, &v) in acc.iter_mut().zip(vec.as_slice()) {
            *a += w * v as f64;
        }
    }
    ParamVector(acc.iter().map(|&a| a as f32).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use proptest::prelude::*;

    fn spec(widths: &[usize], seed: u64) -> ModelSpec {
        ModelSpec::new(widths.to_vec(), seed).unwrap()
    }

    fn random_batch(spec: &ModelSpec, n: usize, seed: u64) -> Batch {
        let mut rng = seeded_rng(seed);
        let dim = spec.input_dim();
        let features: Vec<f32> = (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..spec.classes())).collect();
        Batch::new(features, dim, labels)
    }

    #[test]
    fn param_count_formula() {
        assert_eq!(spec(&[4, 3], 0).param_count(), 4 * 3 + 3);
        assert_eq!(spec(&[16, 64, 32, 10], 0).param_count(), 16 * 64 + 64 + 64 * 32 + 32 + 32 * 10 + 10);
    }

    #[test]
    fn init_is_deterministic_and_seed_sensitive() {
        let s = spec(&[4, 3], 7);
        assert_eq!(init_params(&s), init_params(&s));
        assert_eq!(init_params(&s).len(), 15);
        let other = spec(&[4, 3], 8);
        assert_ne!(init_params(&s), init_params(&other));
    }

    #[test]
    fn init_biases_zero_weights_bounded() {
        let s = spec(&[4, 3], 7);
        let p = init_params(&s);
        let bound = (6.0f64 / 7.0).sqrt() as f32;
        for &w in &p.as_slice()[..12] {
            assert!(w.abs() <= bound);
        }
        for &b in &p.as_slice()[12..] {
            assert_eq!(b, 0.0);
        }
    }

    #[test]
    fn zero_weight_net_gives_ln_c_loss() {
        let s = spec(&[4, 8, 5], 0);
        let params = ParamVector::zeros(s.param_count());
        let batch = random_batch(&s, 6, 1);
        let (loss, _) = loss_and_grad(&s, &params, &batch).unwrap();
        assert!((loss - (5.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn duplicated_samples_leave_loss_and_grad_unchanged() {
        let s = spec(&[3, 6, 4], 2);
        let params = init_params(&s);
        let batch = random_batch(&s, 5, 3);
        let mut feats = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..2 {
            for i in 0..batch.len() {
                feats.extend_from_slice(batch.feature_row(i));
                labels.push(batch.label(i));
            }
        }
        let doubled = Batch::new(feats, batch.dim(), labels);
        let (l1, g1) = loss_and_grad(&s, &params, &batch).unwrap();
        let (l2, g2) = loss_and_grad(&s, &params, &doubled).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.as_slice().iter().zip(g2.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    /// Independent f64 oracle: forward pass and mean cross-entropy written
    /// from scratch in double precision, so finite differences are not
    /// polluted by f32 rounding in the implementation under test.
    fn oracle_loss_f64(spec: &ModelSpec, params: &[f64], batch: &Batch) -> f64 {
        let widths = spec.layer_widths();
        let mut total = 0.0f64;
        for i in 0..batch.len() {
            let mut act: Vec<f64> = batch.feature_row(i).iter().map(|&v| v as f64).collect();
            let mut offset = 0usize;
            for (l, pair) in widths.windows(2).enumerate() {
                let (w_in, w_out) = (pair[0], pair[1]);
                let mut next = vec![0.0f64; w_out];
                for (o, n) in next.iter_mut().enumerate() {
                    let mut z = params[offset + w_in * w_out + o];
                    for (k, &a) in act.iter().enumerate() {
                        z += params[offset + o * w_in + k] * a;
                    }
                    *n = if l + 2 == widths.len() { z } else { z.max(0.0) };
                }
                offset += w_in * w_out + w_out;
                act = next;
            }
            let max = act.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let total_exp: f64 = act.iter().map(|&z| (z - max).exp()).sum();
            total += total_exp.ln() + max - act[batch.label(i)];
        }
        total / batch.len() as f64
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        // A handful of triples here; the 100-case sweep lives in the
        // acceptance suite.
        for trial in 0..10u64 {
            let s = spec(&[5, 8, 4], trial);
            let params = init_params(&s);
            let batch = random_batch(&s, 4, trial + 100);
            let (_, grad) = loss_and_grad(&s, &params, &batch).unwrap();
            let base: Vec<f64> = params.as_slice().iter().map(|&v| v as f64).collect();
            let mut rng = seeded_rng(trial + 500);
            for _ in 0..20 {
                let j = rng.random_range(0..params.len());
                let step = 1e-4f64;
                let mut plus = base.clone();
                plus[j] += step;
                let mut minus = base.clone();
                minus[j] -= step;
                let fd = (oracle_loss_f64(&s, &plus, &batch)
                    - oracle_loss_f64(&s, &minus, &batch))
                    / (2.0 * step);
                let an = grad.as_slice()[j] as f64;
                let denom = an.abs().max(fd.abs()).max(1e-4);
                assert!(
                    (fd - an).abs() / denom < 1e-3,
                    "coord {j}: fd {fd} vs analytic {an}"
                );
            }
        }
    }

    #[test]
    fn vec_metrics_trivials() {
        let a = ParamVector::from_vec(vec![3.0, 4.0]);
        let m = vec_metrics(&a, &a).unwrap();
        assert!((m.l2_a - 5.0).abs() < 1e-12);
        assert!((m.cosine - 1.0).abs() < 1e-12);

        let b = ParamVector::from_vec(vec![-4.0, 3.0]);
        assert_eq!(vec_metrics(&a, &b).unwrap().cosine, 0.0);

        let zero = ParamVector::zeros(2);
        assert_eq!(vec_metrics(&zero, &a).unwrap().cosine, 0.0);

        let short = ParamVector::zeros(3);
        assert!(matches!(
            vec_metrics(&a, &short),
            Err(ModelError::LengthMismatch(2, 3))
        ));
    }

    #[test]
    fn loss_and_grad_rejects_mismatched_params() {
        let s = spec(&[4, 3], 0);
        let batch = random_batch(&s, 2, 0);
        let bad = ParamVector::zeros(s.param_count() + 1);
        assert!(matches!(
            loss_and_grad(&s, &bad, &batch),
            Err(ModelError::ParamLength { .. })
        ));
    }

    #[test]
    fn evaluate_trivials() {
        let s = spec(&[2, 2], 0);
        // Weights that push class 1 for positive x0.
        let params = ParamVector::from_vec(vec![-1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let ds = Dataset::new(vec![1.0, 0.0], 2, vec![1], 2).unwrap();
        let (acc, loss) = evaluate(&s, &params, &ds).unwrap();
        assert_eq!(acc, 1.0);
        assert!(loss >= 0.0);
        assert_eq!(evaluate(&s, &params, &ds).unwrap(), (acc, loss));
    }

    #[test]
    fn evaluate_breaks_ties_toward_lowest_class() {
        let s = spec(&[2, 3], 0);
        let params = ParamVector::zeros(s.param_count());
        // All logits equal -> predicted class 0.
        let ds = Dataset::new(vec![0.5, 0.5, 0.5, 0.5], 2, vec![0, 2], 3).unwrap();
        let (acc, _) = evaluate(&s, &params, &ds).unwrap();
        assert!((acc - 0.5).abs() < 1e-12);
    }

    #[test]
    fn evaluate_random_net_near_chance_on_random_labels() {
        // Features and labels independent, so accuracy is Binomial(n, 1/C)/n.
        let classes = 10;
        let n = 2000;
        let s = spec(&[8, 16, classes], 11);
        let params = init_params(&s);
        let mut rng = seeded_rng(99);
        let features: Vec<f32> = (0..n * 8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
        let ds = Dataset::new(features, 8, labels, classes).unwrap();
        let (acc, _) = evaluate(&s, &params, &ds).unwrap();
        let bound = 5.0 * (1.0f64 / (4.0 * n as f64)).sqrt();
        assert!(
            (acc - 0.1).abs() < bound,
            "accuracy {acc} outside 0.1 +/- {bound}"
        );
    }

    #[test]
    fn weighted_combination_matches_manual_sum() {
        let a = ParamVector::from_vec(vec![1.0, 2.0]);
        let b = ParamVector::from_vec(vec![-2.0, 4.0]);
        let c = weighted_combination(&[&a, &b], &[0.25, 0.75]);
        assert_eq!(c.as_slice(), &[0.25 - 1.5, 0.5 + 3.0]);
    }

    proptest! {
        #[test]
        fn loss_is_nonnegative_and_scale_identity_holds(seed in 0u64..500) {
            let s = spec(&[4, 6, 3], seed);
            let params = init_params(&s);
            let batch = random_batch(&s, 8, seed + 1);
            let (loss, grad) = loss_and_grad(&s, &params, &batch).unwrap();
            prop_assert!(loss >= 0.0);
            prop_assert!(grad.all_finite());

            // Split into two sub-batches; size-weighted combination must agree.
            let split = 3;
            let (mut fa, mut la, mut fb, mut lb) = (vec![], vec![], vec![], vec![]);
            for i in 0..batch.len() {
                if i < split {
                    fa.extend_from_slice(batch.feature_row(i));
                    la.push(batch.label(i));
                } else {
                    fb.extend_from_slice(batch.feature_row(i));
                    lb.push(batch.label(i));
                }
            }
            let ba = Batch::new(fa, batch.dim(), la);
            let bb = Batch::new(fb, batch.dim(), lb);
            let (loss_a, grad_a) = loss_and_grad(&s, &params, &ba).unwrap();
            let (loss_b, grad_b) = loss_and_grad(&s, &params, &bb).unwrap();
            let wa = split as f64 / batch.len() as f64;
            let wb = 1.0 - wa;
            prop_assert!((loss - (wa * loss_a + wb * loss_b)).abs() < 1e-9);
            for ((g, ga), gb) in grad.as_slice().iter().zip(grad_a.as_slice()).zip(grad_b.as_slice()) {
                let combined = wa * *ga as f64 + wb * *gb as f64;
                prop_assert!((*g as f64 - combined).abs() < 1e-5);
            }
        }
    }
}
