//! Per-client local training: SGD, proximal SGD, two-step SAM, and the
//! single-gradient / momentum-perturbation SAM variants.
//!
//! The update rules are written against a gradient closure so their
//! perturbation arithmetic can be tested on closed-form objectives; the
//! public `*_step` functions bind them to the MLP kernel.

use crate::data::{batch_iter, ClientPartition, Dataset};
use crate::model::{loss_and_grad, Batch, ModelError, ModelSpec, ParamVector, DEGENERATE_NORM};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Sgd,
    Prox,
    Sam,
    Lesam,
    Wmsam,
}

/// Local step-rule parameters. `rho = 0` degenerates every SAM variant to
/// plain SGD; `mu` is read only by the proximal rule and `perturb_momentum`
/// only by the momentum-perturbation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub rho: f64,
    pub mu: f64,
    pub perturb_momentum: f64,
}

impl OptimizerConfig {
    pub fn sgd(lr: f64) -> Self {
        Self {
            kind: OptimizerKind::Sgd,
            lr,
            rho: 0.0,
            mu: 0.0,
            perturb_momentum: 0.0,
        }
    }

    pub fn sam(lr: f64, rho: f64) -> Self {
        Self {
            kind: OptimizerKind::Sam,
            rho,
            ..Self::sgd(lr)
        }
    }

    pub fn prox(lr: f64, mu: f64) -> Self {
        Self {
            kind: OptimizerKind::Prox,
            mu,
            ..Self::sgd(lr)
        }
    }

    pub fn lesam(lr: f64, rho: f64) -> Self {
        Self {
            kind: OptimizerKind::Lesam,
            rho,
            ..Self::sgd(lr)
        }
    }

    pub fn wmsam(lr: f64, rho: f64, perturb_momentum: f64) -> Self {
        Self {
            kind: OptimizerKind::Wmsam,
            rho,
            perturb_momentum,
            ..Self::sgd(lr)
        }
    }
}

/// Everything a client returns for one round.
#[derive(Debug, Clone)]
pub struct LocalReport {
    /// `w_i - w_t` after local training.
    pub delta: ParamVector,
    /// Mean per-step training loss over the whole round.
    pub mean_train_loss: f64,
    /// Mean per-step loss of the final local epoch; this is the scalar the
    /// loss-weighting aggregators consume.
    pub final_train_loss: f64,
    /// Heterogeneity score; zero unless the engine ran a signal phase.
    pub h: f64,
    /// Perturbation radius the step rule actually used (0 for sgd/prox).
    pub rho_used: f64,
    pub steps: usize,
}

/// `rho * direction / ||direction||`, or `None` when the direction is
/// degenerate (then no perturbation is applied).
pub fn perturbation(direction: &ParamVector, rho: f64) -> Option<ParamVector> {
    let norm = direction.l2_norm();
    if norm < DEGENERATE_NORM {
        return None;
    }
    Some(direction.scaled((rho / norm) as f32))
}

type GradResult = Result<(f64, ParamVector), ModelError>;

/// Two-step SAM: ascend `rho` along the batch gradient, then descend using
/// the gradient at the perturbed point. Exactly two gradient evaluations.
/// Returns `(loss at the unperturbed point, new params)`.
pub(crate) fn sam_update<F>(
    params: &ParamVector,
    lr: f64,
    rho: f64,
    grad_fn: &mut F,
) -> Result<(f64, ParamVector), ModelError>
where
    F: FnMut(&ParamVector) -> GradResult,
{
    let (loss, g1) = grad_fn(params)?;
    let perturbed = match perturbation(&g1, rho) {
        Some(eps) => params.add(&eps),
        None => params.clone(),
    };
    let (_, g2) = grad_fn(&perturbed)?;
    Ok((loss, params.add_scaled(&g2, -(lr as f32))))
}

/// Fixed-direction SAM: perturb along a direction supplied by the server
/// (the previous global update) so only one gradient evaluation is needed.
/// The returned loss is the one observed at the perturbed point.
pub(crate) fn lesam_update<F>(
    params: &ParamVector,
    lr: f64,
    rho: f64,
    global_dir: &ParamVector,
    grad_fn: &mut F,
) -> Result<(f64, ParamVector), ModelError>
where
    F: FnMut(&ParamVector) -> GradResult,
{
    let perturbed = match perturbation(global_dir, rho) {
        Some(eps) => params.add(&eps),
        None => params.clone(),
    };
    let (loss, g) = grad_fn(&perturbed)?;
    Ok((loss, params.add_scaled(&g, -(lr as f32))))
}

/// Momentum-perturbation SAM: the ascent direction is an exponential moving
/// average of batch gradients. Two gradient evaluations per step.
pub(crate) fn wmsam_update<F>(
    params: &ParamVector,
    lr: f64,
    rho: f64,
    momentum: f64,
    perturb_state: &ParamVector,
    grad_fn: &mut F,
) -> Result<(f64, ParamVector, ParamVector), ModelError>
where
    F: FnMut(&ParamVector) -> GradResult,
{
    let (loss, g1) = grad_fn(params)?;
    let state = perturb_state
        .scaled(momentum as f32)
        .add_scaled(&g1, (1.0 - momentum) as f32);
    let perturbed = match perturbation(&state, rho) {
        Some(eps) => params.add(&eps),
        None => params.clone(),
    };
    let (_, g2) = grad_fn(&perturbed)?;
    Ok((loss, params.add_scaled(&g2, -(lr as f32)), state))
}

/// Proximal step: descend the batch gradient plus `mu * (params - anchor)`.
pub(crate) fn prox_update<F>(
    params: &ParamVector,
    anchor: &ParamVector,
    lr: f64,
    mu: f64,
    grad_fn: &mut F,
) -> Result<(f64, ParamVector), ModelError>
where
    F: FnMut(&ParamVector) -> GradResult,
{
    let (loss, g) = grad_fn(params)?;
    let combined = g.add_scaled(&params.sub(anchor), mu as f32);
    Ok((loss, params.add_scaled(&combined, -(lr as f32))))
}

/// `params - lr * grad`.
pub fn sgd_step(params: &ParamVector, grad: &ParamVector, lr: f64) -> ParamVector {
    params.add_scaled(grad, -(lr as f32))
}

pub fn sam_step(
    spec: &ModelSpec,
    params: &ParamVector,
    batch: &Batch,
    lr: f64,
    rho: f64,
) -> Result<ParamVector, ModelError> {
    sam_update(params, lr, rho, &mut |p| loss_and_grad(spec, p, batch)).map(|(_, p)| p)
}

pub fn prox_step(
    spec: &ModelSpec,
    params: &ParamVector,
    batch: &Batch,
    anchor: &ParamVector,
    lr: f64,
    mu: f64,
) -> Result<ParamVector, ModelError> {
    prox_update(params, anchor, lr, mu, &mut |p| loss_and_grad(spec, p, batch)).map(|(_, p)| p)
}

pub fn lesam_step(
    spec: &ModelSpec,
    params: &ParamVector,
    batch: &Batch,
    lr: f64,
    rho: f64,
    global_dir: &ParamVector,
) -> Result<ParamVector, ModelError> {
    lesam_update(params, lr, rho, global_dir, &mut |p| {
        loss_and_grad(spec, p, batch)
    })
    .map(|(_, p)| p)
}

pub fn wmsam_step(
    spec: &ModelSpec,
    params: &ParamVector,
    batch: &Batch,
    lr: f64,
    rho: f64,
    perturb_state: &ParamVector,
    momentum: f64,
) -> Result<(ParamVector, ParamVector), ModelError> {
    wmsam_update(params, lr, rho, momentum, perturb_state, &mut |p| {
        loss_and_grad(spec, p, batch)
    })
    .map(|(_, p, s)| (p, s))
}

/// Inputs shared by every local-training call for one (round, client) pair.
#[derive(Debug, Clone, Copy)]
pub struct LocalContext<'a> {
    pub spec: &'a ModelSpec,
    pub global: &'a ParamVector,
    pub data: &'a Dataset,
    pub partition: &'a ClientPartition,
    pub client: usize,
    pub epochs: usize,
    pub batch_size: usize,
    /// Epoch seeds derive from this as `derive_seed(round_seed, "epoch", [e])`.
    pub round_seed: u64,
}

/// Run the configured step rule for `epochs` epochs starting from the global
/// model. The momentum-perturbation state lives for the duration of this
/// call only, so it persists across batches within a round and resets
/// between rounds.
pub fn local_train(
    ctx: &LocalContext,
    cfg: &OptimizerConfig,
    global_dir: Option<&ParamVector>,
) -> Result<LocalReport, ModelError> {
    assert!(ctx.epochs >= 1, "need at least one local epoch");
    let zero_dir;
    let dir = match global_dir {
        Some(d) => d,
        None => {
            zero_dir = ParamVector::zeros(ctx.global.len());
            &zero_dir
        }
    };

    let mut params = ctx.global.clone();
    let mut perturb_state = ParamVector::zeros(ctx.global.len());
    let mut loss_sum = 0.0f64;
    let mut steps = 0usize;
    let mut final_epoch_loss = 0.0f64;

    for epoch in 0..ctx.epochs {
        let epoch_seed = derive_seed(ctx.round_seed, "epoch", &[epoch as u64]);
        let batches = batch_iter(
            ctx.data,
            ctx.partition,
            ctx.client,
            ctx.batch_size,
            epoch_seed,
        );
        if batches.is_empty() {
            continue;
        }
        let mut epoch_loss = 0.0f64;
        for batch in &batches {
            let mut grad_fn = |p: &ParamVector| loss_and_grad(ctx.spec, p, batch);
            let (loss, next) = match cfg.kind {
                OptimizerKind::Sgd => {
                    let (loss, g) = grad_fn(&params)?;
                    (loss, sgd_step(&params, &g, cfg.lr))
                }
                OptimizerKind::Prox => {
                    prox_update(&params, ctx.global, cfg.lr, cfg.mu, &mut grad_fn)?
                }
                OptimizerKind::Sam => sam_update(&params, cfg.lr, cfg.rho, &mut grad_fn)?,
                OptimizerKind::Lesam => {
                    lesam_update(&params, cfg.lr, cfg.rho, dir, &mut grad_fn)?
                }
                OptimizerKind::Wmsam => {
                    let (loss, next, state) = wmsam_update(
                        &params,
                        cfg.lr,
                        cfg.rho,
                        cfg.perturb_momentum,
                        &perturb_state,
                        &mut grad_fn,
                    )?;
                    perturb_state = state;
                    (loss, next)
                }
            };
            epoch_loss += loss;
            loss_sum += loss;
            steps += 1;
            params = next;
        }
        final_epoch_loss = epoch_loss / batches.len() as f64;
    }

    let rho_used = match cfg.kind {
        OptimizerKind::Sam | OptimizerKind::Lesam | OptimizerKind::Wmsam => cfg.rho,
        _ => 0.0,
    };
    Ok(LocalReport {
        delta: params.sub(ctx.global),
        mean_train_loss: if steps > 0 { loss_sum / steps as f64 } else { 0.0 },
        final_train_loss: final_epoch_loss,
        h: 0.0,
        rho_used,
        steps,
    })
}
