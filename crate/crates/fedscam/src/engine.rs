//! Round orchestration: broadcast, concurrent client work, barrier,
//! aggregation, evaluation, and metric recording.
//!
//! Client workloads run fork/join on a configurable worker pool; every
//! client's seeds derive from `(master_seed, round, ...)` labels, so results
//! are independent of execution order and worker count. The server phase is
//! single-threaded.

use crate::baselines::{
    fedavg_weights, fedavgm_apply, fedlw_weights, fednolowe_weights, qfedavg_weights,
    uniform_weights, AggregatorKind, AggregatorState,
};
use crate::config::{DatasetConfig, ExperimentConfig};
use crate::data::{
    batch_iter, dirichlet_partition, generate_synthetic, generate_synthetic_holdout, load_idx,
    ClientPartition, DataError, Dataset, DirichletSpec, IdxError, PartitionError,
};
use crate::model::{evaluate, init_params, ModelError, ModelSpec, ParamVector};
use crate::optim::{local_train, LocalContext, LocalReport, OptimizerConfig};
use crate::scam::{
    adjust_and_modulate, alignment, cluster_conflict_dampen, estimate_heterogeneity,
    pilot_radius, pilot_summary, scam_aggregate, scam_weights, update_summary, ClientSignals,
    DirectionMemory, RandomProjection, ScamVariant,
};
use crate::seed::derive_seed;
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error("train/test feature dims differ: {train} vs {test}")]
    DatasetMismatch { train: usize, test: usize },
    #[error("failed to build worker pool: {0}")]
    Pool(String),
}

/// The selectable algorithms. The heterogeneity-modulated method's ablation
/// variant (full / aggregation-only / radius-only) comes from its own config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    FedAvg,
    Uniform,
    FedAvgM,
    QFedAvg,
    FedProx,
    FedLw,
    FedNoLoWe,
    FedLwSam,
    FedSam,
    FedLesam,
    FedWmsam,
    FedScam,
}

impl Algorithm {
    pub const ALL_NAMES: &'static [&'static str] = &[
        "fedavg",
        "uniform",
        "fedavgm",
        "qfedavg",
        "fedprox",
        "fedlw",
        "fednolowe",
        "fedlwsam",
        "fedsam",
        "fedlesam",
        "fedwmsam",
        "fedscam",
    ];

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "fedavg" => Algorithm::FedAvg,
            "uniform" => Algorithm::Uniform,
            "fedavgm" => Algorithm::FedAvgM,
            "qfedavg" => Algorithm::QFedAvg,
            "fedprox" => Algorithm::FedProx,
            "fedlw" => Algorithm::FedLw,
            "fednolowe" => Algorithm::FedNoLoWe,
            "fedlwsam" => Algorithm::FedLwSam,
            "fedsam" => Algorithm::FedSam,
            "fedlesam" => Algorithm::FedLesam,
            "fedwmsam" => Algorithm::FedWmsam,
            "fedscam" => Algorithm::FedScam,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::FedAvg => "fedavg",
            Algorithm::Uniform => "uniform",
            Algorithm::FedAvgM => "fedavgm",
            Algorithm::QFedAvg => "qfedavg",
            Algorithm::FedProx => "fedprox",
            Algorithm::FedLw => "fedlw",
            Algorithm::FedNoLoWe => "fednolowe",
            Algorithm::FedLwSam => "fedlwsam",
            Algorithm::FedSam => "fedsam",
            Algorithm::FedLesam => "fedlesam",
            Algorithm::FedWmsam => "fedwmsam",
            Algorithm::FedScam => "fedscam",
        }
    }

    /// Methods realized as documented approximations of their namesakes.
    pub fn is_approx(&self) -> bool {
        matches!(
            self,
            Algorithm::QFedAvg
                | Algorithm::FedLw
                | Algorithm::FedLwSam
                | Algorithm::FedLesam
                | Algorithm::FedWmsam
        )
    }
}

/// Per-client signals surfaced in the round record during adaptive runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScamRoundSignals {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Everything recorded about one round.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub round: usize,
    /// Present on evaluation rounds (`round % eval_every == 0` and the last
    /// round).
    pub test_accuracy: Option<f64>,
    pub test_loss: Option<f64>,
    /// Mean L2 deviation of local models from the broadcast global model.
    pub drift: f64,
    /// Mean per-client training radius; present only for adaptive-radius
    /// runs.
    pub mean_rho: Option<f64>,
    pub weights: Vec<f64>,
    pub scam: Option<ScamRoundSignals>,
    pub wall_millis: u64,
}

/// Mean L2 distance of local models from the pre-aggregation global model.
pub fn client_drift(locals: &[ParamVector], global: &ParamVector) -> f64 {
    assert!(!locals.is_empty(), "drift needs at least one client");
    locals
        .iter()
        .map(|w| w.sub(global).l2_norm())
        .sum::<f64>()
        / locals.len() as f64
}

struct ClientOutcome {
    report: LocalReport,
    signals: Option<ClientSignals>,
}

/// A running experiment: immutable data plane plus the mutable server state.
pub struct Experiment {
    cfg: ExperimentConfig,
    spec: ModelSpec,
    train: Dataset,
    test: Dataset,
    partition: ClientPartition,
    proj: RandomProjection,
    pool: Option<rayon::ThreadPool>,
    params: ParamVector,
    memory: DirectionMemory,
    agg_state: AggregatorState,
    prev_update: Option<ParamVector>,
    round: usize,
}

impl Experiment {
    /// Load data, partition it, and initialize the global model. All
    /// configuration errors surface here, before round 0.
    pub fn new(cfg: ExperimentConfig) -> Result<Self, RunError> {
        let (train, test) = match &cfg.dataset {
            DatasetConfig::Synthetic {
                classes,
                dim,
                per_class,
                test_per_class,
                spread,
            } => {
                let train =
                    generate_synthetic(*classes, *dim, *per_class, *spread, cfg.master_seed);
                let test = generate_synthetic_holdout(
                    *classes,
                    *dim,
                    *test_per_class,
                    *spread,
                    cfg.master_seed,
                );
                (train, test)
            }
            DatasetConfig::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => {
                let train = load_idx(train_images, train_labels)?;
                let test = load_idx(test_images, test_labels)?;
                (train, test)
            }
        };
        if train.dim() != test.dim() {
            return Err(RunError::DatasetMismatch {
                train: train.dim(),
                test: test.dim(),
            });
        }

        let partition = dirichlet_partition(
            &train,
            &DirichletSpec {
                alpha: cfg.dirichlet_alpha,
                num_clients: cfg.clients,
                min_size: cfg.dirichlet_min_size,
                seed: derive_seed(cfg.master_seed, "partition", &[]),
            },
        )?;

        let classes = train.classes().max(test.classes());
        let mut widths = Vec::with_capacity(cfg.hidden_widths.len() + 2);
        widths.push(train.dim());
        widths.extend_from_slice(&cfg.hidden_widths);
        widths.push(classes);
        let spec = ModelSpec::new(widths, derive_seed(cfg.master_seed, "init", &[]))?;
        let params = init_params(&spec);

        let proj = RandomProjection::new(
            cfg.scam.summary_dim,
            derive_seed(cfg.master_seed, "proj", &[]),
        );

        let pool = if cfg.workers > 0 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .map_err(|e| RunError::Pool(e.to_string()))?,
            )
        } else {
            None
        };

        let mut agg_state = AggregatorState::new(match cfg.algorithm {
            Algorithm::Uniform => AggregatorKind::Uniform,
            Algorithm::FedAvgM => AggregatorKind::FedAvgM,
            Algorithm::QFedAvg => AggregatorKind::QFedAvg,
            Algorithm::FedLw | Algorithm::FedLwSam => AggregatorKind::FedLw,
            Algorithm::FedNoLoWe => AggregatorKind::FedNoLoWe,
            _ => AggregatorKind::FedAvg,
        });
        agg_state.server_momentum = cfg.agg.server_momentum;
        agg_state.q = cfg.agg.q;
        agg_state.lw_temperature = cfg.agg.lw_temperature;

        Ok(Self {
            cfg,
            spec,
            train,
            test,
            partition,
            proj,
            pool,
            params,
            memory: DirectionMemory::unset(),
            agg_state,
            prev_update: None,
            round: 0,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn partition(&self) -> &ClientPartition {
        &self.partition
    }

    pub fn global_params(&self) -> &ParamVector {
        &self.params
    }

    pub fn rounds_done(&self) -> usize {
        self.round
    }

    fn optimizer_for(&self, training_rho: Option<f64>) -> OptimizerConfig {
        let lr = self.cfg.lr;
        match self.cfg.algorithm {
            Algorithm::FedAvg
            | Algorithm::Uniform
            | Algorithm::FedAvgM
            | Algorithm::QFedAvg
            | Algorithm::FedLw
            | Algorithm::FedNoLoWe => OptimizerConfig::sgd(lr),
            Algorithm::FedProx => OptimizerConfig::prox(lr, self.cfg.opt.mu),
            Algorithm::FedSam | Algorithm::FedLwSam => OptimizerConfig::sam(lr, self.cfg.opt.rho),
            Algorithm::FedLesam => OptimizerConfig::lesam(lr, self.cfg.opt.rho),
            Algorithm::FedWmsam => {
                OptimizerConfig::wmsam(lr, self.cfg.opt.rho, self.cfg.opt.perturb_momentum)
            }
            Algorithm::FedScam => match self.cfg.scam.variant {
                ScamVariant::WaOnly => OptimizerConfig::sgd(lr),
                _ => OptimizerConfig::sam(lr, training_rho.expect("scam radius computed")),
            },
        }
    }

    fn client_round(&self, client: usize, round_seed: u64) -> Result<ClientOutcome, RunError> {
        let ctx = LocalContext {
            spec: &self.spec,
            global: &self.params,
            data: &self.train,
            partition: &self.partition,
            client,
            epochs: self.cfg.local_epochs,
            batch_size: self.cfg.batch_size,
            round_seed,
        };

        if self.cfg.algorithm != Algorithm::FedScam {
            let opt = self.optimizer_for(None);
            let report = local_train(&ctx, &opt, self.prev_update.as_ref())?;
            return Ok(ClientOutcome {
                report,
                signals: None,
            });
        }

        // Signal phase: heterogeneity from the first B batches of the round's
        // first epoch, pilot direction on the first batch, alignment against
        // the direction memory.
        let scam = &self.cfg.scam;
        let epoch0_seed = derive_seed(round_seed, "epoch", &[0]);
        let batches = batch_iter(
            &self.train,
            &self.partition,
            client,
            self.cfg.batch_size,
            epoch0_seed,
        );
        let (h, summary) = if batches.is_empty() {
            (0.0, vec![0.0; self.proj.dim()])
        } else {
            let b = scam.het_batches.min(batches.len());
            let h = estimate_heterogeneity(&self.spec, &self.params, &batches[..b])?;
            let rho_pilot = pilot_radius(scam.rho_max, scam.alpha_rho, h);
            let summary = pilot_summary(
                &self.spec,
                &self.params,
                &batches[0],
                self.cfg.lr,
                rho_pilot,
                &self.proj,
            )?;
            (h, summary)
        };
        let c = alignment(&summary, &self.memory);
        let (h_adj, rho) = adjust_and_modulate(h, c, scam);

        let training_rho = scam.fixed_rho.unwrap_or(rho);
        let opt = self.optimizer_for(Some(training_rho));
        let mut report = local_train(&ctx, &opt, None)?;
        report.h = h;
        let update_summary = update_summary(&report.delta, &self.proj);
        Ok(ClientOutcome {
            report,
            signals: Some(ClientSignals {
                h,
                c,
                h_adj,
                rho,
                summary,
                update_summary,
            }),
        })
    }

    /// Execute one full-participation round and return its record.
    pub fn run_round(&mut self) -> Result<RoundRecord, RunError> {
        let started = Instant::now();
        let t = self.round;
        let round_seed = derive_seed(self.cfg.master_seed, "round", &[t as u64]);
        let m = self.cfg.clients;

        let work = || {
            (0..m)
                .into_par_iter()
                .map(|i| self.client_round(i, round_seed))
                .collect::<Result<Vec<ClientOutcome>, RunError>>()
        };
        let outcomes = match &self.pool {
            Some(pool) => pool.install(work),
            None => work(),
        }?;

        let counts = self.partition.sizes();
        let losses: Vec<f64> = outcomes.iter().map(|o| o.report.final_train_loss).collect();
        let deltas: Vec<&ParamVector> = outcomes.iter().map(|o| &o.report.delta).collect();

        let is_scam = self.cfg.algorithm == Algorithm::FedScam;
        let scam_cfg = &self.cfg.scam;

        let multipliers = if is_scam
            && scam_cfg.clustering_enabled
            && scam_cfg.variant != ScamVariant::SamOnly
        {
            let summaries: Vec<Vec<f64>> = outcomes
                .iter()
                .map(|o| o.signals.as_ref().unwrap().update_summary.clone())
                .collect();
            let norms: Vec<f64> = deltas.iter().map(|d| d.l2_norm()).collect();
            cluster_conflict_dampen(
                &summaries,
                &norms,
                scam_cfg.clusters,
                scam_cfg.lambda,
                derive_seed(round_seed, "kmeans", &[]),
            )
        } else {
            vec![1.0; m]
        };

        let weights = match self.cfg.algorithm {
            Algorithm::Uniform => uniform_weights(m),
            Algorithm::QFedAvg => qfedavg_weights(&counts, &losses, self.agg_state.q),
            Algorithm::FedLw | Algorithm::FedLwSam => {
                fedlw_weights(&counts, &losses, self.agg_state.lw_temperature)
            }
            Algorithm::FedNoLoWe => fednolowe_weights(&counts, &losses),
            Algorithm::FedScam if scam_cfg.variant != ScamVariant::SamOnly => {
                let h_adj: Vec<f64> = outcomes
                    .iter()
                    .map(|o| o.signals.as_ref().unwrap().h_adj)
                    .collect();
                let cs: Vec<f64> = outcomes
                    .iter()
                    .map(|o| o.signals.as_ref().unwrap().c)
                    .collect();
                scam_weights(
                    &counts,
                    &h_adj,
                    &cs,
                    &multipliers,
                    scam_cfg.gamma,
                    scam_cfg.beta,
                )
            }
            _ => fedavg_weights(&counts),
        };

        let new_params = match self.cfg.algorithm {
            Algorithm::FedAvgM => {
                let wd = crate::model::weighted_combination(&deltas, &weights);
                fedavgm_apply(&self.params, &wd, &mut self.agg_state)
            }
            Algorithm::FedScam => {
                let (next, memory) =
                    scam_aggregate(&self.params, &deltas, &weights, &self.memory, &self.proj);
                self.memory = memory;
                next
            }
            _ => {
                let wd = crate::model::weighted_combination(&deltas, &weights);
                self.params.add(&wd)
            }
        };

        let locals: Vec<ParamVector> = outcomes
            .iter()
            .map(|o| self.params.add(&o.report.delta))
            .collect();
        let drift = client_drift(&locals, &self.params);

        let adaptive = is_scam && scam_cfg.variant != ScamVariant::WaOnly;
        let mean_rho = if adaptive {
            let rhos: Vec<f64> = outcomes.iter().map(|o| o.report.rho_used).collect();
            if scam_cfg.fixed_rho.is_none() {
                for &r in &rhos {
                    assert!(
                        r > 0.0 && r <= scam_cfg.rho_max * (1.0 + 1e-12),
                        "adaptive radius {r} escaped (0, {}]",
                        scam_cfg.rho_max
                    );
                }
            }
            Some(rhos.iter().sum::<f64>() / rhos.len() as f64)
        } else {
            None
        };

        let scam_signals = if is_scam {
            Some(ScamRoundSignals {
                h: outcomes
                    .iter()
                    .map(|o| o.signals.as_ref().unwrap().h)
                    .collect(),
                c: outcomes
                    .iter()
                    .map(|o| o.signals.as_ref().unwrap().c)
                    .collect(),
                rho: outcomes.iter().map(|o| o.report.rho_used).collect(),
            })
        } else {
            None
        };

        self.prev_update = Some(new_params.sub(&self.params));
        self.params = new_params;
        self.round += 1;

        let evaluate_now = t.is_multiple_of(self.cfg.eval_every) || t + 1 == self.cfg.rounds;
        let (test_accuracy, test_loss) = if evaluate_now {
            let (acc, loss) = evaluate(&self.spec, &self.params, &self.test)?;
            (Some(acc), Some(loss))
        } else {
            (None, None)
        };

        Ok(RoundRecord {
            round: t,
            test_accuracy,
            test_loss,
            drift,
            mean_rho,
            weights,
            scam: scam_signals,
            wall_millis: started.elapsed().as_millis() as u64,
        })
    }
}

/// Summary of a finished experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<RoundRecord>,
    pub final_accuracy: f64,
    pub best_accuracy: f64,
    pub total_wall_millis: u64,
    pub partition_checksum: u64,
}

/// Run all configured rounds and summarize.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    let started = Instant::now();
    let mut experiment = Experiment::new(cfg.clone())?;
    let mut records = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        records.push(experiment.run_round()?);
    }
    Ok(summarize(
        records,
        experiment.partition().checksum(),
        started.elapsed().as_millis() as u64,
    ))
}

pub(crate) fn summarize(
    records: Vec<RoundRecord>,
    partition_checksum: u64,
    total_wall_millis: u64,
) -> ExperimentOutput {
    let final_accuracy = records
        .iter()
        .rev()
        .find_map(|r| r.test_accuracy)
        .unwrap_or(0.0);
    let best_accuracy = records
        .iter()
        .filter_map(|r| r.test_accuracy)
        .fold(0.0f64, f64::max);
    ExperimentOutput {
        records,
        final_accuracy,
        best_accuracy,
        total_wall_millis,
        partition_checksum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn small_cfg(algorithm: Algorithm) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(algorithm);
        cfg.rounds = 3;
        cfg.clients = 4;
        cfg.local_epochs = 1;
        cfg.dataset = DatasetConfig::Synthetic {
            classes: 4,
            dim: 8,
            per_class: 60,
            test_per_class: 30,
            spread: 0.3,
        };
        cfg.hidden_widths = vec![16];
        cfg.dirichlet_alpha = 0.5;
        cfg.workers = 1;
        cfg
    }

    #[test]
    fn client_drift_trivials() {
        let g = ParamVector::zeros(3);
        let w1 = ParamVector::from_vec(vec![1.0, 0.0, 0.0]);
        let w3 = ParamVector::from_vec(vec![0.0, 3.0, 0.0]);
        assert_eq!(client_drift(&[g.clone(), g.clone()], &g), 0.0);
        assert_eq!(client_drift(&[w1, w3], &g), 2.0);
    }

    #[test]
    fn drift_matches_delta_norm_oracle() {
        let cfg = small_cfg(Algorithm::FedAvg);
        let mut exp = Experiment::new(cfg).unwrap();
        let round_seed = derive_seed(exp.cfg.master_seed, "round", &[0]);
        let outcomes: Vec<ClientOutcome> = (0..exp.cfg.clients)
            .map(|i| exp.client_round(i, round_seed).unwrap())
            .collect();
        let oracle: f64 = outcomes
            .iter()
            .map(|o| o.report.delta.l2_norm())
            .sum::<f64>()
            / outcomes.len() as f64;
        let record = exp.run_round().unwrap();
        assert!((record.drift - oracle).abs() < 1e-9);
    }

    #[test]
    fn single_client_fedavg_adopts_the_local_model() {
        let mut cfg = small_cfg(Algorithm::FedAvg);
        cfg.clients = 1;
        cfg.dirichlet_min_size = 0;
        let mut exp = Experiment::new(cfg.clone()).unwrap();
        let w0 = exp.global_params().clone();
        let round_seed = derive_seed(cfg.master_seed, "round", &[0]);
        let ctx = LocalContext {
            spec: &exp.spec,
            global: &w0,
            data: &exp.train,
            partition: &exp.partition,
            client: 0,
            epochs: cfg.local_epochs,
            batch_size: cfg.batch_size,
            round_seed,
        };
        let expected = local_train(&ctx, &OptimizerConfig::sgd(cfg.lr), None).unwrap();
        exp.run_round().unwrap();
        // Weight 1.0 applies the client's delta verbatim.
        assert_eq!(exp.global_params(), &w0.add(&expected.delta));
    }

    #[test]
    fn rounds_are_bit_reproducible() {
        let cfg = small_cfg(Algorithm::FedScam);
        let run = |cfg: &ExperimentConfig| {
            let mut exp = Experiment::new(cfg.clone()).unwrap();
            let mut recs = Vec::new();
            for _ in 0..cfg.rounds {
                recs.push(exp.run_round().unwrap());
            }
            (exp.params.clone(), recs)
        };
        let (p1, r1) = run(&cfg);
        let (p2, r2) = run(&cfg);
        assert_eq!(p1, p2);
        for (a, b) in r1.iter().zip(&r2) {
            assert_eq!(a.test_accuracy, b.test_accuracy);
            assert_eq!(a.drift, b.drift);
            assert_eq!(a.weights, b.weights);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut cfg = small_cfg(Algorithm::FedScam);
        cfg.workers = 1;
        let serial = run_experiment(&cfg).unwrap();
        cfg.workers = 4;
        let parallel = run_experiment(&cfg).unwrap();
        for (a, b) in serial.records.iter().zip(&parallel.records) {
            assert_eq!(a.test_accuracy, b.test_accuracy);
            assert_eq!(a.weights, b.weights);
            assert_eq!(a.drift, b.drift);
        }
    }

    #[test]
    fn scam_records_carry_bounded_radii() {
        let cfg = small_cfg(Algorithm::FedScam);
        let out = run_experiment(&cfg).unwrap();
        for rec in &out.records {
            let signals = rec.scam.as_ref().unwrap();
            assert_eq!(signals.rho.len(), cfg.clients);
            for &r in &signals.rho {
                assert!(r > 0.0 && r <= 0.05 + 1e-15);
            }
            assert!(rec.mean_rho.unwrap() <= 0.05 + 1e-15);
            assert!(rec.drift >= 0.0);
            let wsum: f64 = rec.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn expected_round_count_and_learning_progress() {
        let mut cfg = small_cfg(Algorithm::FedAvg);
        cfg.rounds = 10;
        cfg.local_epochs = 2;
        cfg.lr = 0.1;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 10);
        let first = out.records.first().unwrap().test_accuracy.unwrap();
        let last = out.records.last().unwrap().test_accuracy.unwrap();
        assert!(last > first, "no learning: {first} -> {last}");
        assert_eq!(out.final_accuracy, last);
        assert!(out.best_accuracy >= last);
    }

    #[test]
    fn eval_every_skips_intermediate_rounds() {
        let mut cfg = small_cfg(Algorithm::FedAvg);
        cfg.rounds = 5;
        cfg.eval_every = 2;
        let out = run_experiment(&cfg).unwrap();
        let evals: Vec<bool> = out
            .records
            .iter()
            .map(|r| r.test_accuracy.is_some())
            .collect();
        // rounds 0, 2, 4 evaluate; 4 is also the last round.
        assert_eq!(evals, vec![true, false, true, false, true]);
    }

    #[test]
    fn every_algorithm_runs_end_to_end() {
        for name in Algorithm::ALL_NAMES {
            let mut cfg = small_cfg(Algorithm::parse(name).unwrap());
            cfg.rounds = 2;
            let out = run_experiment(&cfg).unwrap();
            assert_eq!(out.records.len(), 2, "{name}");
            assert!(out.final_accuracy > 0.0, "{name}");
        }
    }
}
