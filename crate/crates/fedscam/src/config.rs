//! Experiment configuration: a flat `key = value` text format with dotted
//! sections, strict unknown-key rejection, and documented defaults.
//!
//! ```text
//! algorithm = fedscam
//! seed = 42
//! rounds = 30
//! dataset.kind = synthetic
//! dataset.classes = 10
//! dirichlet.alpha = 0.1
//! scam.gamma = 1.0
//! ```
//!
//! Lines starting with `#` (or anything after a `#`) are comments. Every key
//! not set explicitly takes the default listed in [`ExperimentConfig`]'s
//! field docs; serializing a parsed config and re-parsing it yields an equal
//! config.

use crate::engine::Algorithm;
use crate::scam::{FedScamConfig, ScamVariant};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config error: {key} = {value} violates {constraint}")]
    Semantic {
        key: String,
        value: String,
        constraint: String,
    },
    #[error("config error: missing required key {0}")]
    Missing(String),
}

/// Where the training and test data come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetConfig {
    Synthetic {
        classes: usize,
        dim: usize,
        per_class: usize,
        test_per_class: usize,
        spread: f64,
    },
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
}

/// Step-rule hyperparameters for the baseline optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerHyper {
    /// Fixed perturbation radius for the fixed-radius SAM family.
    pub rho: f64,
    /// Proximal coefficient.
    pub mu: f64,
    /// Perturbation-momentum coefficient, in `[0, 1)`.
    pub perturb_momentum: f64,
}

/// Server-side hyperparameters for the baseline aggregators.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatorHyper {
    /// Server momentum, in `[0, 1)`.
    pub server_momentum: f64,
    /// Loss-power exponent.
    pub q: f64,
    /// Softmin temperature.
    pub lw_temperature: f64,
}

/// Fully resolved experiment description. Field defaults:
///
/// | key | default |
/// |---|---|
/// | `algorithm` | (required) |
/// | `seed` | 42 |
/// | `rounds` | 10 |
/// | `local_epochs` | 2 |
/// | `batch_size` | 32 |
/// | `lr` | 0.01 |
/// | `eval_every` | 1 |
/// | `clients` | 10 |
/// | `workers` | 0 (all cores) |
/// | `model.hidden` | 64,32 |
/// | `dataset.kind` | synthetic |
/// | `dataset.classes` / `dim` / `per_class` / `test_per_class` / `spread` | 10 / 16 / 200 / 100 / 0.35 |
/// | `dirichlet.alpha` / `dirichlet.min_size` | 0.5 / 10 |
/// | `optimizer.rho` / `mu` / `perturb_momentum` | 0.05 / 0.1 / 0.9 |
/// | `aggregator.server_momentum` / `q` / `lw_temperature` | 0.9 / 1.0 / 1.0 |
/// | `scam.rho_max` / `alpha_rho` / `gamma` / `beta` / `kappa` | 0.05 / 1.0 / 1.0 / 0.0 / 0.5 |
/// | `scam.lambda` / `clusters` / `summary_dim` / `het_batches` | 0.5 / 3 / 256 / 3 |
/// | `scam.clustering` / `variant` / `fixed_rho` | true / full / unset |
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub master_seed: u64,
    pub rounds: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub eval_every: usize,
    pub clients: usize,
    pub workers: usize,
    pub hidden_widths: Vec<usize>,
    pub dataset: DatasetConfig,
    pub dirichlet_alpha: f64,
    pub dirichlet_min_size: usize,
    pub opt: OptimizerHyper,
    pub agg: AggregatorHyper,
    pub scam: FedScamConfig,
}

impl ExperimentConfig {
    /// A valid config for the given algorithm with every default applied.
    pub fn defaults(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            master_seed: 42,
            rounds: 10,
            local_epochs: 2,
            batch_size: 32,
            lr: 0.01,
            eval_every: 1,
            clients: 10,
            workers: 0,
            hidden_widths: vec![64, 32],
            dataset: DatasetConfig::Synthetic {
                classes: 10,
                dim: 16,
                per_class: 200,
                test_per_class: 100,
                spread: 0.35,
            },
            dirichlet_alpha: 0.5,
            dirichlet_min_size: 10,
            opt: OptimizerHyper {
                rho: 0.05,
                mu: 0.1,
                perturb_momentum: 0.9,
            },
            agg: AggregatorHyper {
                server_momentum: 0.9,
                q: 1.0,
                lw_temperature: 1.0,
            },
            scam: FedScamConfig::default(),
        }
    }
}

struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '.')
            {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("invalid key `{key}`"),
                });
            }
            if entries.insert(key.clone(), (value, line)).is_some() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }
}

fn semantic(key: &str, value: impl std::fmt::Display, constraint: &str) -> ConfigError {
    ConfigError::Semantic {
        key: key.to_string(),
        value: value.to_string(),
        constraint: constraint.to_string(),
    }
}

fn parse_value<T: std::str::FromStr>(
    key: &str,
    raw: &str,
    line: usize,
    type_name: &str,
) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| ConfigError::Parse {
        line,
        message: format!("key `{key}`: cannot parse `{raw}` as {type_name}"),
    })
}

macro_rules! take_typed {
    ($raw:expr, $key:expr, $default:expr, $ty:ty, $tyname:expr) => {
        match $raw.take($key) {
            Some((value, line)) => parse_value::<$ty>($key, &value, line, $tyname)?,
            None => $default,
        }
    };
}

fn take_bool(raw: &mut RawConfig, key: &str, default: bool) -> Result<bool, ConfigError> {
    match raw.take(key) {
        Some((value, line)) => match value.as_str() {
            "true" | "on" | "1" => Ok(true),
            "false" | "off" | "0" => Ok(false),
            other => Err(ConfigError::Parse {
                line,
                message: format!("key `{key}`: cannot parse `{other}` as bool"),
            }),
        },
        None => Ok(default),
    }
}

/// Parse and fully validate a config from text.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut raw = RawConfig::parse(text)?;

    let algorithm = match raw.take("algorithm") {
        Some((value, line)) => Algorithm::parse(&value).ok_or_else(|| ConfigError::Parse {
            line,
            message: format!(
                "unknown algorithm `{value}` (expected one of {})",
                Algorithm::ALL_NAMES.join(", ")
            ),
        })?,
        None => return Err(ConfigError::Missing("algorithm".into())),
    };

    let mut cfg = ExperimentConfig::defaults(algorithm);
    cfg.master_seed = take_typed!(raw, "seed", cfg.master_seed, u64, "u64");
    cfg.rounds = take_typed!(raw, "rounds", cfg.rounds, usize, "usize");
    cfg.local_epochs = take_typed!(raw, "local_epochs", cfg.local_epochs, usize, "usize");
    cfg.batch_size = take_typed!(raw, "batch_size", cfg.batch_size, usize, "usize");
    cfg.lr = take_typed!(raw, "lr", cfg.lr, f64, "f64");
    cfg.eval_every = take_typed!(raw, "eval_every", cfg.eval_every, usize, "usize");
    cfg.clients = take_typed!(raw, "clients", cfg.clients, usize, "usize");
    cfg.workers = take_typed!(raw, "workers", cfg.workers, usize, "usize");

    if let Some((value, line)) = raw.take("model.hidden") {
        let mut widths = Vec::new();
        if !value.trim().is_empty() {
            for part in value.split(',') {
                widths.push(parse_value::<usize>(
                    "model.hidden",
                    part.trim(),
                    line,
                    "usize list",
                )?);
            }
        }
        cfg.hidden_widths = widths;
    }

    let kind = raw
        .take("dataset.kind")
        .map(|(v, _)| v)
        .unwrap_or_else(|| "synthetic".to_string());
    cfg.dataset = match kind.as_str() {
        "synthetic" => DatasetConfig::Synthetic {
            classes: take_typed!(raw, "dataset.classes", 10, usize, "usize"),
            dim: take_typed!(raw, "dataset.dim", 16, usize, "usize"),
            per_class: take_typed!(raw, "dataset.per_class", 200, usize, "usize"),
            test_per_class: take_typed!(raw, "dataset.test_per_class", 100, usize, "usize"),
            spread: take_typed!(raw, "dataset.spread", 0.35, f64, "f64"),
        },
        "idx" => {
            let mut path = |key: &str| -> Result<PathBuf, ConfigError> {
                raw.take(key)
                    .map(|(v, _)| PathBuf::from(v))
                    .ok_or_else(|| ConfigError::Missing(key.into()))
            };
            DatasetConfig::Idx {
                train_images: path("dataset.train_images")?,
                train_labels: path("dataset.train_labels")?,
                test_images: path("dataset.test_images")?,
                test_labels: path("dataset.test_labels")?,
            }
        }
        other => {
            return Err(semantic(
                "dataset.kind",
                other,
                "dataset.kind in {synthetic, idx}",
            ))
        }
    };

    cfg.dirichlet_alpha = take_typed!(raw, "dirichlet.alpha", cfg.dirichlet_alpha, f64, "f64");
    cfg.dirichlet_min_size = take_typed!(
        raw,
        "dirichlet.min_size",
        cfg.dirichlet_min_size,
        usize,
        "usize"
    );

    cfg.opt.rho = take_typed!(raw, "optimizer.rho", cfg.opt.rho, f64, "f64");
    cfg.opt.mu = take_typed!(raw, "optimizer.mu", cfg.opt.mu, f64, "f64");
    cfg.opt.perturb_momentum = take_typed!(
        raw,
        "optimizer.perturb_momentum",
        cfg.opt.perturb_momentum,
        f64,
        "f64"
    );

    cfg.agg.server_momentum = take_typed!(
        raw,
        "aggregator.server_momentum",
        cfg.agg.server_momentum,
        f64,
        "f64"
    );
    cfg.agg.q = take_typed!(raw, "aggregator.q", cfg.agg.q, f64, "f64");
    cfg.agg.lw_temperature = take_typed!(
        raw,
        "aggregator.lw_temperature",
        cfg.agg.lw_temperature,
        f64,
        "f64"
    );

    cfg.scam.rho_max = take_typed!(raw, "scam.rho_max", cfg.scam.rho_max, f64, "f64");
    cfg.scam.alpha_rho = take_typed!(raw, "scam.alpha_rho", cfg.scam.alpha_rho, f64, "f64");
    cfg.scam.gamma = take_typed!(raw, "scam.gamma", cfg.scam.gamma, f64, "f64");
    cfg.scam.beta = take_typed!(raw, "scam.beta", cfg.scam.beta, f64, "f64");
    cfg.scam.kappa = take_typed!(raw, "scam.kappa", cfg.scam.kappa, f64, "f64");
    cfg.scam.lambda = take_typed!(raw, "scam.lambda", cfg.scam.lambda, f64, "f64");
    cfg.scam.clusters = take_typed!(raw, "scam.clusters", cfg.scam.clusters, usize, "usize");
    cfg.scam.summary_dim = take_typed!(
        raw,
        "scam.summary_dim",
        cfg.scam.summary_dim,
        usize,
        "usize"
    );
    cfg.scam.het_batches = take_typed!(
        raw,
        "scam.het_batches",
        cfg.scam.het_batches,
        usize,
        "usize"
    );
    cfg.scam.clustering_enabled = take_bool(&mut raw, "scam.clustering", true)?;
    if let Some((value, line)) = raw.take("scam.variant") {
        cfg.scam.variant = match value.as_str() {
            "full" => ScamVariant::Full,
            "wa_only" => ScamVariant::WaOnly,
            "sam_only" => ScamVariant::SamOnly,
            other => {
                return Err(ConfigError::Parse {
                    line,
                    message: format!(
                        "key `scam.variant`: `{other}` is not one of full, wa_only, sam_only"
                    ),
                })
            }
        };
    }
    if let Some((value, line)) = raw.take("scam.fixed_rho") {
        cfg.scam.fixed_rho = Some(parse_value::<f64>("scam.fixed_rho", &value, line, "f64")?);
    }

    if let Some((key, (_, line))) = raw.entries.iter().next() {
        return Err(ConfigError::Parse {
            line: *line,
            message: format!("unknown key `{key}`"),
        });
    }

    validate(&cfg)?;
    Ok(cfg)
}

/// Parse a config file.
pub fn parse_config_path(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if cfg.rounds < 1 {
        return Err(semantic("rounds", cfg.rounds, "rounds >= 1"));
    }
    if cfg.local_epochs < 1 {
        return Err(semantic("local_epochs", cfg.local_epochs, "local_epochs >= 1"));
    }
    if cfg.batch_size < 1 {
        return Err(semantic("batch_size", cfg.batch_size, "batch_size >= 1"));
    }
    if cfg.eval_every < 1 {
        return Err(semantic("eval_every", cfg.eval_every, "eval_every >= 1"));
    }
    if cfg.clients < 1 {
        return Err(semantic("clients", cfg.clients, "clients >= 1"));
    }
    if cfg.lr <= 0.0 || !cfg.lr.is_finite() {
        return Err(semantic("lr", cfg.lr, "lr > 0"));
    }
    if cfg.hidden_widths.contains(&0) {
        return Err(semantic(
            "model.hidden",
            "0",
            "model.hidden widths >= 1",
        ));
    }
    if let DatasetConfig::Synthetic {
        classes,
        dim,
        per_class,
        test_per_class,
        spread,
    } = &cfg.dataset
    {
        if *classes < 2 {
            return Err(semantic("dataset.classes", classes, "dataset.classes >= 2"));
        }
        if *dim < 2 {
            return Err(semantic("dataset.dim", dim, "dataset.dim >= 2"));
        }
        if *per_class < 1 {
            return Err(semantic("dataset.per_class", per_class, "dataset.per_class >= 1"));
        }
        if *test_per_class < 1 {
            return Err(semantic(
                "dataset.test_per_class",
                test_per_class,
                "dataset.test_per_class >= 1",
            ));
        }
        if *spread < 0.0 || !spread.is_finite() {
            return Err(semantic("dataset.spread", spread, "dataset.spread >= 0"));
        }
    }
    if cfg.dirichlet_alpha <= 0.0 || !cfg.dirichlet_alpha.is_finite() {
        return Err(semantic(
            "dirichlet.alpha",
            cfg.dirichlet_alpha,
            "dirichlet.alpha > 0",
        ));
    }
    if cfg.opt.rho < 0.0 || cfg.opt.rho.is_nan() {
        return Err(semantic("optimizer.rho", cfg.opt.rho, "optimizer.rho >= 0"));
    }
    if cfg.opt.mu < 0.0 || cfg.opt.mu.is_nan() {
        return Err(semantic("optimizer.mu", cfg.opt.mu, "optimizer.mu >= 0"));
    }
    if cfg.opt.perturb_momentum < 0.0 || cfg.opt.perturb_momentum >= 1.0 || cfg.opt.perturb_momentum.is_nan() {
        return Err(semantic(
            "optimizer.perturb_momentum",
            cfg.opt.perturb_momentum,
            "optimizer.perturb_momentum in [0,1)",
        ));
    }
    if cfg.agg.server_momentum < 0.0 || cfg.agg.server_momentum >= 1.0 || cfg.agg.server_momentum.is_nan() {
        return Err(semantic(
            "aggregator.server_momentum",
            cfg.agg.server_momentum,
            "aggregator.server_momentum in [0,1)",
        ));
    }
    if cfg.agg.q < 0.0 || cfg.agg.q.is_nan() {
        return Err(semantic("aggregator.q", cfg.agg.q, "aggregator.q >= 0"));
    }
    if cfg.agg.lw_temperature <= 0.0 || cfg.agg.lw_temperature.is_nan() {
        return Err(semantic(
            "aggregator.lw_temperature",
            cfg.agg.lw_temperature,
            "aggregator.lw_temperature > 0",
        ));
    }
    let s = &cfg.scam;
    if s.rho_max <= 0.0 || !s.rho_max.is_finite() {
        return Err(semantic("scam.rho_max", s.rho_max, "scam.rho_max > 0"));
    }
    if s.alpha_rho < 0.0 || s.alpha_rho.is_nan() {
        return Err(semantic("scam.alpha_rho", s.alpha_rho, "scam.alpha_rho >= 0"));
    }
    if s.gamma < 0.0 || s.gamma.is_nan() {
        return Err(semantic("scam.gamma", s.gamma, "scam.gamma >= 0"));
    }
    if s.beta < 0.0 || s.beta.is_nan() {
        return Err(semantic("scam.beta", s.beta, "scam.beta >= 0"));
    }
    if s.kappa < 0.0 || s.kappa.is_nan() {
        return Err(semantic("scam.kappa", s.kappa, "scam.kappa >= 0"));
    }
    if s.lambda <= 0.0 || s.lambda > 1.0 || s.lambda.is_nan() {
        return Err(semantic("scam.lambda", s.lambda, "scam.lambda in (0,1]"));
    }
    if s.clusters < 1 {
        return Err(semantic("scam.clusters", s.clusters, "scam.clusters >= 1"));
    }
    if s.summary_dim < 1 {
        return Err(semantic(
            "scam.summary_dim",
            s.summary_dim,
            "scam.summary_dim >= 1",
        ));
    }
    if s.het_batches < 1 {
        return Err(semantic(
            "scam.het_batches",
            s.het_batches,
            "scam.het_batches >= 1",
        ));
    }
    if let Some(fr) = s.fixed_rho {
        if fr < 0.0 || !fr.is_finite() {
            return Err(semantic("scam.fixed_rho", fr, "scam.fixed_rho >= 0"));
        }
    }
    Ok(())
}

/// Serialize a config with every key explicit. Re-parsing the output yields
/// an equal config; `{:?}` float formatting round-trips exactly.
pub fn to_config_string(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "algorithm = {}", cfg.algorithm.name());
    let _ = writeln!(out, "seed = {}", cfg.master_seed);
    let _ = writeln!(out, "rounds = {}", cfg.rounds);
    let _ = writeln!(out, "local_epochs = {}", cfg.local_epochs);
    let _ = writeln!(out, "batch_size = {}", cfg.batch_size);
    let _ = writeln!(out, "lr = {:?}", cfg.lr);
    let _ = writeln!(out, "eval_every = {}", cfg.eval_every);
    let _ = writeln!(out, "clients = {}", cfg.clients);
    let _ = writeln!(out, "workers = {}", cfg.workers);
    let widths: Vec<String> = cfg.hidden_widths.iter().map(|w| w.to_string()).collect();
    let _ = writeln!(out, "model.hidden = {}", widths.join(","));
    match &cfg.dataset {
        DatasetConfig::Synthetic {
            classes,
            dim,
            per_class,
            test_per_class,
            spread,
        } => {
            let _ = writeln!(out, "dataset.kind = synthetic");
            let _ = writeln!(out, "dataset.classes = {classes}");
            let _ = writeln!(out, "dataset.dim = {dim}");
            let _ = writeln!(out, "dataset.per_class = {per_class}");
            let _ = writeln!(out, "dataset.test_per_class = {test_per_class}");
            let _ = writeln!(out, "dataset.spread = {spread:?}");
        }
        DatasetConfig::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
        } => {
            let _ = writeln!(out, "dataset.kind = idx");
            let _ = writeln!(out, "dataset.train_images = {}", train_images.display());
            let _ = writeln!(out, "dataset.train_labels = {}", train_labels.display());
            let _ = writeln!(out, "dataset.test_images = {}", test_images.display());
            let _ = writeln!(out, "dataset.test_labels = {}", test_labels.display());
        }
    }
    let _ = writeln!(out, "dirichlet.alpha = {:?}", cfg.dirichlet_alpha);
    let _ = writeln!(out, "dirichlet.min_size = {}", cfg.dirichlet_min_size);
    let _ = writeln!(out, "optimizer.rho = {:?}", cfg.opt.rho);
    let _ = writeln!(out, "optimizer.mu = {:?}", cfg.opt.mu);
    let _ = writeln!(
        out,
        "optimizer.perturb_momentum = {:?}",
        cfg.opt.perturb_momentum
    );
    let _ = writeln!(
        out,
        "aggregator.server_momentum = {:?}",
        cfg.agg.server_momentum
    );
    let _ = writeln!(out, "aggregator.q = {:?}", cfg.agg.q);
    let _ = writeln!(out, "aggregator.lw_temperature = {:?}", cfg.agg.lw_temperature);
    let _ = writeln!(out, "scam.rho_max = {:?}", cfg.scam.rho_max);
    let _ = writeln!(out, "scam.alpha_rho = {:?}", cfg.scam.alpha_rho);
    let _ = writeln!(out, "scam.gamma = {:?}", cfg.scam.gamma);
    let _ = writeln!(out, "scam.beta = {:?}", cfg.scam.beta);
    let _ = writeln!(out, "scam.kappa = {:?}", cfg.scam.kappa);
    let _ = writeln!(out, "scam.lambda = {:?}", cfg.scam.lambda);
    let _ = writeln!(out, "scam.clusters = {}", cfg.scam.clusters);
    let _ = writeln!(out, "scam.summary_dim = {}", cfg.scam.summary_dim);
    let _ = writeln!(out, "scam.het_batches = {}", cfg.scam.het_batches);
    let _ = writeln!(out, "scam.clustering = {}", cfg.scam.clustering_enabled);
    let _ = writeln!(out, "scam.variant = {}", cfg.scam.variant.name());
    if let Some(fr) = cfg.scam.fixed_rho {
        let _ = writeln!(out, "scam.fixed_rho = {fr:?}");
    }
    out
}
