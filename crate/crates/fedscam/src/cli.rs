//! Command-line entry point: `run` one experiment, `partition-stats` for
//! label-skew diagnostics, and `compare` to run several algorithms on the
//! identical partition, model init, and batch schedule.
//!
//! Exit codes: 0 success, 2 configuration error, 1 runtime error.

use crate::config::{parse_config_path, ExperimentConfig};
use crate::data::{
    dirichlet_partition, generate_synthetic, label_entropy, label_histogram, load_idx, Dataset,
    DirichletSpec,
};
use crate::engine::{summarize, Algorithm, Experiment, RoundRecord};
use crate::metrics::{format_round_row, MetricsSink, RunSummary, ROUND_CSV_HEADER};
use crate::seed::derive_seed;
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(
    name = "fedscam",
    about = "Deterministic federated-optimization experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// Experiment config file (flat `key = value` text).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's worker-thread count (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment and write metrics.csv / summary.json.
    Run(CommonArgs),
    /// Report per-client label histograms and entropies for the partition.
    PartitionStats(CommonArgs),
    /// Run several algorithms on identical partitions and seeds.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated algorithm names.
        #[arg(long, value_delimiter = ',', required = true)]
        algorithms: Vec<String>,
    },
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg =
        parse_config_path(&common.config).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(workers) = common.workers {
        cfg.workers = workers;
    }
    Ok(cfg)
}

fn ensure_out_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn io_runtime(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn run_one(
    cfg: &ExperimentConfig,
    sink: &mut MetricsSink,
) -> Result<(Vec<RoundRecord>, u64), CliError> {
    let mut experiment = Experiment::new(cfg.clone()).map_err(|e| {
        // Everything the engine can reject before round 0 is a config problem.
        CliError::Config(e.to_string())
    })?;
    let checksum = experiment.partition().checksum();
    let mut records = Vec::with_capacity(cfg.rounds);
    for _ in 0..cfg.rounds {
        let record = experiment
            .run_round()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        sink.write_round(&record)
            .map_err(|e| io_runtime(sink.path(), e))?;
        records.push(record);
    }
    Ok((records, checksum))
}

fn cmd_run(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    ensure_out_dir(&common.out)?;
    let csv_path = common.out.join("metrics.csv");
    let wide_path = common.out.join("scam_signals.csv");
    let wide = if cfg.algorithm == Algorithm::FedScam {
        Some((wide_path.as_path(), cfg.clients))
    } else {
        None
    };
    let mut sink = MetricsSink::create(&csv_path, wide).map_err(|e| io_runtime(&csv_path, e))?;

    let started = Instant::now();
    let (records, checksum) = run_one(&cfg, &mut sink)?;
    let output = summarize(records, checksum, started.elapsed().as_millis() as u64);

    let summary = RunSummary::new(&cfg, &output);
    let json_path = common.out.join("summary.json");
    crate::metrics::write_summary_json(&json_path, &summary)
        .map_err(|e| io_runtime(&json_path, e))?;

    println!(
        "algorithm={} rounds={} final_accuracy={:.4} best_accuracy={:.4} partition={} out={}",
        summary.algorithm,
        summary.rounds,
        summary.final_accuracy,
        summary.best_accuracy,
        summary.partition_checksum,
        common.out.display()
    );
    Ok(())
}

fn build_dataset(cfg: &ExperimentConfig) -> Result<Dataset, CliError> {
    match &cfg.dataset {
        crate::config::DatasetConfig::Synthetic {
            classes,
            dim,
            per_class,
            spread,
            ..
        } => Ok(generate_synthetic(
            *classes,
            *dim,
            *per_class,
            *spread,
            cfg.master_seed,
        )),
        crate::config::DatasetConfig::Idx {
            train_images,
            train_labels,
            ..
        } => load_idx(train_images, train_labels).map_err(|e| CliError::Config(e.to_string())),
    }
}

fn cmd_partition_stats(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    ensure_out_dir(&common.out)?;
    let ds = build_dataset(&cfg)?;
    let part = dirichlet_partition(
        &ds,
        &DirichletSpec {
            alpha: cfg.dirichlet_alpha,
            num_clients: cfg.clients,
            min_size: cfg.dirichlet_min_size,
            seed: derive_seed(cfg.master_seed, "partition", &[]),
        },
    )
    .map_err(|e| CliError::Config(e.to_string()))?;

    let mut csv = String::new();
    let mut header = String::from("client,size,entropy");
    for c in 0..ds.classes() {
        let _ = write!(header, ",count_{c}");
    }
    let _ = writeln!(csv, "{header}");

    let mut entropies = Vec::with_capacity(cfg.clients);
    for client in 0..cfg.clients {
        let hist = label_histogram(&ds, &part, client);
        let entropy = label_entropy(&hist);
        entropies.push(entropy);
        let counts: Vec<String> = hist.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(
            csv,
            "{client},{},{entropy:.6},{}",
            part.client_indices(client).len(),
            counts.join(",")
        );
        println!(
            "client {client}: size {:4}  entropy {entropy:.4}  hist {hist:?}",
            part.client_indices(client).len()
        );
    }
    let mean: f64 = entropies.iter().sum::<f64>() / entropies.len() as f64;
    println!(
        "alpha={} clients={} mean_entropy={mean:.6} partition={:016x}",
        cfg.dirichlet_alpha,
        cfg.clients,
        part.checksum()
    );

    let path = common.out.join("partition_stats.csv");
    std::fs::write(&path, csv).map_err(|e| io_runtime(&path, e))?;
    Ok(())
}

fn cmd_compare(common: &CommonArgs, algorithms: &[String]) -> Result<(), CliError> {
    if algorithms.is_empty() {
        return Err(CliError::Config("--algorithms must name at least one".into()));
    }
    let base = load_config(common)?;
    ensure_out_dir(&common.out)?;

    let mut merged = format!("algorithm,{ROUND_CSV_HEADER}\n");
    let mut checksums = Vec::new();
    let mut lines = Vec::new();
    for name in algorithms {
        let algorithm = Algorithm::parse(name)
            .ok_or_else(|| CliError::Config(format!("unknown algorithm `{name}`")))?;
        let mut cfg = base.clone();
        cfg.algorithm = algorithm;

        let csv_path = common.out.join(format!("metrics_{name}.csv"));
        let wide = if algorithm == Algorithm::FedScam {
            Some((common.out.join(format!("scam_signals_{name}.csv")), cfg.clients))
        } else {
            None
        };
        let mut sink = MetricsSink::create(
            &csv_path,
            wide.as_ref().map(|(p, c)| (p.as_path(), *c)),
        )
        .map_err(|e| io_runtime(&csv_path, e))?;

        let started = Instant::now();
        let (records, checksum) = run_one(&cfg, &mut sink)?;
        for rec in &records {
            let _ = writeln!(merged, "{name},{}", format_round_row(rec));
        }
        let output = summarize(records, checksum, started.elapsed().as_millis() as u64);
        let summary = RunSummary::new(&cfg, &output);
        let json_path = common.out.join(format!("summary_{name}.json"));
        crate::metrics::write_summary_json(&json_path, &summary)
            .map_err(|e| io_runtime(&json_path, e))?;

        lines.push(format!(
            "{name:<10} final_accuracy={:.4} best_accuracy={:.4} partition={}",
            summary.final_accuracy, summary.best_accuracy, summary.partition_checksum
        ));
        checksums.push(checksum);
    }

    if checksums.windows(2).any(|w| w[0] != w[1]) {
        return Err(CliError::Runtime(
            "partition checksums diverged across algorithms".into(),
        ));
    }

    let merged_path = common.out.join("compare.csv");
    std::fs::write(&merged_path, merged).map_err(|e| io_runtime(&merged_path, e))?;

    println!("seed={} partition={:016x}", base.master_seed, checksums[0]);
    for line in lines {
        println!("{line}");
    }
    println!("merged table: {}", merged_path.display());
    Ok(())
}

/// Parse `argv` (including the program name) and run. Returns the process
/// exit code instead of exiting, so tests can drive it directly.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .try_init();

    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version through the same path
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { 0 } else { 2 };
        }
    };

    let result = match &cli.command {
        Command::Run(common) => cmd_run(common),
        Command::PartitionStats(common) => cmd_partition_stats(common),
        Command::Compare { common, algorithms } => cmd_compare(common, algorithms),
    };

    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {}", e.message());
            e.exit_code()
        }
    }
}
