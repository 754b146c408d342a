//! Metrics persistence: per-round CSV rows (flushed as they are written), a
//! companion wide CSV of per-client signals for adaptive runs, and a JSON
//! run summary embedding the fully resolved config.

use crate::config::{to_config_string, ExperimentConfig};
use crate::engine::{ExperimentOutput, RoundRecord};
use crate::seed::SEED_LABELS;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const ROUND_CSV_HEADER: &str = "round,test_accuracy,test_loss,drift,mean_rho,wall_millis";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One CSV row per round: reals with 6 decimals, absent values empty.
pub fn format_round_row(rec: &RoundRecord) -> String {
    format!(
        "{},{},{},{:.6},{},{}",
        rec.round,
        fmt_opt(rec.test_accuracy),
        fmt_opt(rec.test_loss),
        rec.drift,
        fmt_opt(rec.mean_rho),
        rec.wall_millis
    )
}

pub fn wide_csv_header(clients: usize) -> String {
    let mut cols = vec!["round".to_string()];
    for prefix in ["h", "c", "rho", "w"] {
        for i in 0..clients {
            cols.push(format!("{prefix}_{i}"));
        }
    }
    cols.join(",")
}

/// Wide row of per-client signals; `None` when the record carries none.
pub fn format_wide_row(rec: &RoundRecord) -> Option<String> {
    let signals = rec.scam.as_ref()?;
    let mut cols = vec![rec.round.to_string()];
    for values in [&signals.h, &signals.c, &signals.rho, &rec.weights] {
        cols.extend(values.iter().map(|v| format!("{v:.6}")));
    }
    Some(cols.join(","))
}

/// Round-metrics writer: header written once at creation, one flushed row
/// per call.
pub struct MetricsSink {
    csv: BufWriter<File>,
    wide: Option<BufWriter<File>>,
    csv_path: PathBuf,
}

impl MetricsSink {
    pub fn create(csv_path: &Path, wide_path: Option<(&Path, usize)>) -> std::io::Result<Self> {
        let mut csv = BufWriter::new(File::create(csv_path)?);
        writeln!(csv, "{ROUND_CSV_HEADER}")?;
        csv.flush()?;
        let wide = match wide_path {
            Some((path, clients)) => {
                let mut w = BufWriter::new(File::create(path)?);
                writeln!(w, "{}", wide_csv_header(clients))?;
                w.flush()?;
                Some(w)
            }
            None => None,
        };
        Ok(Self {
            csv,
            wide,
            csv_path: csv_path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.csv_path
    }

    pub fn write_round(&mut self, rec: &RoundRecord) -> std::io::Result<()> {
        writeln!(self.csv, "{}", format_round_row(rec))?;
        self.csv.flush()?;
        if let (Some(w), Some(row)) = (self.wide.as_mut(), format_wide_row(rec)) {
            writeln!(w, "{row}")?;
            w.flush()?;
        }
        Ok(())
    }
}

/// JSON run summary: headline metrics plus the reproducibility metadata
/// block (resolved config, seed-derivation labels, partition checksum,
/// approximation flag).
#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub algorithm: String,
    /// True for methods realized as documented approximations.
    pub approx: bool,
    pub rounds: usize,
    pub final_accuracy: f64,
    pub best_accuracy: f64,
    pub partition_checksum: String,
    pub total_wall_millis: u64,
    pub seed_labels: Vec<String>,
    pub config: BTreeMap<String, String>,
}

impl RunSummary {
    pub fn new(cfg: &ExperimentConfig, output: &ExperimentOutput) -> Self {
        let config: BTreeMap<String, String> = to_config_string(cfg)
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self {
            algorithm: cfg.algorithm.name().to_string(),
            approx: cfg.algorithm.is_approx(),
            rounds: cfg.rounds,
            final_accuracy: output.final_accuracy,
            best_accuracy: output.best_accuracy,
            partition_checksum: format!("{:016x}", output.partition_checksum),
            total_wall_millis: output.total_wall_millis,
            seed_labels: SEED_LABELS.iter().map(|s| s.to_string()).collect(),
            config,
        }
    }
}

pub fn write_summary_json(path: &Path, summary: &RunSummary) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(path, json + "\n")
}
