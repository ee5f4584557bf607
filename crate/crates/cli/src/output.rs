//! CSV and JSON rendering. Everything rendered here is a pure function of the
//! run results, so identical runs produce identical bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::RunConfig;

/// Column order of every estimate table.
pub const CSV_COLUMNS: [&str; 9] = [
    "protocol",
    "d",
    "rounds",
    "shots_or_copies",
    "seed",
    "mean",
    "std_error",
    "per_round_variance",
    "queries_per_device",
];

/// One estimate, as emitted in CSV rows and JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub protocol: String,
    pub d: usize,
    pub rounds: u64,
    pub shots_or_copies: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub per_round_variance: f64,
    pub queries_per_device: u64,
    /// `mean` clamped to [0, 1]; biased, for display only.
    pub clipped_mean: f64,
    /// Ground truth from the simulator's unitaries (not visible to the
    /// protocol).
    pub exact_similarity: f64,
}

impl EstimateRow {
    fn csv_fields(&self) -> [String; 9] {
        [
            self.protocol.clone(),
            self.d.to_string(),
            self.rounds.to_string(),
            self.shots_or_copies.to_string(),
            self.seed.to_string(),
            self.mean.to_string(),
            self.std_error.to_string(),
            self.per_round_variance.to_string(),
            self.queries_per_device.to_string(),
        ]
    }
}

/// `# config: {...}` header line carrying the effective configuration.
pub fn csv_config_line(config: &RunConfig) -> String {
    format!("# config: {}\n", serde_json::to_string(&config.echo()).expect("json"))
}

pub fn estimate_table(config: &RunConfig, rows: &[EstimateRow]) -> String {
    let mut out = csv_config_line(config);
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_fields().join(","));
        out.push('\n');
    }
    out
}

/// Generic CSV table with a config header line.
pub fn table(config: &RunConfig, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = csv_config_line(config);
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json");
    text.push('\n');
    text
}

/// Quotes a CSV field when needed.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
