//! Output records and their JSON / CSV encodings.

use anyhow::Result;
use pickands::estimators::EstimateResult;
use serde::Serialize;

use crate::config::Format;

/// One estimate, as emitted by `estimate` and `crosscheck`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub method: String,
    pub delta: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
    pub horizon: usize,
    pub seed: u64,
    pub config_hash: String,
    pub flags: Vec<String>,
}

impl Record {
    pub fn new(r: &EstimateResult, config_hash: &str) -> Self {
        Record {
            method: r.method.name().to_string(),
            delta: r.delta,
            estimate: r.estimate,
            stderr: r.stderr,
            reps: r.replications,
            horizon: r.truncation.horizon,
            seed: r.seed,
            config_hash: config_hash.to_string(),
            flags: r.flags.clone(),
        }
    }
}

/// CSV mirror of [`Record`] with flags joined by `;`.
#[derive(Serialize)]
struct RecordRow<'a> {
    method: &'a str,
    delta: f64,
    estimate: f64,
    stderr: f64,
    reps: usize,
    horizon: usize,
    seed: u64,
    config_hash: &'a str,
    flags: String,
}

impl<'a> From<&'a Record> for RecordRow<'a> {
    fn from(r: &'a Record) -> Self {
        RecordRow {
            method: &r.method,
            delta: r.delta,
            estimate: r.estimate,
            stderr: r.stderr,
            reps: r.reps,
            horizon: r.horizon,
            seed: r.seed,
            config_hash: &r.config_hash,
            flags: r.flags.join(";"),
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn csv_rows<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn records(records: &[Record], format: Format) -> Result<String> {
    match format {
        Format::Json if records.len() == 1 => json(&records[0]),
        Format::Json => json(&records),
        Format::Csv => csv_rows(records.iter().map(RecordRow::from)),
    }
}
