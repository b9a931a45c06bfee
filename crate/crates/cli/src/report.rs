//! Versioned experiment reports and their CSV and JSON encodings.
//!
//! CSV columns, in order: `schema_version, experiment, metric, value,
//! half_width, trials, seed`. An empty `half_width` marks a value without a
//! sampling interval. Query counts appear only in the JSON encoding.

use std::collections::BTreeMap;
use std::io::Write;

use ipdp_core::Rate;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::params::Format;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 7] = [
    "schema_version",
    "experiment",
    "metric",
    "value",
    "half_width",
    "trials",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metric {
    pub metric: String,
    pub value: f64,
    /// 95% normal half-width, when the value is a sampled rate.
    pub half_width: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: &'static str,
    /// Resolved parameters, defaults included.
    pub config: Value,
    pub metrics: Vec<Metric>,
    pub query_counts: BTreeMap<String, u64>,
}

impl Report {
    pub fn builder(experiment: &'static str, config: Value, seed: u64) -> ReportBuilder {
        ReportBuilder {
            report: Report {
                schema_version: SCHEMA_VERSION,
                experiment,
                config,
                metrics: Vec::new(),
                query_counts: BTreeMap::new(),
            },
            seed,
        }
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> CliResult<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, self)
                    .map_err(|e| CliError::Output(e.to_string()))?;
                writeln!(out).map_err(|e| CliError::Output(e.to_string()))
            }
            Format::Csv => self.write_csv(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> CliResult<()> {
        let err = |e: csv::Error| CliError::Output(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(err)?;
        for m in &self.metrics {
            w.write_record([
                self.schema_version.to_string(),
                self.experiment.to_string(),
                m.metric.clone(),
                m.value.to_string(),
                m.half_width.map(|h| h.to_string()).unwrap_or_default(),
                m.trials.to_string(),
                m.seed.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| CliError::Output(e.to_string()))
    }
}

/// Collects metrics that all share the report's seed.
pub struct ReportBuilder {
    report: Report,
    seed: u64,
}

impl ReportBuilder {
    pub fn value(&mut self, name: impl Into<String>, value: f64, trials: u64) -> &mut Self {
        self.push(name.into(), value, None, trials)
    }

    pub fn rate(&mut self, name: impl Into<String>, rate: Rate) -> &mut Self {
        self.push(name.into(), rate.rate, Some(rate.half_width), rate.trials)
    }

    pub fn interval(
        &mut self,
        name: impl Into<String>,
        value: f64,
        half_width: f64,
        trials: u64,
    ) -> &mut Self {
        self.push(name.into(), value, Some(half_width), trials)
    }

    pub fn queries(&mut self, name: impl Into<String>, count: u64) -> &mut Self {
        *self.report.query_counts.entry(name.into()).or_default() += count;
        self
    }

    fn push(
        &mut self,
        metric: String,
        value: f64,
        half_width: Option<f64>,
        trials: u64,
    ) -> &mut Self {
        self.report.metrics.push(Metric {
            metric,
            value,
            half_width,
            trials,
            seed: self.seed,
        });
        self
    }

    pub fn finish(self) -> Report {
        self.report
    }
}
