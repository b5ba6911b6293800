//! CSV outputs: one row per run, and one row per (grid point, configuration)
//! with cross-run means and 95% half-widths.

use std::io;

use thiserror::Error;

use crate::kpi::MetricSummary;
use crate::scenario::{AggRow, RunRow, ScenarioKind};

pub const RUN_COLUMNS: [&str; 12] = [
    "scenario", "config", "run_seed", "eta_or_R", "n_stas", "rho", "admitted", "avg_delay_ns", "jitter_ns",
    "thr_bps", "norm_thr", "lost_pkts",
];

/// Metric columns of the aggregate CSV; each gets `_mean` and `_ci95`.
pub const AGG_METRICS: [&str; 6] = ["avg_delay_ns", "jitter_ns", "thr_bps", "norm_thr", "admitted", "lost_pkts"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_runs_csv<W: io::Write>(scenario: ScenarioKind, rows: &[RunRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_COLUMNS)?;
    for r in rows {
        let k = &r.kpi;
        w.write_record([
            scenario.name().to_string(),
            r.config.name().to_string(),
            r.run_seed.to_string(),
            r.point.load_value().to_string(),
            r.point.n_stas.to_string(),
            r.point.rho.to_string(),
            k.admitted_stas.to_string(),
            opt(k.avg_delay_s.map(|d| d * 1e9)),
            opt(k.jitter_s.map(|d| d * 1e9)),
            k.aggr_throughput_bps.to_string(),
            opt(k.norm_throughput),
            k.lost_packets.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn summary_cells(m: &MetricSummary, scale: f64) -> [String; 2] {
    [opt(m.mean.map(|x| x * scale)), opt(m.ci95.map(|x| x * scale))]
}

pub fn write_aggregate_csv<W: io::Write>(scenario: ScenarioKind, rows: &[AggRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["scenario", "config", "eta_or_R", "n_stas", "rho", "n_runs"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for m in AGG_METRICS {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_ci95"));
    }
    w.write_record(&header)?;
    for r in rows {
        let k = &r.kpi;
        let mut rec = vec![
            scenario.name().to_string(),
            r.config.name().to_string(),
            r.point.load_value().to_string(),
            r.point.n_stas.to_string(),
            r.point.rho.to_string(),
            k.n_runs.to_string(),
        ];
        for (m, scale) in [
            (&k.avg_delay_s, 1e9),
            (&k.jitter_s, 1e9),
            (&k.throughput_bps, 1.0),
            (&k.norm_throughput, 1.0),
            (&k.admitted_stas, 1.0),
            (&k.lost_packets, 1.0),
        ] {
            rec.extend(summary_cells(m, scale));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}: bad value in column {column:?}")]
    BadValue { row: usize, column: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One row of an aggregate CSV as read back for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct AggRecord {
    pub scenario: String,
    pub config: String,
    pub eta_or_r: f64,
    pub n_stas: u32,
    pub rho: f64,
    /// `(metric, mean, ci95)` in [`AGG_METRICS`] order.
    pub metrics: Vec<(String, Option<f64>, Option<f64>)>,
}

impl AggRecord {
    pub fn metric(&self, name: &str) -> Option<(Option<f64>, Option<f64>)> {
        self.metrics.iter().find(|m| m.0 == name).map(|m| (m.1, m.2))
    }
}

pub fn read_aggregate_csv<R: io::Read>(input: R) -> Result<Vec<AggRecord>, ReadError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| ReadError::MissingColumn(name.to_string()))
    };
    let (sc, cf, lv, ns, rh) = (col("scenario")?, col("config")?, col("eta_or_R")?, col("n_stas")?, col("rho")?);
    let metric_cols: Vec<(String, usize, usize)> = AGG_METRICS
        .iter()
        .map(|m| Ok((m.to_string(), col(&format!("{m}_mean"))?, col(&format!("{m}_ci95"))?)))
        .collect::<Result<_, ReadError>>()?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let num = |c: usize| -> Result<Option<f64>, ReadError> {
            let cell = rec.get(c).unwrap_or("");
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse()
                .map(Some)
                .map_err(|_| ReadError::BadValue { row, column: header[c].to_string() })
        };
        let req = |c: usize| num(c)?.ok_or_else(|| ReadError::BadValue { row, column: header[c].to_string() });
        out.push(AggRecord {
            scenario: rec[sc].to_string(),
            config: rec[cf].to_string(),
            eta_or_r: req(lv)?,
            n_stas: req(ns)? as u32,
            rho: req(rh)?,
            metrics: metric_cols
                .iter()
                .map(|(m, a, b)| Ok((m.clone(), num(*a)?, num(*b)?)))
                .collect::<Result<_, ReadError>>()?,
        });
    }
    Ok(out)
}
