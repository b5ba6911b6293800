//! Per-packet bookkeeping and the KPI suite: average delay, RFC 3393 jitter,
//! aggregated and normalized throughput, and cross-run 95% confidence
//! intervals.

use std::collections::BTreeMap;

use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossCause {
    /// Tail drop at a full MAC queue.
    Queue,
    /// Discarded after the retry limit.
    Retry,
}

/// Lifecycle of one application packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketRecord {
    pub flow: u32,
    pub seq: u64,
    pub size: u32,
    pub generated_at: SimTime,
    pub delivered_at: Option<SimTime>,
    pub loss: Option<LossCause>,
}

impl PacketRecord {
    pub fn new(flow: u32, seq: u64, size: u32, generated_at: SimTime) -> Self {
        PacketRecord { flow, seq, size, generated_at, delivered_at: None, loss: None }
    }

    pub fn delay(&self) -> Option<SimTime> {
        self.delivered_at.map(|d| d - self.generated_at)
    }

    /// Neither delivered nor lost: still queued or in flight.
    pub fn is_pending(&self) -> bool {
        self.delivered_at.is_none() && self.loss.is_none()
    }
}

/// Mean delay of delivered packets, all flows pooled, in seconds.
pub fn avg_delay(records: &[PacketRecord]) -> Option<f64> {
    let (sum, n) = records
        .iter()
        .filter_map(PacketRecord::delay)
        .fold((0u128, 0u64), |(s, n), d| (s + u128::from(d.as_ns()), n + 1));
    (n > 0).then(|| sum as f64 / n as f64 / 1e9)
}

/// Sum of |d(k+1) - d(k)| in ns over consecutive delivered packets of each
/// flow, and the number of such pairs.
fn jitter_sums(records: &[PacketRecord]) -> BTreeMap<u32, (u128, u64)> {
    let mut flows: BTreeMap<u32, Vec<(u64, u64)>> = BTreeMap::new();
    for r in records {
        if let Some(d) = r.delay() {
            flows.entry(r.flow).or_default().push((r.seq, d.as_ns()));
        }
    }
    flows
        .into_iter()
        .map(|(flow, mut seq)| {
            seq.sort_unstable();
            let sum = seq.windows(2).map(|w| u128::from(w[1].1.abs_diff(w[0].1))).sum();
            (flow, (sum, seq.len().saturating_sub(1) as u64))
        })
        .collect()
}

/// RFC 3393 delay variation: per-flow absolute differences of consecutive
/// delays, pooled over all pairs, in seconds.
pub fn jitter(records: &[PacketRecord]) -> Option<f64> {
    let (sum, n) = jitter_sums(records).values().fold((0u128, 0u64), |(s, n), &(fs, fn_)| (s + fs, n + fn_));
    (n > 0).then(|| sum as f64 / n as f64 / 1e9)
}

pub fn delivered_bytes(records: &[PacketRecord]) -> u64 {
    records.iter().filter(|r| r.delivered_at.is_some()).map(|r| u64::from(r.size)).sum()
}

pub fn lost_bytes(records: &[PacketRecord]) -> u64 {
    records.iter().filter(|r| r.loss.is_some()).map(|r| u64::from(r.size)).sum()
}

/// Delivered application bits per second over `horizon`.
pub fn throughput(records: &[PacketRecord], horizon: SimTime) -> f64 {
    assert!(horizon > SimTime::ZERO, "horizon must be positive");
    delivered_bytes(records) as f64 * 8.0 / horizon.as_secs_f64()
}

/// Delivered bytes over offered bytes, where offered excludes packets still
/// queued or in flight at the horizon.
pub fn normalized_throughput(records: &[PacketRecord]) -> Option<f64> {
    let delivered = delivered_bytes(records);
    let offered = delivered + lost_bytes(records);
    (offered > 0).then(|| delivered as f64 / offered as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowKpi {
    pub flow: u32,
    pub generated: u64,
    pub delivered: u64,
    pub lost_queue: u64,
    pub lost_retry: u64,
    pub avg_delay_s: Option<f64>,
    pub jitter_s: Option<f64>,
    pub throughput_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunKpi {
    pub avg_delay_s: Option<f64>,
    pub jitter_s: Option<f64>,
    pub aggr_throughput_bps: f64,
    pub norm_throughput: Option<f64>,
    pub admitted_stas: u32,
    pub lost_packets: u64,
    pub flows: Vec<FlowKpi>,
}

impl RunKpi {
    pub fn from_records(records: &[PacketRecord], horizon: SimTime, admitted_stas: u32) -> Self {
        let mut by_flow: BTreeMap<u32, Vec<PacketRecord>> = BTreeMap::new();
        for r in records {
            by_flow.entry(r.flow).or_default().push(*r);
        }
        let flows = by_flow
            .into_iter()
            .map(|(flow, rs)| FlowKpi {
                flow,
                generated: rs.len() as u64,
                delivered: rs.iter().filter(|r| r.delivered_at.is_some()).count() as u64,
                lost_queue: rs.iter().filter(|r| r.loss == Some(LossCause::Queue)).count() as u64,
                lost_retry: rs.iter().filter(|r| r.loss == Some(LossCause::Retry)).count() as u64,
                avg_delay_s: avg_delay(&rs),
                jitter_s: jitter(&rs),
                throughput_bps: throughput(&rs, horizon),
            })
            .collect();
        RunKpi {
            avg_delay_s: avg_delay(records),
            jitter_s: jitter(records),
            aggr_throughput_bps: throughput(records, horizon),
            norm_throughput: normalized_throughput(records),
            admitted_stas,
            lost_packets: records.iter().filter(|r| r.loss.is_some()).count() as u64,
            flows,
        }
    }
}

/// Cross-run mean and 95% confidence half-width of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricSummary {
    pub mean: Option<f64>,
    /// 1.96 * sample sd / sqrt(n); absent for fewer than two values.
    pub ci95: Option<f64>,
    pub n: usize,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MetricSummary::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ci95 = (n >= 2).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            1.96 * var.sqrt() / (n as f64).sqrt()
        });
        MetricSummary { mean: Some(mean), ci95, n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateKpi {
    pub n_runs: usize,
    pub avg_delay_s: MetricSummary,
    pub jitter_s: MetricSummary,
    pub throughput_bps: MetricSummary,
    pub norm_throughput: MetricSummary,
    pub admitted_stas: MetricSummary,
    pub lost_packets: MetricSummary,
}

/// Folds per-run KPIs; runs missing a metric are left out of that metric.
pub fn aggregate(runs: &[RunKpi]) -> AggregateKpi {
    let pick = |f: &dyn Fn(&RunKpi) -> Option<f64>| MetricSummary::of(&runs.iter().filter_map(f).collect::<Vec<_>>());
    AggregateKpi {
        n_runs: runs.len(),
        avg_delay_s: pick(&|r| r.avg_delay_s),
        jitter_s: pick(&|r| r.jitter_s),
        throughput_bps: pick(&|r| Some(r.aggr_throughput_bps)),
        norm_throughput: pick(&|r| r.norm_throughput),
        admitted_stas: pick(&|r| Some(f64::from(r.admitted_stas))),
        lost_packets: pick(&|r| Some(r.lost_packets as f64)),
    }
}
