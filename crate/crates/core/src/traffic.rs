//! Periodic burst sources: burst sizing, (perturbed) periods and start times.

use crate::kpi::{LossCause, PacketRecord};
use crate::mac::{EnqueueOutcome, McsEntry, QueuedPacket, TxQueue};
use crate::rng::RngStream;
use crate::time::SimTime;

/// Default application packet size in bytes.
pub const PACKET_SIZE: u32 = 1448;

/// Shortest period a perturbed draw may produce.
pub const MIN_PERIOD: SimTime = SimTime::from_us(1);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficProfile {
    pub mean_period: SimTime,
    /// Period standard deviation as a fraction of the mean.
    pub deviation_ratio: f64,
    pub packet_size: u32,
    pub burst_packets: u64,
    pub smart_start: bool,
}

impl TrafficProfile {
    /// Offered application rate in b/s.
    pub fn offered_bps(&self) -> f64 {
        (self.burst_packets * u64::from(self.packet_size) * 8) as f64 / self.mean_period.as_secs_f64()
    }
}

/// Packets per burst so that `n_stas` sources together offer `eta` times the
/// PHY rate.
pub fn burst_packets_for(eta: f64, n_stas: u32, mcs: &McsEntry, period: SimTime, packet_size: u32) -> u64 {
    assert!(eta > 0.0 && eta <= 1.0, "eta must lie in (0,1]");
    assert!(n_stas >= 1, "at least one station");
    let per_sta = eta * mcs.phy_rate_bps as f64 / f64::from(n_stas);
    let packets = per_sta * period.as_secs_f64() / (8.0 * f64::from(packet_size));
    // absorb float noise on exact multiples
    ((packets - 1e-9).ceil() as u64).max(1)
}

/// Packets per burst for a per-station rate of `rate_bps`.
pub fn burst_packets_for_rate(rate_bps: u64, period: SimTime, packet_size: u32) -> u64 {
    let bits = u128::from(rate_bps) * u128::from(period.as_ns());
    let per_packet = 8 * u128::from(packet_size) * 1_000_000_000;
    u64::try_from(bits.div_ceil(per_packet)).expect("burst size overflow").max(1)
}

/// Next inter-burst period, N(T, (rho T)^2) clamped below at [`MIN_PERIOD`].
/// One variate is consumed even when rho is zero.
pub fn next_period(profile: &TrafficProfile, stream: &mut RngStream) -> SimTime {
    let t = profile.mean_period.as_ns() as f64;
    let draw = stream.gaussian(t, profile.deviation_ratio * t);
    if profile.deviation_ratio == 0.0 {
        return profile.mean_period;
    }
    clamp_period(draw)
}

fn clamp_period(ns: f64) -> SimTime {
    SimTime::from_ns(ns.round().max(MIN_PERIOD.as_ns() as f64) as u64)
}

/// Time of the first burst: the first SP block start for smart sources that
/// hold an allocation, otherwise uniform over one mean period. The uniform
/// draw is always consumed.
pub fn app_start_time(profile: &TrafficProfile, first_sp_block_start: Option<SimTime>, stream: &mut RngStream) -> SimTime {
    let uniform = stream.uniform_time(SimTime::ZERO, profile.mean_period);
    match (profile.smart_start, first_sp_block_start) {
        (true, Some(s)) => s,
        _ => uniform,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowState {
    pub sta: u32,
    pub t0: SimTime,
    pub next_burst_at: SimTime,
    pub bursts_emitted: u64,
    pub next_seq: u64,
}

impl FlowState {
    pub fn new(sta: u32, t0: SimTime) -> Self {
        FlowState { sta, t0, next_burst_at: t0, bursts_emitted: 0, next_seq: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BurstReport {
    pub accepted: u64,
    pub dropped: u64,
}

/// Generates one burst at `clock`: every packet gets a record, and is queued
/// or tail-dropped. Advances the flow to its next burst.
pub fn emit_burst(
    flow: &mut FlowState,
    profile: &TrafficProfile,
    clock: SimTime,
    period_stream: &mut RngStream,
    queue: &mut TxQueue,
    records: &mut Vec<PacketRecord>,
) -> BurstReport {
    assert_eq!(clock, flow.next_burst_at, "burst emitted off schedule");
    let mut report = BurstReport::default();
    for _ in 0..profile.burst_packets {
        let idx = u32::try_from(records.len()).expect("too many packets");
        let mut rec = PacketRecord::new(flow.sta, flow.next_seq, profile.packet_size, clock);
        flow.next_seq += 1;
        match queue.enqueue(QueuedPacket { record: idx, bytes: profile.packet_size }) {
            EnqueueOutcome::Accepted => report.accepted += 1,
            EnqueueOutcome::Dropped => {
                rec.loss = Some(LossCause::Queue);
                report.dropped += 1;
            }
        }
        records.push(rec);
    }
    flow.bursts_emitted += 1;
    flow.next_burst_at = clock + next_period(profile, period_stream);
    report
}
