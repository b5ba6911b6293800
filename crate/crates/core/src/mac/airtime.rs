//! PPDU airtime, A-MSDU/A-MPDU packing and exclusive SP service.

use crate::mac::{MacTimingParams, McsEntry, QueuedPacket, TxQueue};
use crate::time::SimTime;

/// Preamble/header plus the payload at the PHY rate, rounded up to the next ns.
pub fn frame_tx_duration(payload_bytes: u64, mcs: &McsEntry, timing: &MacTimingParams) -> SimTime {
    let bits_ns = u128::from(payload_bytes) * 8 * 1_000_000_000;
    let rate = u128::from(mcs.phy_rate_bps);
    let ns = bits_ns.div_ceil(rate);
    timing.preamble_header + SimTime::from_ns(u64::try_from(ns).expect("frame duration overflow"))
}

/// One MPDU (an A-MSDU) inside a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MpduSlot {
    pub packets: u32,
    /// Time from PPDU start until the last bit of this MPDU is on air.
    pub end_offset: SimTime,
}

/// A single A-MPDU: which head-of-queue packets it carries and how long it
/// occupies the medium.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BatchPlan {
    pub packets: usize,
    /// Application bytes carried.
    pub payload_bytes: u64,
    /// A-MPDU length including MSDU and MPDU overheads.
    pub ampdu_bytes: u64,
    pub mpdus: Vec<MpduSlot>,
    /// PPDU airtime.
    pub ppdu: SimTime,
    /// PPDU + SIFS + BlockAck.
    pub airtime: SimTime,
}

impl BatchPlan {
    pub fn is_empty(&self) -> bool {
        self.packets == 0
    }

    /// Delivery offset of each packet from the PPDU start, in batch order.
    pub fn delivery_offsets(&self) -> impl Iterator<Item = SimTime> + '_ {
        self.mpdus
            .iter()
            .flat_map(|m| std::iter::repeat_n(m.end_offset, m.packets as usize))
    }
}

/// Greedy packing of packets (given by size, in FIFO order) into one A-MPDU.
///
/// Packets fill the current A-MSDU up to `max_amsdu`; a full A-MSDU closes and
/// a new MPDU starts. Packing stops at the first packet that would push the
/// A-MPDU over `max_ampdu` or the batch airtime over `budget`.
pub fn plan_batch(
    sizes: impl Iterator<Item = u32>,
    timing: &MacTimingParams,
    mcs: &McsEntry,
    budget: Option<SimTime>,
) -> BatchPlan {
    let tail = timing.sifs + timing.block_ack_duration;
    // (packets, A-MSDU bytes) per MPDU
    let mut mpdus: Vec<(u32, u64)> = Vec::new();
    let mut total: u64 = 0;
    let mut payload: u64 = 0;
    for size in sizes {
        let msdu = u64::from(size) + u64::from(timing.per_msdu_overhead);
        let joins_last = mpdus
            .last()
            .is_some_and(|&(_, amsdu)| amsdu + msdu <= u64::from(timing.max_amsdu));
        let candidate = if joins_last { total + msdu } else { total + msdu + u64::from(timing.per_mpdu_overhead) };
        if candidate > u64::from(timing.max_ampdu) {
            break;
        }
        if let Some(b) = budget {
            if frame_tx_duration(candidate, mcs, timing) + tail > b {
                break;
            }
        }
        if joins_last {
            let last = mpdus.last_mut().expect("checked");
            last.0 += 1;
            last.1 += msdu;
        } else {
            mpdus.push((1, msdu));
        }
        total = candidate;
        payload += u64::from(size);
    }
    if mpdus.is_empty() {
        return BatchPlan::default();
    }

    let mut cumulative = 0;
    let slots = mpdus
        .iter()
        .map(|&(packets, amsdu)| {
            cumulative += amsdu + u64::from(timing.per_mpdu_overhead);
            MpduSlot { packets, end_offset: frame_tx_duration(cumulative, mcs, timing) }
        })
        .collect();
    let ppdu = frame_tx_duration(total, mcs, timing);
    BatchPlan {
        packets: mpdus.iter().map(|m| m.0 as usize).sum(),
        payload_bytes: payload,
        ampdu_bytes: total,
        mpdus: slots,
        ppdu,
        airtime: ppdu + tail,
    }
}

/// Plans the next batch from the waiting packets of `queue` within
/// `time_budget`. The queue itself is not modified.
pub fn assemble_ampdu(
    queue: &TxQueue,
    timing: &MacTimingParams,
    time_budget: SimTime,
    mcs: &McsEntry,
) -> BatchPlan {
    plan_batch(queue.waiting().map(|p| p.bytes), timing, mcs, Some(time_budget))
}

/// Exact airtime needed to drain `burst_packets` fresh packets of
/// `packet_size` bytes with back-to-back batches.
pub fn sp_duration_for(
    burst_packets: u64,
    packet_size: u32,
    mcs: &McsEntry,
    timing: &MacTimingParams,
) -> SimTime {
    let mut left = burst_packets;
    let mut total = SimTime::ZERO;
    while left > 0 {
        let plan = plan_batch(std::iter::repeat_n(packet_size, left as usize), timing, mcs, None);
        assert!(!plan.is_empty(), "packet does not fit in an A-MPDU");
        total += plan.airtime;
        left -= plan.packets as u64;
    }
    total
}

/// A completed batch transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transmission {
    pub start: SimTime,
    pub plan: BatchPlan,
    pub packets: Vec<QueuedPacket>,
}

impl Transmission {
    pub fn end(&self) -> SimTime {
        self.start + self.plan.airtime
    }

    /// `(packet, delivery time)` for every packet in the batch.
    pub fn deliveries(&self) -> impl Iterator<Item = (QueuedPacket, SimTime)> + '_ {
        self.packets
            .iter()
            .copied()
            .zip(self.plan.delivery_offsets().map(|o| self.start + o))
    }
}

/// Exclusive service of one SP block `[start, end)` from a queue that receives
/// no arrivals meanwhile. Batches go back to back; a batch that would run past
/// `end` is shrunk, and if not even one packet fits the rest waits.
pub fn sp_service(
    queue: &mut TxQueue,
    start: SimTime,
    end: SimTime,
    timing: &MacTimingParams,
    mcs: &McsEntry,
) -> Vec<Transmission> {
    let mut out = Vec::new();
    let mut now = start;
    while now < end && queue.has_waiting() {
        let plan = assemble_ampdu(queue, timing, end - now, mcs);
        if plan.is_empty() {
            break;
        }
        queue.begin_tx(plan.packets);
        let packets = queue.complete_tx();
        let airtime = plan.airtime;
        out.push(Transmission { start: now, plan, packets });
        now += airtime;
    }
    out
}
