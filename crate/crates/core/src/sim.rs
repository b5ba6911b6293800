//! One simulation run: PCP/AP admission, periodic sources, SP service and
//! CBAP contention driven by the event queue.

use std::fmt;
use std::io;

use thiserror::Error;

use crate::kernel::{EntityId, EventHandle, EventQueue, RunStats};
use crate::kpi::{LossCause, PacketRecord, RunKpi};
use crate::mac::{
    assemble_ampdu, frame_tx_duration, sp_duration_for, BatchPlan, CollisionOutcome, Contention, MacError,
    MacTimingParams, McsEntry, QueuedPacket, TxQueue,
};
use crate::rng::RngStream;
use crate::schedule::{
    AddtsRequest, AddtsResponse, BeaconIntervalLayout, DtiSchedule, PcpScheduler, SchedulerPolicy, SegmentKind,
    StaId,
};
use crate::time::SimTime;
use crate::traffic::{
    app_start_time, burst_packets_for, burst_packets_for_rate, emit_burst, FlowState, TrafficProfile, PACKET_SIZE,
};

/// How the DTI is shared: the four named configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchedulingConfig {
    pub policy: SchedulerPolicy,
    pub smart_start: bool,
    /// Stations holding an SP may also contend in CBAP.
    pub cbap_fallback: bool,
}

impl SchedulingConfig {
    pub const CBAP_ONLY: SchedulingConfig =
        SchedulingConfig { policy: SchedulerPolicy::CbapOnly, smart_start: false, cbap_fallback: true };
    pub const SP1: SchedulingConfig =
        SchedulingConfig { policy: SchedulerPolicy::Periodic, smart_start: true, cbap_fallback: true };
    pub const SP2: SchedulingConfig =
        SchedulingConfig { policy: SchedulerPolicy::Periodic, smart_start: false, cbap_fallback: false };
    pub const SP3: SchedulingConfig =
        SchedulingConfig { policy: SchedulerPolicy::Periodic, smart_start: false, cbap_fallback: true };

    /// The presets in plotting order.
    pub const ALL: [SchedulingConfig; 4] = [Self::CBAP_ONLY, Self::SP1, Self::SP2, Self::SP3];

    pub fn name(&self) -> &'static str {
        match *self {
            Self::CBAP_ONLY => "cbap-only",
            Self::SP1 => "sp1",
            Self::SP2 => "sp2",
            Self::SP3 => "sp3",
            _ => "custom",
        }
    }

    pub fn by_name(name: &str) -> Option<SchedulingConfig> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for SchedulingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Offered load: normalized aggregate (eta) or a per-station rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Load {
    Eta(f64),
    RateBps(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// The BI duration doubles as the application period.
    pub layout: BeaconIntervalLayout,
    pub timing: MacTimingParams,
    pub mcs: McsEntry,
    pub n_stas: u32,
    pub load: Load,
    pub rho: f64,
    pub packet_size: u32,
    pub horizon: SimTime,
    pub scheduling: SchedulingConfig,
    /// Guard between adjacent SP blocks.
    pub guard: SimTime,
    /// Queue capacity in bursts.
    pub queue_bursts: u32,
    /// `None`: all ADDTS exchanges finish before t=0. `Some(s)`: station i
    /// sends its request at i*s as a management frame contending in CBAP.
    pub addts_spacing: Option<SimTime>,
    pub tx_log: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            layout: BeaconIntervalLayout::default(),
            timing: MacTimingParams::default(),
            mcs: McsEntry::MCS4,
            n_stas: 4,
            load: Load::Eta(0.5),
            rho: 0.0,
            packet_size: PACKET_SIZE,
            horizon: SimTime::from_secs(10),
            scheduling: SchedulingConfig::SP1,
            guard: SimTime::ZERO,
            queue_bursts: 4,
            addts_spacing: None,
            tx_log: false,
        }
    }
}

impl SimConfig {
    pub fn period(&self) -> SimTime {
        self.layout.bi_duration()
    }

    pub fn burst_packets(&self) -> u64 {
        match self.load {
            Load::Eta(eta) => burst_packets_for(eta, self.n_stas, &self.mcs, self.period(), self.packet_size),
            Load::RateBps(r) => burst_packets_for_rate(r, self.period(), self.packet_size),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if let Load::Eta(eta) = self.load {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(SimError::Config("η must lie in (0,1]".into()));
            }
        }
        if let Load::RateBps(0) = self.load {
            return Err(SimError::Config("rate must be positive".into()));
        }
        if self.n_stas == 0 {
            return Err(SimError::Config("n_stas must be at least 1".into()));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(SimError::Config("rho must be non-negative".into()));
        }
        if self.packet_size == 0 {
            return Err(SimError::Config("packet_size must be positive".into()));
        }
        if self.horizon == SimTime::ZERO {
            return Err(SimError::Config("horizon must be positive".into()));
        }
        if self.queue_bursts == 0 {
            return Err(SimError::Config("queue_bursts must be positive".into()));
        }
        if self.addts_spacing == Some(SimTime::ZERO) {
            return Err(SimError::Config("addts spacing must be positive".into()));
        }
        self.timing.validate(self.packet_size)?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mac(#[from] MacError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxLogKind {
    Sp,
    Cbap,
    Collision,
    Drop,
}

impl TxLogKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TxLogKind::Sp => "sp",
            TxLogKind::Cbap => "cbap",
            TxLogKind::Collision => "collision",
            TxLogKind::Drop => "drop",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TxLogEntry {
    pub time: SimTime,
    pub sta: u32,
    pub kind: TxLogKind,
    pub bytes: u64,
    pub airtime: SimTime,
}

/// Writes the debug log as CSV `time_ns,sta,kind,bytes,airtime_ns`.
pub fn write_tx_log<W: io::Write>(entries: &[TxLogEntry], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_ns", "sta", "kind", "bytes", "airtime_ns"])?;
    for e in entries {
        w.write_record([
            e.time.as_ns().to_string(),
            e.sta.to_string(),
            e.kind.as_str().to_string(),
            e.bytes.to_string(),
            e.airtime.as_ns().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-flow packet accounting at the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FlowConservation {
    pub sta: u32,
    pub generated: u64,
    pub delivered: u64,
    pub queued: u64,
    pub in_flight: u64,
    pub dropped_queue: u64,
    pub dropped_retry: u64,
}

impl FlowConservation {
    pub fn holds(&self) -> bool {
        self.generated == self.delivered + self.queued + self.in_flight + self.dropped_queue + self.dropped_retry
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub run_seed: u64,
    pub records: Vec<PacketRecord>,
    pub kpi: RunKpi,
    pub conservation: Vec<FlowConservation>,
    pub stats: RunStats,
    /// Stations granted an SP allocation.
    pub admitted: u32,
    /// First burst time of every traffic-generating station.
    pub t0s: Vec<Option<SimTime>>,
    pub schedule: DtiSchedule,
    pub burst_packets: u64,
    pub sp_duration: SimTime,
    pub tx_log: Vec<TxLogEntry>,
}

#[derive(Debug, Clone, Copy)]
enum Ev {
    BiStart(u64),
    SegStart(usize),
    SegEnd(usize),
    Burst(usize),
    SpTxEnd(usize),
    CbapWake,
    CbapTxEnd,
    AddtsStart(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    /// Not yet admitted (request pending) or rejected: generates nothing.
    Silent,
    SpOwner,
    CbapOnly,
}

#[derive(Debug, Clone)]
enum Frame {
    Data(BatchPlan),
    Addts,
}

impl Frame {
    fn airtime(&self, mgmt_airtime: SimTime) -> SimTime {
        match self {
            Frame::Data(p) => p.airtime,
            Frame::Addts => mgmt_airtime,
        }
    }
}

struct Station {
    role: Role,
    queue: TxQueue,
    flow: Option<FlowState>,
    sp_until: Option<SimTime>,
    in_flight: bool,
    /// Start and plan of an SP batch on air.
    sp_tx: Option<(SimTime, BatchPlan)>,
    addts_pending: bool,
    app_start: RngStream,
    period: RngStream,
    backoff: RngStream,
}

struct CbapAttempt {
    start: SimTime,
    senders: Vec<(usize, Frame)>,
}

struct World {
    cfg: SimConfig,
    profile: TrafficProfile,
    sp_duration: SimTime,
    pcp: PcpScheduler,
    stations: Vec<Station>,
    contention: Contention,
    records: Vec<PacketRecord>,
    /// Absolute segments of the current BI.
    segments: Vec<(SimTime, SimTime, SegmentKind)>,
    wake: Option<(EventHandle, SimTime)>,
    attempt: Option<CbapAttempt>,
    mgmt_airtime: SimTime,
    t0s: Vec<Option<SimTime>>,
    tx_log: Vec<TxLogEntry>,
}

fn schedule(q: &mut EventQueue<Ev>, at: SimTime, target: usize, ev: Ev) -> EventHandle {
    q.schedule(at, EntityId(target as u32), ev).expect("event scheduled in the past")
}

const PCP: usize = u32::MAX as usize;

impl World {
    fn log(&mut self, time: SimTime, sta: usize, kind: TxLogKind, bytes: u64, airtime: SimTime) {
        if self.cfg.tx_log {
            self.tx_log.push(TxLogEntry { time, sta: sta as u32, kind, bytes, airtime });
        }
    }

    fn uses_cbap(&self, i: usize) -> bool {
        let s = &self.stations[i];
        match s.role {
            Role::CbapOnly => true,
            Role::SpOwner => self.cfg.scheduling.cbap_fallback,
            Role::Silent => s.addts_pending,
        }
    }

    fn wants_cbap(&self, i: usize) -> bool {
        let s = &self.stations[i];
        self.uses_cbap(i) && !s.in_flight && s.sp_until.is_none() && (s.addts_pending || s.queue.has_waiting())
    }

    fn handle(&mut self, q: &mut EventQueue<Ev>, ev: Ev) {
        let now = q.now();
        match ev {
            Ev::BiStart(k) => self.bi_start(q, k),
            Ev::SegStart(j) => {
                let (start, end, kind) = self.segments[j];
                match kind {
                    SegmentKind::Cbap => {
                        self.contention.open_window(start, end);
                        for i in 0..self.stations.len() {
                            if self.wants_cbap(i) {
                                self.join(i, now);
                            }
                        }
                        self.reschedule_wake(q);
                    }
                    SegmentKind::Sp { owner, .. } => {
                        let i = owner.0 as usize;
                        self.stations[i].sp_until = Some(end);
                        self.try_sp_tx(q, i);
                    }
                }
            }
            Ev::SegEnd(j) => match self.segments[j].2 {
                SegmentKind::Cbap => {
                    self.contention.close_window(now);
                    if let Some((h, _)) = self.wake.take() {
                        q.cancel(h);
                    }
                }
                SegmentKind::Sp { owner, .. } => {
                    let i = owner.0 as usize;
                    self.stations[i].sp_until = None;
                    self.after_change(q, i);
                }
            },
            Ev::Burst(i) => {
                let s = &mut self.stations[i];
                let flow = s.flow.as_mut().expect("burst for a silent station");
                emit_burst(flow, &self.profile, now, &mut s.period, &mut s.queue, &mut self.records);
                let next = flow.next_burst_at;
                schedule(q, next, i, Ev::Burst(i));
                self.after_change(q, i);
            }
            Ev::SpTxEnd(i) => {
                let s = &mut self.stations[i];
                s.in_flight = false;
                let (start, plan) = s.sp_tx.take().expect("SP batch on air");
                let packets = s.queue.complete_tx();
                self.deliver(&packets, &plan, start);
                self.after_change(q, i);
            }
            Ev::CbapWake => {
                self.wake = None;
                self.cbap_fire(q, now);
            }
            Ev::CbapTxEnd => self.cbap_tx_end(q, now),
            Ev::AddtsStart(i) => {
                self.stations[i].addts_pending = true;
                self.contention.set_aifs(i, self.cfg.timing.mgmt_aifs());
                self.after_change(q, i);
            }
        }
    }

    fn bi_start(&mut self, q: &mut EventQueue<Ev>, k: u64) {
        let layout = self.cfg.layout;
        let base = layout.bi_start(k) + layout.dti_start();
        self.segments = self
            .pcp
            .schedule()
            .segments()
            .into_iter()
            .map(|s| (base + s.block.start, base + s.block.end(), s.kind))
            .collect();
        for (j, &(start, end, _)) in self.segments.iter().enumerate() {
            schedule(q, start, PCP, Ev::SegStart(j));
            schedule(q, end, PCP, Ev::SegEnd(j));
        }
        schedule(q, layout.bi_start(k + 1), PCP, Ev::BiStart(k + 1));
    }

    /// Re-evaluates a station after its queue or access rights changed.
    fn after_change(&mut self, q: &mut EventQueue<Ev>, i: usize) {
        if self.stations[i].sp_until.is_some() {
            self.try_sp_tx(q, i);
        } else if self.wants_cbap(i) {
            self.join(i, q.now());
            self.reschedule_wake(q);
        }
    }

    fn join(&mut self, i: usize, now: SimTime) {
        let s = &mut self.stations[i];
        self.contention.join(i, now, &mut s.backoff);
    }

    fn reschedule_wake(&mut self, q: &mut EventQueue<Ev>) {
        let next = self
            .contention
            .next_fire()
            .filter(|&t| self.attempt.is_none() && self.contention.window_end().is_some_and(|end| t < end));
        if self.wake.map(|(_, t)| t) == next {
            return;
        }
        if let Some((h, _)) = self.wake.take() {
            q.cancel(h);
        }
        if let Some(t) = next {
            self.wake = Some((schedule(q, t, PCP, Ev::CbapWake), t));
        }
    }

    fn try_sp_tx(&mut self, q: &mut EventQueue<Ev>, i: usize) {
        let now = q.now();
        let s = &mut self.stations[i];
        let Some(end) = s.sp_until else { return };
        if s.in_flight || !s.queue.has_waiting() || now >= end {
            return;
        }
        let plan = assemble_ampdu(&s.queue, &self.cfg.timing, end - now, &self.cfg.mcs);
        if plan.is_empty() {
            return;
        }
        s.queue.begin_tx(plan.packets);
        s.in_flight = true;
        let airtime = plan.airtime;
        let bytes = plan.payload_bytes;
        s.sp_tx = Some((now, plan));
        schedule(q, now + airtime, i, Ev::SpTxEnd(i));
        self.log(now, i, TxLogKind::Sp, bytes, airtime);
    }

    fn deliver(&mut self, packets: &[QueuedPacket], plan: &BatchPlan, start: SimTime) {
        debug_assert_eq!(packets.len(), plan.packets);
        for (p, off) in packets.iter().zip(plan.delivery_offsets()) {
            self.records[p.record as usize].delivered_at = Some(start + off);
        }
    }

    fn cbap_fire(&mut self, q: &mut EventQueue<Ev>, now: SimTime) {
        let end = self.contention.window_end().expect("wake outside a CBAP window");
        let mut senders = Vec::new();
        for i in self.contention.firing_at(now) {
            let s = &self.stations[i];
            let frame = if s.addts_pending {
                (now + self.mgmt_airtime <= end).then_some(Frame::Addts)
            } else if s.queue.has_waiting() && self.uses_cbap(i) && !s.in_flight {
                let plan = assemble_ampdu(&s.queue, &self.cfg.timing, end - now, &self.cfg.mcs);
                (!plan.is_empty()).then_some(Frame::Data(plan))
            } else {
                self.contention.leave(i);
                continue;
            };
            match frame {
                Some(f) => senders.push((i, f)),
                None => self.contention.park(i),
            }
        }
        if senders.is_empty() {
            self.reschedule_wake(q);
            return;
        }
        self.contention.pause(now);
        let busy = senders.iter().map(|(_, f)| f.airtime(self.mgmt_airtime)).max().expect("non-empty");
        for (i, f) in &senders {
            self.contention.transmitting(*i);
            let s = &mut self.stations[*i];
            s.in_flight = true;
            if let Frame::Data(p) = f {
                s.queue.begin_tx(p.packets);
            }
        }
        self.attempt = Some(CbapAttempt { start: now, senders });
        schedule(q, now + busy, PCP, Ev::CbapTxEnd);
    }

    fn cbap_tx_end(&mut self, q: &mut EventQueue<Ev>, now: SimTime) {
        let CbapAttempt { start, senders } = self.attempt.take().expect("CBAP attempt on air");
        let timing = self.cfg.timing;
        let collided = senders.len() > 1;
        for (i, frame) in &senders {
            let i = *i;
            self.stations[i].in_flight = false;
            let airtime = frame.airtime(self.mgmt_airtime);
            let bytes = match frame {
                Frame::Data(p) => p.payload_bytes,
                Frame::Addts => u64::from(timing.mgmt_frame_bytes),
            };
            if !collided {
                self.contention.dcf_mut(i).on_success(&timing);
                self.log(start, i, TxLogKind::Cbap, bytes, airtime);
                match frame {
                    Frame::Data(plan) => {
                        let packets = self.stations[i].queue.complete_tx();
                        self.deliver(&packets, plan, start);
                    }
                    Frame::Addts => self.addts_delivered(q, i, now),
                }
                continue;
            }
            self.log(start, i, TxLogKind::Collision, bytes, airtime);
            let outcome = self.contention.dcf_mut(i).on_collision(&timing);
            if let Frame::Data(_) = frame {
                let queue = &mut self.stations[i].queue;
                if outcome == CollisionOutcome::Drop {
                    for p in queue.complete_tx() {
                        self.records[p.record as usize].loss = Some(LossCause::Retry);
                    }
                    self.log(now, i, TxLogKind::Drop, bytes, SimTime::ZERO);
                } else {
                    queue.abort_tx();
                }
            }
        }
        for (i, _) in &senders {
            if self.wants_cbap(*i) {
                self.join(*i, now);
            }
        }
        self.contention.resume(now);
        for (i, _) in &senders {
            if self.stations[*i].sp_until.is_some() {
                self.try_sp_tx(q, *i);
            }
        }
        self.reschedule_wake(q);
    }

    /// The PCP/AP received a station's ADDTS request during the run.
    fn addts_delivered(&mut self, q: &mut EventQueue<Ev>, i: usize, now: SimTime) {
        let s = &mut self.stations[i];
        s.addts_pending = false;
        self.contention.set_aifs(i, self.cfg.timing.aifs);
        let resp = self.pcp.handle_addts(AddtsRequest::fixed(StaId(i as u32), 1, self.sp_duration));
        let AddtsResponse::Accepted { first_block_start, .. } = resp else { return };
        // the running BI's segments are fixed; the grant applies from the next BI
        let layout = self.cfg.layout;
        let next_bi = now.as_ns() / layout.bi_duration().as_ns() + 1;
        let first_block = layout.bi_start(next_bi) + layout.dti_start() + first_block_start;
        let s = &mut self.stations[i];
        s.role = Role::SpOwner;
        let offset = app_start_time(&self.profile, Some(first_block - now), &mut s.app_start);
        let t0 = now + offset;
        s.flow = Some(FlowState::new(i as u32, t0));
        self.t0s[i] = Some(t0);
        schedule(q, t0, i, Ev::Burst(i));
    }
}

/// Runs one replication.
pub fn run(cfg: &SimConfig, run_seed: u64) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let timing = cfg.timing;
    let burst_packets = cfg.burst_packets();
    let sp_duration = sp_duration_for(burst_packets, cfg.packet_size, &cfg.mcs, &timing);
    let profile = TrafficProfile {
        mean_period: cfg.period(),
        deviation_ratio: cfg.rho,
        packet_size: cfg.packet_size,
        burst_packets,
        smart_start: cfg.scheduling.smart_start,
    };
    let capacity = u64::from(cfg.queue_bursts) * burst_packets * u64::from(cfg.packet_size);
    let n = cfg.n_stas as usize;
    let mut pcp = PcpScheduler::new(cfg.scheduling.policy, cfg.layout, cfg.guard);
    let mut stations: Vec<Station> = (0..n)
        .map(|i| Station {
            role: Role::Silent,
            queue: TxQueue::new(capacity),
            flow: None,
            sp_until: None,
            in_flight: false,
            sp_tx: None,
            addts_pending: false,
            app_start: RngStream::new(run_seed, format!("sta{i}.app-start")),
            period: RngStream::new(run_seed, format!("sta{i}.period")),
            backoff: RngStream::new(run_seed, format!("sta{i}.backoff")),
        })
        .collect();

    let mut q: EventQueue<Ev> = EventQueue::new();
    let mut t0s = vec![None; n];
    let in_setup = cfg.addts_spacing.is_none() || cfg.scheduling.policy == SchedulerPolicy::CbapOnly;
    for (i, s) in stations.iter_mut().enumerate() {
        if !in_setup {
            let at = cfg.addts_spacing.expect("checked").times(i as u64);
            schedule(&mut q, at, i, Ev::AddtsStart(i));
            continue;
        }
        let resp = pcp.handle_addts(AddtsRequest::fixed(StaId(i as u32), 1, sp_duration));
        let first_block = match (cfg.scheduling.policy, resp) {
            (SchedulerPolicy::CbapOnly, _) => {
                s.role = Role::CbapOnly;
                None
            }
            (SchedulerPolicy::Periodic, AddtsResponse::Accepted { first_block_start, .. }) => {
                s.role = Role::SpOwner;
                Some(cfg.layout.dti_start() + first_block_start)
            }
            (SchedulerPolicy::Periodic, AddtsResponse::Rejected { .. }) => continue,
        };
        let t0 = app_start_time(&profile, first_block, &mut s.app_start);
        s.flow = Some(FlowState::new(i as u32, t0));
        t0s[i] = Some(t0);
        schedule(&mut q, t0, i, Ev::Burst(i));
    }
    schedule(&mut q, SimTime::ZERO, PCP, Ev::BiStart(0));

    let mgmt_airtime = frame_tx_duration(u64::from(timing.mgmt_frame_bytes), &cfg.mcs, &timing)
        + timing.sifs
        + timing.block_ack_duration;
    let mut world = World {
        cfg: cfg.clone(),
        profile,
        sp_duration,
        pcp,
        stations,
        contention: Contention::new(n, &timing),
        records: Vec::new(),
        segments: Vec::new(),
        wake: None,
        attempt: None,
        mgmt_airtime,
        t0s,
        tx_log: Vec::new(),
    };
    let stats = q.run_until(cfg.horizon, |q, ev| world.handle(q, ev.payload));

    let conservation = (0..n)
        .filter(|&i| world.stations[i].flow.is_some())
        .map(|i| {
            let mut c = FlowConservation { sta: i as u32, ..Default::default() };
            for r in world.records.iter().filter(|r| r.flow == i as u32) {
                c.generated += 1;
                match (r.delivered_at, r.loss) {
                    (Some(_), _) => c.delivered += 1,
                    (None, Some(LossCause::Queue)) => c.dropped_queue += 1,
                    (None, Some(LossCause::Retry)) => c.dropped_retry += 1,
                    (None, None) => {}
                }
            }
            let queue = &world.stations[i].queue;
            c.in_flight = queue.in_flight() as u64;
            c.queued = queue.waiting_len() as u64;
            c
        })
        .collect();
    let admitted = world.pcp.schedule().sp_allocations().len() as u32;
    let kpi = RunKpi::from_records(&world.records, cfg.horizon, admitted);
    Ok(RunOutput {
        run_seed,
        records: world.records,
        kpi,
        conservation,
        stats,
        admitted,
        t0s: world.t0s,
        schedule: world.pcp.schedule().clone(),
        burst_packets,
        sp_duration,
        tx_log: world.tx_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(scheduling: SchedulingConfig, eta: f64) -> SimConfig {
        SimConfig { scheduling, load: Load::Eta(eta), horizon: SimTime::from_secs(2), ..Default::default() }
    }

    #[test]
    fn presets_are_distinct() {
        for c in SchedulingConfig::ALL {
            assert_eq!(SchedulingConfig::by_name(c.name()), Some(c));
        }
    }

    #[test]
    fn clock_ends_at_horizon() {
        let out = run(&cfg(SchedulingConfig::SP1, 0.5), 1).unwrap();
        assert_eq!(out.stats.final_clock, SimTime::from_secs(2));
        assert!(out.stats.events_processed > 0);
    }

    #[test]
    fn conservation_holds_for_every_preset() {
        for c in SchedulingConfig::ALL {
            let out = run(&cfg(c, 0.9), 3).unwrap();
            assert!(out.conservation.iter().all(FlowConservation::holds), "{c}");
            let pending = out.records.iter().filter(|r| r.is_pending()).count() as u64;
            let held: u64 = out.conservation.iter().map(|f| f.queued + f.in_flight).sum();
            assert_eq!(pending, held, "{c}");
        }
    }

    #[test]
    fn sp_traffic_is_lossless() {
        for c in [SchedulingConfig::SP1, SchedulingConfig::SP2] {
            let out = run(&cfg(c, 0.8), 5).unwrap();
            assert_eq!(out.kpi.lost_packets, 0, "{c}");
            assert_eq!(out.admitted, 4);
        }
    }

    #[test]
    fn smart_start_aligns_with_first_block() {
        let out = run(&cfg(SchedulingConfig::SP1, 0.5), 2).unwrap();
        for (i, t0) in out.t0s.iter().enumerate() {
            let alloc = out.schedule.allocation_of(StaId(i as u32)).unwrap();
            assert_eq!(t0.unwrap(), SimTime::from_ms(2) + alloc.first_block_start().unwrap());
        }
    }

    #[test]
    fn rejects_out_of_range_eta() {
        let err = run(&cfg(SchedulingConfig::SP1, 1.5), 1).unwrap_err();
        assert!(err.to_string().contains("η must lie in (0,1]"));
    }

    #[test]
    fn tx_log_has_no_overlap() {
        let mut c = cfg(SchedulingConfig::SP3, 0.75);
        c.tx_log = true;
        let out = run(&c, 4).unwrap();
        let mut busy: Vec<(SimTime, SimTime)> = Vec::new();
        for e in out.tx_log.iter().filter(|e| e.kind != TxLogKind::Drop) {
            let iv = (e.time, e.time + e.airtime);
            if e.kind == TxLogKind::Collision && busy.last().is_some_and(|b| b.0 == iv.0) {
                continue;
            }
            if let Some(b) = busy.last() {
                assert!(iv.0 >= b.1, "overlap at {}", iv.0);
            }
            busy.push(iv);
        }
        assert!(!busy.is_empty());
    }

    #[test]
    fn late_addts_contends_in_cbap() {
        let mut c = cfg(SchedulingConfig::SP3, 0.3);
        c.addts_spacing = Some(SimTime::from_ms(50));
        let out = run(&c, 8).unwrap();
        assert_eq!(out.admitted, 4);
        assert!(out.t0s.iter().all(Option::is_some));
        assert!(out.kpi.aggr_throughput_bps > 0.0);
    }
}
