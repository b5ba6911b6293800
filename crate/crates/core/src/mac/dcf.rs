//! Slotted CSMA/CA with binary exponential backoff, evaluated lazily: instead
//! of ticking every slot, each contender's firing instant is computed from
//! its counter and counters are frozen only when the medium changes state.

use crate::mac::airtime::{assemble_ampdu, BatchPlan, Transmission};
use crate::mac::{MacTimingParams, McsEntry, TxQueue};
use crate::rng::RngStream;
use crate::time::SimTime;

/// Per-station backoff state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DcfState {
    pub cw: u32,
    /// Remaining backoff slots; `None` when the station is not contending.
    pub backoff: Option<u32>,
    /// Collisions suffered by the current head-of-line batch.
    pub retries: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionOutcome {
    Retry,
    /// Retry limit reached; the batch must be discarded.
    Drop,
}

impl DcfState {
    pub fn new(timing: &MacTimingParams) -> Self {
        DcfState { cw: timing.cw_min, backoff: None, retries: 0 }
    }

    /// Draws a fresh counter from `[0, cw]` if none is pending.
    pub fn ensure_backoff(&mut self, stream: &mut RngStream) -> u32 {
        *self.backoff.get_or_insert_with(|| stream.uniform_int(self.cw))
    }

    pub fn on_success(&mut self, timing: &MacTimingParams) {
        self.cw = timing.cw_min;
        self.retries = 0;
        self.backoff = None;
    }

    pub fn on_collision(&mut self, timing: &MacTimingParams) -> CollisionOutcome {
        self.backoff = None;
        self.retries += 1;
        if self.retries >= timing.retry_limit {
            self.retries = 0;
            self.cw = timing.cw_min;
            CollisionOutcome::Drop
        } else {
            self.cw = (2 * self.cw + 1).min(timing.cw_max);
            CollisionOutcome::Retry
        }
    }
}

#[derive(Debug, Clone)]
struct Contender {
    dcf: DcfState,
    aifs: SimTime,
    /// First slot boundary at which the counter decrements; `None` while the
    /// medium is busy or the window is closed.
    count_start: Option<SimTime>,
    /// Could not fit a frame in the current window; waits for the next one.
    parked: bool,
}

/// The shared medium of one CBAP as seen by its contenders.
#[derive(Debug, Clone)]
pub struct Contention {
    slot: SimTime,
    contenders: Vec<Contender>,
    idle_since: Option<SimTime>,
    window_end: Option<SimTime>,
}

impl Contention {
    pub fn new(n_stations: usize, timing: &MacTimingParams) -> Self {
        let c = Contender { dcf: DcfState::new(timing), aifs: timing.aifs, count_start: None, parked: false };
        Contention { slot: timing.slot, contenders: vec![c; n_stations], idle_since: None, window_end: None }
    }

    pub fn dcf(&self, sta: usize) -> &DcfState {
        &self.contenders[sta].dcf
    }

    pub fn dcf_mut(&mut self, sta: usize) -> &mut DcfState {
        &mut self.contenders[sta].dcf
    }

    /// Sets the AIFS this station uses for its next access.
    pub fn set_aifs(&mut self, sta: usize, aifs: SimTime) {
        self.contenders[sta].aifs = aifs;
    }

    pub fn is_contending(&self, sta: usize) -> bool {
        self.contenders[sta].dcf.backoff.is_some()
    }

    /// End of the open window, if any.
    pub fn window_end(&self) -> Option<SimTime> {
        self.window_end
    }

    pub fn is_idle(&self) -> bool {
        self.idle_since.is_some()
    }

    fn grid_start(&self, c: &Contender, idle: SimTime, now: SimTime) -> SimTime {
        let base = idle + c.aifs;
        if now <= base {
            base
        } else {
            let slots = (now - base).as_ns().div_ceil(self.slot.as_ns());
            base + self.slot.times(slots)
        }
    }

    fn arm(&mut self, idle: SimTime) {
        for c in &mut self.contenders {
            c.count_start = (c.dcf.backoff.is_some() && !c.parked).then(|| idle + c.aifs);
        }
    }

    /// A new window `[at, end)` opens with an idle medium. Parked stations
    /// get another chance.
    pub fn open_window(&mut self, at: SimTime, end: SimTime) {
        self.window_end = Some(end);
        self.idle_since = Some(at);
        for c in &mut self.contenders {
            c.parked = false;
        }
        self.arm(at);
    }

    /// The medium turns idle again inside the current window.
    pub fn resume(&mut self, at: SimTime) {
        if self.window_end.is_some_and(|end| at < end) {
            self.idle_since = Some(at);
            self.arm(at);
        }
    }

    /// The medium turns busy: counters are frozen at the slots already
    /// elapsed.
    pub fn pause(&mut self, at: SimTime) {
        let slot = self.slot.as_ns();
        for c in &mut self.contenders {
            if let (Some(cs), Some(b)) = (c.count_start.take(), c.dcf.backoff.as_mut()) {
                if at > cs {
                    let elapsed = (at - cs).as_ns() / slot;
                    *b -= (*b).min(u32::try_from(elapsed).unwrap_or(u32::MAX));
                }
            }
        }
        self.idle_since = None;
    }

    /// The window closes.
    pub fn close_window(&mut self, at: SimTime) {
        self.pause(at);
        self.window_end = None;
    }

    /// Starts contending at `now` (no-op if already contending).
    pub fn join(&mut self, sta: usize, now: SimTime, stream: &mut RngStream) {
        let idle = self.idle_since;
        let c = &self.contenders[sta];
        if c.dcf.backoff.is_some() {
            return;
        }
        let start = idle.filter(|_| !c.parked).map(|i| self.grid_start(c, i, now));
        let c = &mut self.contenders[sta];
        c.dcf.ensure_backoff(stream);
        c.count_start = start;
    }

    /// Stops contending and forgets the counter.
    pub fn leave(&mut self, sta: usize) {
        let c = &mut self.contenders[sta];
        c.dcf.backoff = None;
        c.count_start = None;
    }

    /// Fired but nothing fits before the window end: keep a zero counter and
    /// wait for the next window.
    pub fn park(&mut self, sta: usize) {
        let c = &mut self.contenders[sta];
        c.dcf.backoff = Some(0);
        c.count_start = None;
        c.parked = true;
    }

    /// Called for stations that start transmitting.
    pub fn transmitting(&mut self, sta: usize) {
        let c = &mut self.contenders[sta];
        c.dcf.backoff = None;
        c.count_start = None;
    }

    fn fire_time(&self, c: &Contender) -> Option<SimTime> {
        Some(c.count_start? + self.slot.times(u64::from(c.dcf.backoff?)))
    }

    /// Earliest instant at which some counter reaches zero.
    pub fn next_fire(&self) -> Option<SimTime> {
        self.contenders.iter().filter_map(|c| self.fire_time(c)).min()
    }

    /// Stations whose counters reach zero exactly at `at`.
    pub fn firing_at(&self, at: SimTime) -> Vec<usize> {
        (0..self.contenders.len())
            .filter(|&i| self.fire_time(&self.contenders[i]) == Some(at))
            .collect()
    }
}

/// One station taking part in [`cbap_contend`].
pub struct CbapStation<'a> {
    pub queue: &'a mut TxQueue,
    pub stream: &'a mut RngStream,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbapEvent {
    Success { sta: usize, tx: Transmission },
    Collision { stas: Vec<usize>, start: SimTime, end: SimTime, dropped: Vec<usize> },
}

/// Runs one CBAP window `[start, end)` for stations whose queues receive no
/// arrivals meanwhile. `contention` carries backoff state across windows.
pub fn cbap_contend(
    stations: &mut [CbapStation<'_>],
    contention: &mut Contention,
    start: SimTime,
    end: SimTime,
    timing: &MacTimingParams,
    mcs: &McsEntry,
) -> Vec<CbapEvent> {
    let mut out = Vec::new();
    contention.open_window(start, end);
    for (i, s) in stations.iter_mut().enumerate() {
        if s.queue.has_waiting() {
            contention.join(i, start, s.stream);
        }
    }
    while let Some(at) = contention.next_fire().filter(|&t| t < end) {
        let mut senders: Vec<(usize, BatchPlan)> = Vec::new();
        for i in contention.firing_at(at) {
            let plan = assemble_ampdu(stations[i].queue, timing, end - at, mcs);
            if plan.is_empty() {
                contention.park(i);
            } else {
                senders.push((i, plan));
            }
        }
        if senders.is_empty() {
            continue;
        }
        contention.pause(at);
        let busy_until = at + senders.iter().map(|(_, p)| p.airtime).max().expect("non-empty");
        if let [(i, plan)] = senders.as_slice() {
            let (i, plan) = (*i, plan.clone());
            let q = &mut *stations[i].queue;
            q.begin_tx(plan.packets);
            let packets = q.complete_tx();
            contention.transmitting(i);
            contention.dcf_mut(i).on_success(timing);
            out.push(CbapEvent::Success { sta: i, tx: Transmission { start: at, plan, packets } });
        } else {
            let mut dropped = Vec::new();
            for (i, plan) in &senders {
                contention.transmitting(*i);
                if contention.dcf_mut(*i).on_collision(timing) == CollisionOutcome::Drop {
                    let q = &mut *stations[*i].queue;
                    q.begin_tx(plan.packets);
                    q.complete_tx();
                    dropped.push(*i);
                }
            }
            out.push(CbapEvent::Collision {
                stas: senders.iter().map(|(i, _)| *i).collect(),
                start: at,
                end: busy_until,
                dropped,
            });
        }
        for (i, _) in &senders {
            if stations[*i].queue.has_waiting() {
                contention.join(*i, busy_until, stations[*i].stream);
            }
        }
        contention.resume(busy_until);
    }
    contention.close_window(end);
    out
}
