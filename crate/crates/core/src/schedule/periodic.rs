//! Admission control and placement of periodic pseudo-static SP allocations.
//!
//! Rules enforced here:
//! - the allocation period is `T_BI / p` for an integer `p`;
//! - an accepted request gets exactly `p` blocks spaced by that period, all
//!   inside the DTI and disjoint from every earlier block;
//! - accepted blocks never move, and their duration can only shrink;
//! - whatever the SPs leave free is CBAP.

use crate::schedule::{
    AddtsRequest, AddtsResponse, AllocId, Allocation, AllocationKind, BeaconIntervalLayout, Block,
    DtiSchedule, Owner, RejectReason, ScheduleError,
};
use crate::time::SimTime;

/// Admits `req` at the smallest feasible first-block offset, or rejects it
/// leaving `sched` untouched. `guard` is the minimum spacing kept between
/// blocks of different allocations.
pub fn admit_periodic(
    req: &AddtsRequest,
    sched: &mut DtiSchedule,
    layout: &BeaconIntervalLayout,
    guard: SimTime,
) -> AddtsResponse {
    let reject = |reason| AddtsResponse::Rejected { reason };
    if !req.is_valid() {
        return reject(RejectReason::InvalidRequest);
    }
    let p = u64::from(req.period_divisor);
    let bi = layout.bi_duration().as_ns();
    if !bi.is_multiple_of(p) {
        return reject(RejectReason::UnsupportedPeriod);
    }
    let period = SimTime::from_ns(bi / p);
    let duration = req.max_duration;
    if duration > period {
        return reject(RejectReason::DurationExceedsPeriod);
    }
    let Some(start) = first_feasible_start(sched, layout.dti_duration(), p, period, duration, guard)
    else {
        return reject(RejectReason::InsufficientDtiTime);
    };

    let alloc_id = AllocId(sched.sp_allocations().iter().map(|a| a.id.0).max().unwrap_or(0) + 1);
    let blocks = (0..p).map(|i| Block::new(start + period.times(i), duration)).collect();
    sched.push_allocation(Allocation {
        id: alloc_id,
        owner: Owner::Sta(req.sta),
        kind: AllocationKind::Sp,
        blocks,
        period,
        pseudo_static: req.pseudo_static,
    });
    AddtsResponse::Accepted { alloc_id, allocated_duration: duration, first_block_start: start }
}

/// Smallest `s` such that blocks `[s + i*period, s + i*period + duration)`,
/// `i < p`, fit in the DTI without touching existing blocks (plus guard).
///
/// The minimum is always 0 or a position where some block `i` starts exactly
/// at `guard` past the end of an existing block, so only those candidates are
/// tested.
fn first_feasible_start(
    sched: &DtiSchedule,
    dti: SimTime,
    p: u64,
    period: SimTime,
    duration: SimTime,
    guard: SimTime,
) -> Option<SimTime> {
    let last_offset = period.times(p - 1) + duration;
    let latest = dti.checked_sub(last_offset)?;

    let existing: Vec<Block> = sched.sp_blocks().copied().collect();
    let mut candidates = vec![SimTime::ZERO];
    for b in &existing {
        let edge = b.end() + guard;
        for i in 0..p {
            if let Some(c) = edge.checked_sub(period.times(i)) {
                candidates.push(c);
            }
        }
    }
    candidates.sort();
    candidates.dedup();

    candidates.into_iter().take_while(|&s| s <= latest).find(|&s| {
        (0..p).all(|i| {
            let blk = Block::new(s + period.times(i), duration);
            existing
                .iter()
                .all(|e| !(blk.start < e.end() + guard && e.start < blk.end() + guard))
        })
    })
}

/// Shrinks every block of `alloc_id` to `new_duration`, keeping block starts.
pub fn reduce_allocation(
    alloc_id: AllocId,
    new_duration: SimTime,
    sched: &mut DtiSchedule,
) -> Result<(), ScheduleError> {
    let alloc = sched.allocation_mut(alloc_id).ok_or(ScheduleError::UnknownAllocation(alloc_id))?;
    let current = alloc.blocks.first().map(|b| b.duration).unwrap_or(SimTime::ZERO);
    if new_duration == SimTime::ZERO {
        return Err(ScheduleError::ZeroDuration);
    }
    if new_duration > current {
        return Err(ScheduleError::DurationIncrease { current, requested: new_duration });
    }
    for b in &mut alloc.blocks {
        b.duration = new_duration;
    }
    sched.refresh_gaps();
    Ok(())
}

/// Scheduling policy of the PCP/AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulerPolicy {
    /// Periodic pseudo-static SPs; everything else is CBAP.
    Periodic,
    /// The whole DTI is CBAP; every ADDTS request is answered "not applicable".
    CbapOnly,
}

/// The PCP/AP scheduler state for one run, with its admission log.
#[derive(Debug, Clone)]
pub struct PcpScheduler {
    policy: SchedulerPolicy,
    layout: BeaconIntervalLayout,
    guard: SimTime,
    schedule: DtiSchedule,
    log: Vec<(AddtsRequest, AddtsResponse)>,
}

impl PcpScheduler {
    pub fn new(policy: SchedulerPolicy, layout: BeaconIntervalLayout, guard: SimTime) -> Self {
        let schedule = match policy {
            SchedulerPolicy::Periodic => DtiSchedule::new(&layout),
            SchedulerPolicy::CbapOnly => crate::schedule::cbap_only_schedule(&layout),
        };
        PcpScheduler { policy, layout, guard, schedule, log: Vec::new() }
    }

    pub fn policy(&self) -> SchedulerPolicy {
        self.policy
    }

    pub fn layout(&self) -> &BeaconIntervalLayout {
        &self.layout
    }

    pub fn schedule(&self) -> &DtiSchedule {
        &self.schedule
    }

    pub fn log(&self) -> &[(AddtsRequest, AddtsResponse)] {
        &self.log
    }

    pub fn handle_addts(&mut self, req: AddtsRequest) -> AddtsResponse {
        let resp = match self.policy {
            SchedulerPolicy::Periodic => {
                admit_periodic(&req, &mut self.schedule, &self.layout, self.guard)
            }
            SchedulerPolicy::CbapOnly => AddtsResponse::Rejected { reason: RejectReason::NotApplicable },
        };
        self.log.push((req, resp));
        resp
    }

    pub fn reduce(&mut self, alloc_id: AllocId, new_duration: SimTime) -> Result<(), ScheduleError> {
        reduce_allocation(alloc_id, new_duration, &mut self.schedule)
    }
}
