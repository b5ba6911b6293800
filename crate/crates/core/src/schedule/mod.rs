//! The PCP/AP scheduler: BI layout, ADDTS admission, SP placement and the
//! CBAP gaps left around the SPs.

mod addts;
mod dti;
mod layout;
mod periodic;

use thiserror::Error;

use crate::time::SimTime;

pub use addts::{AddtsRequest, AddtsResponse, RejectReason, StaId};
pub use dti::{
    cbap_only_schedule, derive_cbap_gaps, AllocId, Allocation, AllocationKind, Block, DtiSchedule,
    Owner, Segment, SegmentKind, CBAP_ALLOC_ID,
};
pub use layout::{BeaconIntervalLayout, DEFAULT_BHI, DEFAULT_BI};
pub use periodic::{admit_periodic, reduce_allocation, PcpScheduler, SchedulerPolicy};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("invalid BI layout: bi {bi}, bhi {bhi}")]
    InvalidLayout { bi: SimTime, bhi: SimTime },
    #[error("unknown allocation {0:?}")]
    UnknownAllocation(AllocId),
    #[error("increase is not supported: current {current}, requested {requested}")]
    DurationIncrease { current: SimTime, requested: SimTime },
    #[error("allocation duration must be positive")]
    ZeroDuration,
}
