//! ADDTS Request/Response, the admission contract between a STA and the PCP/AP.

use std::fmt;

use crate::schedule::AllocId;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StaId(pub u32);

impl fmt::Display for StaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sta{}", self.0)
    }
}

/// Request for `period_divisor` equally spaced SP blocks per BI, i.e. an
/// allocation period of `T_BI / period_divisor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddtsRequest {
    pub sta: StaId,
    pub period_divisor: u32,
    pub min_duration: SimTime,
    pub max_duration: SimTime,
    pub pseudo_static: bool,
}

impl AddtsRequest {
    /// A pseudo-static request with equal minimum and maximum duration.
    pub fn fixed(sta: StaId, period_divisor: u32, duration: SimTime) -> Self {
        AddtsRequest {
            sta,
            period_divisor,
            min_duration: duration,
            max_duration: duration,
            pseudo_static: true,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.period_divisor >= 1
            && self.min_duration <= self.max_duration
            && self.max_duration > SimTime::ZERO
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    InvalidRequest,
    /// The divisor does not split the BI into an integral number of nanoseconds.
    UnsupportedPeriod,
    /// The block would be longer than its own period.
    DurationExceedsPeriod,
    InsufficientDtiTime,
    /// The CBAP-only scheduler grants no SPs.
    NotApplicable,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RejectReason::InvalidRequest => "invalid request",
            RejectReason::UnsupportedPeriod => "unsupported period",
            RejectReason::DurationExceedsPeriod => "duration exceeds allocation period",
            RejectReason::InsufficientDtiTime => "insufficient DTI time",
            RejectReason::NotApplicable => "not applicable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddtsResponse {
    Accepted {
        alloc_id: AllocId,
        allocated_duration: SimTime,
        /// Offset of the first block from the DTI start.
        first_block_start: SimTime,
    },
    Rejected {
        reason: RejectReason,
    },
}

impl AddtsResponse {
    pub fn is_accepted(&self) -> bool {
        matches!(self, AddtsResponse::Accepted { .. })
    }
}
