//! Frame-level channel model over a perfect channel: PHY durations at a
//! fixed MCS, aggregation, SP service and CBAP contention.

mod airtime;
mod dcf;
mod params;
mod queue;

use thiserror::Error;

pub use airtime::{
    assemble_ampdu, frame_tx_duration, plan_batch, sp_duration_for, sp_service, BatchPlan, MpduSlot,
    Transmission,
};
pub use dcf::{cbap_contend, CbapEvent, CbapStation, CollisionOutcome, Contention, DcfState};
pub use params::{MacTimingParams, McsEntry};
pub use queue::{EnqueueOutcome, QueuedPacket, TxQueue};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MacError {
    #[error("invalid MAC timing: {0}")]
    InvalidTiming(String),
}
