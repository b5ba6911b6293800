use crate::schedule::ScheduleError;
use crate::time::SimTime;

/// Beacon interval length used throughout: 102.4 ms.
pub const DEFAULT_BI: SimTime = SimTime::from_us(102_400);
/// Reserved beacon header interval at the start of every BI.
pub const DEFAULT_BHI: SimTime = SimTime::from_ms(2);

/// A beacon interval split into a leading BHI and the data transmission
/// interval (DTI) that fills the rest of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeaconIntervalLayout {
    bi_duration: SimTime,
    bhi_duration: SimTime,
}

impl BeaconIntervalLayout {
    pub fn new(bi_duration: SimTime, bhi_duration: SimTime) -> Result<Self, ScheduleError> {
        if bhi_duration == SimTime::ZERO || bhi_duration >= bi_duration {
            return Err(ScheduleError::InvalidLayout { bi: bi_duration, bhi: bhi_duration });
        }
        Ok(BeaconIntervalLayout { bi_duration, bhi_duration })
    }

    pub fn bi_duration(&self) -> SimTime {
        self.bi_duration
    }

    pub fn bhi_duration(&self) -> SimTime {
        self.bhi_duration
    }

    /// Offset of the DTI from the BI start; equal to the BHI duration.
    pub fn dti_start(&self) -> SimTime {
        self.bhi_duration
    }

    pub fn dti_duration(&self) -> SimTime {
        self.bi_duration - self.bhi_duration
    }

    /// Absolute start of BI number `bi`.
    pub fn bi_start(&self, bi: u64) -> SimTime {
        self.bi_duration.times(bi)
    }
}

impl Default for BeaconIntervalLayout {
    fn default() -> Self {
        BeaconIntervalLayout { bi_duration: DEFAULT_BI, bhi_duration: DEFAULT_BHI }
    }
}
