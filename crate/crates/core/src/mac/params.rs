use crate::mac::MacError;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McsEntry {
    pub index: u8,
    pub phy_rate_bps: u64,
}

/// DMG single-carrier PHY rates, MCS 1 to 12.
const DMG_SC_RATES: [u64; 12] = [
    385_000_000,
    770_000_000,
    962_500_000,
    1_155_000_000,
    1_251_250_000,
    1_540_000_000,
    1_925_000_000,
    2_310_000_000,
    2_502_500_000,
    3_080_000_000,
    3_850_000_000,
    4_620_000_000,
];

impl McsEntry {
    pub const MCS4: McsEntry = McsEntry { index: 4, phy_rate_bps: 1_155_000_000 };

    pub fn dmg_sc(index: u8) -> Option<McsEntry> {
        let rate = *DMG_SC_RATES.get(usize::from(index).checked_sub(1)?)?;
        Some(McsEntry { index, phy_rate_bps: rate })
    }
}

/// MAC/PHY timing and aggregation constants. Defaults are DMG values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacTimingParams {
    pub slot: SimTime,
    pub sifs: SimTime,
    pub aifs: SimTime,
    /// Preamble plus PHY header, paid once per PPDU.
    pub preamble_header: SimTime,
    /// MAC header + FCS + A-MPDU delimiter, per MPDU.
    pub per_mpdu_overhead: u32,
    /// LLC/SNAP + IPv4 + UDP, per MSDU.
    pub per_msdu_overhead: u32,
    pub max_amsdu: u32,
    pub max_ampdu: u32,
    pub block_ack_duration: SimTime,
    pub cw_min: u32,
    pub cw_max: u32,
    pub retry_limit: u32,
    /// Size of an ADDTS management frame body.
    pub mgmt_frame_bytes: u32,
}

impl Default for MacTimingParams {
    fn default() -> Self {
        MacTimingParams {
            slot: SimTime::from_us(5),
            sifs: SimTime::from_us(3),
            aifs: SimTime::from_us(13),
            preamble_header: SimTime::from_us(2),
            per_mpdu_overhead: 32,
            per_msdu_overhead: 36,
            max_amsdu: 7_935,
            max_ampdu: 262_143,
            block_ack_duration: SimTime::from_us(2),
            cw_min: 15,
            cw_max: 1_023,
            retry_limit: 7,
            mgmt_frame_bytes: 64,
        }
    }
}

fn is_window(cw: u32) -> bool {
    (cw + 1).is_power_of_two()
}

impl MacTimingParams {
    /// Checks the invariants that hold for a packet of `packet_size` bytes.
    pub fn validate(&self, packet_size: u32) -> Result<(), MacError> {
        if self.slot == SimTime::ZERO {
            return Err(MacError::InvalidTiming("slot must be positive".into()));
        }
        if self.aifs < self.slot {
            return Err(MacError::InvalidTiming("aifs must be at least one slot".into()));
        }
        if !(is_window(self.cw_min) && is_window(self.cw_max) && self.cw_min <= self.cw_max) {
            return Err(MacError::InvalidTiming(format!(
                "cw_min {} / cw_max {} must be 2^k-1 with cw_min <= cw_max",
                self.cw_min, self.cw_max
            )));
        }
        if self.retry_limit == 0 {
            return Err(MacError::InvalidTiming("retry_limit must be positive".into()));
        }
        let msdu = packet_size + self.per_msdu_overhead;
        if self.max_amsdu < msdu {
            return Err(MacError::InvalidTiming(format!("max_amsdu {} < one MSDU ({msdu} B)", self.max_amsdu)));
        }
        if self.max_ampdu < msdu + self.per_mpdu_overhead {
            return Err(MacError::InvalidTiming(format!(
                "max_ampdu {} < one MPDU ({} B)",
                self.max_ampdu,
                msdu + self.per_mpdu_overhead
            )));
        }
        Ok(())
    }

    /// AIFS used by ADDTS management frames: one slot shorter than data.
    pub fn mgmt_aifs(&self) -> SimTime {
        self.aifs - self.slot
    }
}
