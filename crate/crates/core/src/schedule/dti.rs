use std::fmt;
use std::io;

use crate::schedule::{BeaconIntervalLayout, StaId};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AllocId(pub u32);

/// Identifier used for the broadcast CBAP allocation in schedule dumps.
pub const CBAP_ALLOC_ID: AllocId = AllocId(0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Owner {
    Sta(StaId),
    Broadcast,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Sta(s) => write!(f, "{s}"),
            Owner::Broadcast => f.write_str("broadcast"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationKind {
    Sp,
    Cbap,
}

/// A `[start, start + duration)` interval, offsets relative to the DTI start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Block {
    pub start: SimTime,
    pub duration: SimTime,
}

impl Block {
    pub fn new(start: SimTime, duration: SimTime) -> Self {
        Block { start, duration }
    }

    pub fn end(&self) -> SimTime {
        self.start + self.duration
    }

    pub fn overlaps(&self, other: &Block) -> bool {
        self.start < other.end() && other.start < self.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub id: AllocId,
    pub owner: Owner,
    pub kind: AllocationKind,
    pub blocks: Vec<Block>,
    pub period: SimTime,
    pub pseudo_static: bool,
}

impl Allocation {
    pub fn first_block_start(&self) -> Option<SimTime> {
        self.blocks.first().map(|b| b.start)
    }
}

/// One contiguous piece of the DTI, either a single SP block or a CBAP gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub block: Block,
    pub kind: SegmentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Sp { owner: StaId, alloc: AllocId },
    Cbap,
}

/// SP allocations of the DTI; all remaining time is CBAP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DtiSchedule {
    dti_duration: SimTime,
    sp_allocations: Vec<Allocation>,
    cbap_gaps: Vec<Block>,
}

impl DtiSchedule {
    pub fn new(layout: &BeaconIntervalLayout) -> Self {
        let dti_duration = layout.dti_duration();
        DtiSchedule {
            dti_duration,
            sp_allocations: Vec::new(),
            cbap_gaps: vec![Block::new(SimTime::ZERO, dti_duration)],
        }
    }

    pub fn dti_duration(&self) -> SimTime {
        self.dti_duration
    }

    pub fn sp_allocations(&self) -> &[Allocation] {
        &self.sp_allocations
    }

    pub fn cbap_gaps(&self) -> &[Block] {
        &self.cbap_gaps
    }

    pub fn allocation(&self, id: AllocId) -> Option<&Allocation> {
        self.sp_allocations.iter().find(|a| a.id == id)
    }

    pub fn allocation_of(&self, sta: StaId) -> Option<&Allocation> {
        self.sp_allocations.iter().find(|a| a.owner == Owner::Sta(sta))
    }

    pub fn sp_blocks(&self) -> impl Iterator<Item = &Block> {
        self.sp_allocations.iter().flat_map(|a| a.blocks.iter())
    }

    pub(crate) fn push_allocation(&mut self, alloc: Allocation) {
        self.sp_allocations.push(alloc);
        self.refresh_gaps();
    }

    pub(crate) fn allocation_mut(&mut self, id: AllocId) -> Option<&mut Allocation> {
        self.sp_allocations.iter_mut().find(|a| a.id == id)
    }

    pub(crate) fn refresh_gaps(&mut self) {
        self.cbap_gaps = complement(self.sp_blocks().copied(), self.dti_duration);
    }

    /// Every SP block and CBAP gap, sorted by start.
    pub fn segments(&self) -> Vec<Segment> {
        let mut segs: Vec<Segment> = self
            .sp_allocations
            .iter()
            .flat_map(|a| {
                let owner = match a.owner {
                    Owner::Sta(s) => s,
                    Owner::Broadcast => unreachable!("SP allocations are owned by a STA"),
                };
                a.blocks
                    .iter()
                    .map(move |&block| Segment { block, kind: SegmentKind::Sp { owner, alloc: a.id } })
            })
            .chain(self.cbap_gaps.iter().map(|&block| Segment { block, kind: SegmentKind::Cbap }))
            .filter(|s| s.block.duration > SimTime::ZERO)
            .collect();
        segs.sort_by_key(|s| s.block.start);
        segs
    }

    /// CSV rows `alloc_id,owner,kind,block_index,start_ns,duration_ns`; the
    /// CBAP gaps appear as one broadcast allocation with id 0.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alloc_id", "owner", "kind", "block_index", "start_ns", "duration_ns"])?;
        for a in &self.sp_allocations {
            for (i, b) in a.blocks.iter().enumerate() {
                w.write_record([
                    a.id.0.to_string(),
                    a.owner.to_string(),
                    "sp".to_string(),
                    i.to_string(),
                    b.start.as_ns().to_string(),
                    b.duration.as_ns().to_string(),
                ])?;
            }
        }
        for (i, g) in self.cbap_gaps.iter().enumerate() {
            w.write_record([
                CBAP_ALLOC_ID.0.to_string(),
                Owner::Broadcast.to_string(),
                "cbap".to_string(),
                i.to_string(),
                g.start.as_ns().to_string(),
                g.duration.as_ns().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// The CBAP gaps of `sched`: the sorted, maximal complement of its SP blocks
/// within `[0, dti_duration)`.
pub fn derive_cbap_gaps(sched: &DtiSchedule, layout: &BeaconIntervalLayout) -> Vec<Block> {
    complement(sched.sp_blocks().copied(), layout.dti_duration())
}

fn complement(blocks: impl Iterator<Item = Block>, dti: SimTime) -> Vec<Block> {
    let mut blocks: Vec<Block> = blocks.filter(|b| b.duration > SimTime::ZERO).collect();
    blocks.sort();
    let mut gaps = Vec::new();
    let mut cursor = SimTime::ZERO;
    for b in blocks {
        if b.start > cursor {
            gaps.push(Block::new(cursor, b.start - cursor));
        }
        cursor = cursor.max(b.end());
    }
    if cursor < dti {
        gaps.push(Block::new(cursor, dti - cursor));
    }
    gaps
}

/// Schedule of the CBAP-only policy: no SPs, the whole DTI is one broadcast CBAP.
pub fn cbap_only_schedule(layout: &BeaconIntervalLayout) -> DtiSchedule {
    DtiSchedule::new(layout)
}
