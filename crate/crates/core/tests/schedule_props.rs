use proptest::prelude::*;

use spsim_core::schedule::{
    admit_periodic, derive_cbap_gaps, reduce_allocation, AddtsRequest, AddtsResponse, BeaconIntervalLayout, Block,
    DtiSchedule, StaId,
};
use spsim_core::time::SimTime;

/// 0.1 ms grid unit.
const UNIT: u64 = 100_000;

fn units(n: u64) -> SimTime {
    SimTime::from_ns(n * UNIT)
}

/// BI 24 ms with a 4 ms BHI: a 20 ms DTI. Divisors 1..=5 give periods on the grid.
fn small_layout() -> BeaconIntervalLayout {
    BeaconIntervalLayout::new(units(240), units(40)).unwrap()
}

/// Exhaustive placement on the grid: smallest start whose p blocks fit in the
/// DTI and miss every block already placed.
fn brute_force(placed: &[(u64, u64)], dti: u64, bi: u64, p: u64, d: u64) -> Option<u64> {
    if !bi.is_multiple_of(p) || d > bi / p {
        return None;
    }
    let t = bi / p;
    (0..=dti).find(|&s| {
        (0..p).all(|i| {
            let (a, b) = (s + i * t, s + i * t + d);
            b <= dti && placed.iter().all(|&(x, y)| b <= x || y <= a)
        })
    })
}

fn assert_partition(sched: &DtiSchedule) {
    let mut pieces: Vec<Block> = sched.sp_blocks().copied().chain(sched.cbap_gaps().iter().copied()).collect();
    pieces.retain(|b| b.duration > SimTime::ZERO);
    pieces.sort_by_key(|b| b.start);
    let mut at = SimTime::ZERO;
    for b in &pieces {
        assert_eq!(b.start, at, "hole or overlap at {at}");
        at = b.end();
    }
    assert_eq!(at, sched.dti_duration());
    for w in sched.cbap_gaps().windows(2) {
        assert!(w[0].end() < w[1].start, "adjacent gaps not merged");
    }
}

fn requests() -> impl Strategy<Value = Vec<(u32, u64)>> {
    prop::collection::vec((1u32..=5, 1u64..=120), 1..=6)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, ..ProptestConfig::default() })]

    #[test]
    fn greedy_matches_exhaustive_search(reqs in requests()) {
        let layout = small_layout();
        let mut sched = DtiSchedule::new(&layout);
        let mut placed: Vec<(u64, u64)> = Vec::new();
        for (k, &(p, d)) in reqs.iter().enumerate() {
            let expected = brute_force(&placed, 200, 240, u64::from(p), d);
            let got = admit_periodic(&AddtsRequest::fixed(StaId(k as u32), p, units(d)), &mut sched, &layout, SimTime::ZERO);
            match (got, expected) {
                (AddtsResponse::Accepted { first_block_start, .. }, Some(s)) => {
                    prop_assert_eq!(first_block_start, units(s));
                    let t = 240 / u64::from(p);
                    placed.extend((0..u64::from(p)).map(|i| (s + i * t, s + i * t + d)));
                }
                (AddtsResponse::Rejected { .. }, None) => {}
                (g, e) => prop_assert!(false, "request {k}: got {g:?}, oracle {e:?}"),
            }
        }
    }

    #[test]
    fn geometry_and_partition_hold(reqs in requests(), cuts in prop::collection::vec((0usize..6, 1u64..=120), 0..4)) {
        let layout = small_layout();
        let mut sched = DtiSchedule::new(&layout);
        for (k, &(p, d)) in reqs.iter().enumerate() {
            admit_periodic(&AddtsRequest::fixed(StaId(k as u32), p, units(d)), &mut sched, &layout, SimTime::ZERO);
        }
        let before: Vec<Vec<SimTime>> =
            sched.sp_allocations().iter().map(|a| a.blocks.iter().map(|b| b.start).collect()).collect();
        for (idx, d) in cuts {
            if let Some(a) = sched.sp_allocations().get(idx) {
                let id = a.id;
                let cur = a.blocks[0].duration;
                let res = reduce_allocation(id, units(d), &mut sched);
                prop_assert_eq!(res.is_ok(), units(d) <= cur);
            }
        }
        // starts never move
        let after: Vec<Vec<SimTime>> =
            sched.sp_allocations().iter().map(|a| a.blocks.iter().map(|b| b.start).collect()).collect();
        prop_assert_eq!(before, after);

        let blocks: Vec<Block> = sched.sp_blocks().copied().collect();
        for (i, a) in blocks.iter().enumerate() {
            prop_assert!(a.end() <= sched.dti_duration());
            for b in &blocks[i + 1..] {
                prop_assert!(!a.overlaps(b), "{a:?} overlaps {b:?}");
            }
        }
        for a in sched.sp_allocations() {
            let p = (240 * UNIT) / a.period.as_ns();
            prop_assert_eq!(a.blocks.len() as u64, p);
            for w in a.blocks.windows(2) {
                prop_assert_eq!(w[1].start - w[0].start, a.period);
            }
        }
        assert_partition(&sched);
        prop_assert_eq!(derive_cbap_gaps(&sched, &layout), sched.cbap_gaps().to_vec());
    }
}

#[test]
fn five_of_six_fit_the_default_dti() {
    let layout = BeaconIntervalLayout::default();
    let mut sched = DtiSchedule::new(&layout);
    let starts: Vec<Option<SimTime>> = (0..6)
        .map(|k| match admit_periodic(&AddtsRequest::fixed(StaId(k), 1, SimTime::from_ms(18)), &mut sched, &layout, SimTime::ZERO) {
            AddtsResponse::Accepted { first_block_start, .. } => Some(first_block_start),
            AddtsResponse::Rejected { .. } => None,
        })
        .collect();
    let expected: Vec<Option<SimTime>> =
        (0..5).map(|k| Some(SimTime::from_ms(18 * k))).chain(std::iter::once(None)).collect();
    assert_eq!(starts, expected);
}

#[test]
fn quarter_period_gaps() {
    let layout = BeaconIntervalLayout::default();
    let mut sched = DtiSchedule::new(&layout);
    admit_periodic(&AddtsRequest::fixed(StaId(0), 4, SimTime::from_ms(5)), &mut sched, &layout, SimTime::ZERO);
    let us = |x: u64| SimTime::from_us(x);
    let gaps: Vec<(SimTime, SimTime)> = sched.cbap_gaps().iter().map(|g| (g.start, g.end())).collect();
    assert_eq!(
        gaps,
        vec![
            (us(5_000), us(25_600)),
            (us(30_600), us(51_200)),
            (us(56_200), us(76_800)),
            (us(81_800), us(100_400)),
        ]
    );
}
