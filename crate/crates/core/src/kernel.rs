//! Discrete-event engine: a monotonic clock and an event queue ordered by
//! `(fire_at, seq)`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::time::SimTime;

/// Identifies the simulated entity an event is addressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone)]
pub struct Event<P> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub target: EntityId,
    pub payload: P,
}

/// Returned by [`EventQueue::schedule`]; pass to [`EventQueue::cancel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("event scheduled in the past: fire_at {fire_at} < clock {now}")]
    PastEvent { fire_at: SimTime, now: SimTime },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStats {
    pub events_processed: u64,
    pub final_clock: SimTime,
}

struct Entry<P>(Event<P>);

impl<P> PartialEq for Entry<P> {
    fn eq(&self, other: &Self) -> bool {
        self.0.seq == other.0.seq
    }
}

impl<P> Eq for Entry<P> {}

impl<P> PartialOrd for Entry<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Entry<P> {
    // BinaryHeap is a max-heap; reverse so the earliest (fire_at, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.0.fire_at, other.0.seq).cmp(&(self.0.fire_at, self.0.seq))
    }
}

pub struct EventQueue<P> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Entry<P>>,
    cancelled: HashSet<u64>,
    processed: u64,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        EventQueue {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            processed: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    pub fn schedule(
        &mut self,
        fire_at: SimTime,
        target: EntityId,
        payload: P,
    ) -> Result<EventHandle, KernelError> {
        if fire_at < self.now {
            return Err(KernelError::PastEvent { fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry(Event { fire_at, seq, target, payload }));
        Ok(EventHandle(seq))
    }

    /// Cancelling an event that already fired is a no-op.
    pub fn cancel(&mut self, handle: EventHandle) {
        if handle.0 < self.next_seq && self.heap.iter().any(|e| e.0.seq == handle.0) {
            self.cancelled.insert(handle.0);
        }
    }

    /// Pops the next live event with `fire_at <= end`, advancing the clock to it.
    pub fn pop_until(&mut self, end: SimTime) -> Option<Event<P>> {
        while let Some(top) = self.heap.peek() {
            if top.0.fire_at > end {
                return None;
            }
            let Entry(ev) = self.heap.pop().expect("peeked");
            if self.cancelled.remove(&ev.seq) {
                continue;
            }
            debug_assert!(ev.fire_at >= self.now);
            self.now = ev.fire_at;
            self.processed += 1;
            return Some(ev);
        }
        None
    }

    /// Processes every event with `fire_at <= end` in `(fire_at, seq)` order,
    /// then sets the clock to `end`.
    pub fn run_until<F>(&mut self, end: SimTime, mut handler: F) -> RunStats
    where
        F: FnMut(&mut EventQueue<P>, Event<P>),
    {
        let start = self.processed;
        while let Some(ev) = self.pop_until(end) {
            handler(self, ev);
        }
        if end > self.now {
            self.now = end;
        }
        RunStats { events_processed: self.processed - start, final_clock: self.now }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: EntityId = EntityId(0);

    #[test]
    fn schedule_at_now_fires_first() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_ns(5), E, "late").unwrap();
        q.schedule(SimTime::ZERO, E, "now").unwrap();
        assert_eq!(q.pop_until(SimTime::MAX).unwrap().payload, "now");
    }

    #[test]
    fn ties_break_by_insertion() {
        let mut q = EventQueue::new();
        let t = SimTime::from_secs(2);
        q.schedule(t, E, 'b').unwrap();
        q.schedule(SimTime::from_secs(1), E, 'a').unwrap();
        q.schedule(t, E, 'c').unwrap();
        let mut seen = Vec::new();
        let stats = q.run_until(SimTime::from_secs(10), |_, ev| seen.push(ev.payload));
        assert_eq!(seen, vec!['a', 'b', 'c']);
        assert_eq!(stats.events_processed, 3);
        assert_eq!(stats.final_clock, SimTime::from_secs(10));
    }

    #[test]
    fn past_event_is_rejected() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::from_ns(10), E, ()).unwrap();
        q.pop_until(SimTime::MAX);
        let err = q.schedule(SimTime::from_ns(9), E, ()).unwrap_err();
        assert_eq!(err, KernelError::PastEvent { fire_at: SimTime::from_ns(9), now: SimTime::from_ns(10) });
    }

    #[test]
    fn empty_run_advances_clock() {
        let mut q: EventQueue<()> = EventQueue::new();
        let stats = q.run_until(SimTime::from_secs(10), |_, _| {});
        assert_eq!(stats, RunStats { events_processed: 0, final_clock: SimTime::from_secs(10) });
    }

    #[test]
    fn cancelled_events_are_skipped() {
        let mut q = EventQueue::new();
        let h = q.schedule(SimTime::from_ns(1), E, 1).unwrap();
        q.schedule(SimTime::from_ns(2), E, 2).unwrap();
        q.cancel(h);
        assert_eq!(q.pending(), 1);
        assert_eq!(q.pop_until(SimTime::MAX).unwrap().payload, 2);
        assert!(q.pop_until(SimTime::MAX).is_none());
    }

    #[test]
    fn handler_may_schedule_followups() {
        let mut q = EventQueue::new();
        q.schedule(SimTime::ZERO, E, 0u32).unwrap();
        let mut last = SimTime::ZERO;
        let stats = q.run_until(SimTime::from_ns(100), |q, ev| {
            assert!(ev.fire_at >= last);
            last = ev.fire_at;
            if ev.payload < 9 {
                q.schedule(ev.fire_at + SimTime::from_ns(10), E, ev.payload + 1).unwrap();
            }
        });
        assert_eq!(stats.events_processed, 10);
    }
}
