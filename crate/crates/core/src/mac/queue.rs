use std::collections::VecDeque;

/// A packet waiting in a station's MAC queue. `record` indexes the run's
/// packet record table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueuedPacket {
    pub record: u32,
    pub bytes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted,
    Dropped,
}

/// Byte-bounded FIFO with tail drop.
///
/// A transmission marks the first `n` packets as in flight; they stay in the
/// queue, and count against capacity, until the transmission completes or
/// is aborted.
#[derive(Debug, Clone)]
pub struct TxQueue {
    fifo: VecDeque<QueuedPacket>,
    byte_count: u64,
    capacity_bytes: u64,
    in_flight: usize,
    dropped: u64,
}

impl TxQueue {
    pub fn new(capacity_bytes: u64) -> Self {
        TxQueue { fifo: VecDeque::new(), byte_count: 0, capacity_bytes, in_flight: 0, dropped: 0 }
    }

    pub fn enqueue(&mut self, pkt: QueuedPacket) -> EnqueueOutcome {
        if self.byte_count + u64::from(pkt.bytes) > self.capacity_bytes {
            self.dropped += 1;
            return EnqueueOutcome::Dropped;
        }
        self.byte_count += u64::from(pkt.bytes);
        self.fifo.push_back(pkt);
        EnqueueOutcome::Accepted
    }

    /// Packets not yet handed to a transmission, in FIFO order.
    pub fn waiting(&self) -> impl Iterator<Item = &QueuedPacket> {
        self.fifo.iter().skip(self.in_flight)
    }

    pub fn waiting_len(&self) -> usize {
        self.fifo.len() - self.in_flight
    }

    pub fn has_waiting(&self) -> bool {
        self.waiting_len() > 0
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    /// Queued plus in-flight packets.
    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn byte_count(&self) -> u64 {
        self.byte_count
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity_bytes
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn begin_tx(&mut self, n: usize) {
        assert_eq!(self.in_flight, 0, "transmission already in flight");
        assert!(n <= self.fifo.len(), "batch larger than queue");
        self.in_flight = n;
    }

    /// Removes the in-flight packets (delivered or given up on).
    pub fn complete_tx(&mut self) -> Vec<QueuedPacket> {
        let n = std::mem::take(&mut self.in_flight);
        let out: Vec<QueuedPacket> = self.fifo.drain(..n).collect();
        self.byte_count -= out.iter().map(|p| u64::from(p.bytes)).sum::<u64>();
        out
    }

    /// Returns the in-flight packets to the head of the queue.
    pub fn abort_tx(&mut self) {
        self.in_flight = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pkt(record: u32) -> QueuedPacket {
        QueuedPacket { record, bytes: 1448 }
    }

    #[test]
    fn empty_queue_accepts() {
        let mut q = TxQueue::new(1448);
        assert_eq!(q.enqueue(pkt(0)), EnqueueOutcome::Accepted);
        assert_eq!(q.byte_count(), 1448);
    }

    #[test]
    fn full_queue_drops() {
        let mut q = TxQueue::new(2 * 1448);
        q.enqueue(pkt(0));
        q.enqueue(pkt(1));
        assert_eq!(q.enqueue(pkt(2)), EnqueueOutcome::Dropped);
        assert_eq!(q.dropped(), 1);
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn in_flight_lifecycle() {
        let mut q = TxQueue::new(10 * 1448);
        for i in 0..5 {
            q.enqueue(pkt(i));
        }
        q.begin_tx(3);
        assert_eq!(q.waiting().next().unwrap().record, 3);
        q.abort_tx();
        assert_eq!(q.waiting_len(), 5);
        q.begin_tx(2);
        let done = q.complete_tx();
        assert_eq!(done.iter().map(|p| p.record).collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(q.byte_count(), 3 * 1448);
        assert_eq!(q.waiting().map(|p| p.record).collect::<Vec<_>>(), vec![2, 3, 4]);
    }
}
