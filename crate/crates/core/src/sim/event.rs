//! Discrete-event queue with deterministic (time, seq) ordering.
//!
//! Simultaneous events pop in insertion order (FIFO), so the full event
//! sequence is a pure function of the scenario config and seed.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::ledger::{ModuleId, TxnId};
use crate::protocol::Stage;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    GenerationAttempt {
        link_index: usize,
    },
    TransactionArrival {
        /// Explicit participants, or None to draw from the workload stream.
        participants: Option<Vec<ModuleId>>,
        retries_left: u32,
    },
    StageComplete {
        txn: TxnId,
        stage: Stage,
    },
    ExpireSweep,
    MetricsSnapshot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time_ns: u64,
    pub seq: u64,
    pub payload: Payload,
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time_ns, self.seq).cmp(&(other.time_ns, other.seq))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time_ns: u64, payload: Payload) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event { time_ns, seq, payload }));
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_by_time_then_insertion_order() {
        let mut q = EventQueue::new();
        q.push(50, Payload::ExpireSweep);
        q.push(10, Payload::MetricsSnapshot);
        q.push(10, Payload::ExpireSweep);
        q.push(30, Payload::MetricsSnapshot);

        let order: Vec<(u64, u64)> = std::iter::from_fn(|| q.pop())
            .map(|e| (e.time_ns, e.seq))
            .collect();
        assert_eq!(order, vec![(10, 1), (10, 2), (30, 3), (50, 0)]);
    }
}
