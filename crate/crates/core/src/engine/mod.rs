//! Discrete-event engine: a virtual clock plus a pending-event queue with a
//! strict, deterministic total order.
//!
//! Events fire in `(fire_time, insertion seq)` order, so two events scheduled
//! for the same instant fire in the order they were scheduled. The clock never
//! moves backwards, and scheduling into the past is an error, not a silent
//! reorder.

mod rng;

pub use rng::RngStream;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::SimTime;

/// Error returned when a schedule request cannot be honored.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("cannot schedule event at t={at} before current clock t={clock}")]
    InPast { at: SimTime, clock: SimTime },
    #[error("event fire time must be finite, got {0}")]
    NonFinite(f64),
}

/// Opaque handle to a scheduled event, usable for cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Entry<E> {
    time: SimTime,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // Reversed: BinaryHeap is a max-heap, we want the earliest (time, seq) on top.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Pending-event queue with a virtual clock.
///
/// `E` is the caller's event payload; the engine itself is agnostic to what an
/// event means.
pub struct EventQueue<E> {
    clock: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Entry<E>>,
    cancelled: HashSet<u64>,
    processed: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            clock: 0.0,
            next_seq: 0,
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            processed: 0,
        }
    }

    /// Current virtual time in seconds.
    pub fn clock(&self) -> SimTime {
        self.clock
    }

    /// Number of events processed so far (cancelled events are not counted).
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Number of pending (non-cancelled) events.
    pub fn len(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Schedule `payload` to fire at absolute time `at`.
    ///
    /// `at` may equal the current clock (the event fires before any event with
    /// a later time, after already-scheduled events at the same time).
    /// Scheduling in the past is a programming error and fails loudly.
    pub fn schedule(&mut self, at: SimTime, payload: E) -> Result<EventHandle, ScheduleError> {
        if !at.is_finite() {
            return Err(ScheduleError::NonFinite(at));
        }
        if at < self.clock {
            return Err(ScheduleError::InPast {
                at,
                clock: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry {
            time: at,
            seq,
            payload,
        });
        Ok(EventHandle(seq))
    }

    /// Cancel a pending event. Returns true if the event was still pending.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_seq {
            return false;
        }
        // An already-fired (or already-cancelled) seq must not be resurrected:
        // `cancelled` only holds seqs still sitting in the heap.
        if self.heap.iter().any(|e| e.seq == handle.0) && self.cancelled.insert(handle.0) {
            return true;
        }
        false
    }

    /// Pop the next event if it fires at or before `t_end`, advancing the clock
    /// to its fire time. Returns `None` (clock untouched) otherwise.
    pub fn pop_next_before(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        loop {
            let top_time = self.heap.peek()?.time;
            if top_time > t_end {
                return None;
            }
            let entry = self.heap.pop().expect("peeked entry present");
            if self.cancelled.remove(&entry.seq) {
                continue; // tombstone, skip silently
            }
            debug_assert!(entry.time >= self.clock, "event queue went back in time");
            self.clock = entry.time;
            self.processed += 1;
            return Some((entry.time, entry.payload));
        }
    }

    /// Process every event with fire time ≤ `t_end`, in `(time, seq)` order,
    /// then advance the clock to `t_end`. Returns the number of events
    /// processed by this call.
    ///
    /// The handler receives the queue itself so it can schedule follow-up
    /// events; follow-ups landing at or before `t_end` are processed within
    /// the same call.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F) -> Result<u64, ScheduleError>
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        if !t_end.is_finite() {
            return Err(ScheduleError::NonFinite(t_end));
        }
        if t_end < self.clock {
            return Err(ScheduleError::InPast {
                at: t_end,
                clock: self.clock,
            });
        }
        let before = self.processed;
        while let Some((t, payload)) = self.pop_next_before(t_end) {
            handler(self, t, payload);
        }
        self.clock = t_end;
        Ok(self.processed - before)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn events_fire_in_time_order() {
        let mut q = EventQueue::new();
        q.schedule(2.0, "b").unwrap();
        q.schedule(1.0, "a").unwrap();
        q.schedule(3.0, "c").unwrap();
        let mut seen = Vec::new();
        let n = q.run_until(10.0, |_, t, e| seen.push((t, e))).unwrap();
        assert_eq!(n, 3);
        assert_eq!(seen, vec![(1.0, "a"), (2.0, "b"), (3.0, "c")]);
        assert_eq!(q.clock(), 10.0);
    }

    #[test]
    fn same_time_ties_break_by_insertion_order() {
        let mut q = EventQueue::new();
        q.schedule(2.0, "first").unwrap();
        q.schedule(2.0, "second").unwrap();
        q.schedule(1.0, "early").unwrap();
        let mut seen = Vec::new();
        q.run_until(2.0, |_, _, e| seen.push(e)).unwrap();
        assert_eq!(seen, vec!["early", "first", "second"]);
    }

    #[test]
    fn schedule_at_current_clock_fires_before_later_events() {
        let mut q = EventQueue::new();
        q.schedule(5.0, "later").unwrap();
        q.pop_next_before(10.0); // clock = 5.0
        assert_eq!(q.clock(), 5.0);
        q.schedule(5.0, "now").unwrap();
        q.schedule(6.0, "after").unwrap();
        let (t, e) = q.pop_next_before(10.0).unwrap();
        assert_eq!((t, e), (5.0, "now"));
    }

    #[test]
    fn scheduling_in_the_past_fails() {
        let mut q = EventQueue::new();
        q.schedule(5.0, ()).unwrap();
        q.pop_next_before(10.0);
        let err = q.schedule(4.0, ()).unwrap_err();
        assert!(matches!(err, ScheduleError::InPast { .. }));
        assert!(matches!(
            q.schedule(f64::NAN, ()),
            Err(ScheduleError::NonFinite(_))
        ));
    }

    #[test]
    fn run_until_on_empty_queue_advances_clock() {
        let mut q: EventQueue<()> = EventQueue::new();
        let n = q.run_until(10.0, |_, _, _| ()).unwrap();
        assert_eq!(n, 0);
        assert_eq!(q.clock(), 10.0);
    }

    #[test]
    fn handler_scheduled_events_inside_window_are_processed() {
        let mut q = EventQueue::new();
        q.schedule(1.0, 1u32).unwrap();
        let mut seen = Vec::new();
        q.run_until(10.0, |q, t, v| {
            seen.push((t, v));
            if v < 3 {
                q.schedule(t + 1.0, v + 1).unwrap();
            }
        })
        .unwrap();
        assert_eq!(seen, vec![(1.0, 1), (2.0, 2), (3.0, 3)]);
    }

    #[test]
    fn events_beyond_window_stay_pending() {
        let mut q = EventQueue::new();
        q.schedule(1.0, "in").unwrap();
        q.schedule(11.0, "out").unwrap();
        let n = q.run_until(10.0, |_, _, _| ()).unwrap();
        assert_eq!(n, 1);
        assert_eq!(q.len(), 1);
        assert_eq!(q.clock(), 10.0);
    }

    #[test]
    fn cancelled_events_do_not_fire_and_are_not_counted() {
        let mut q = EventQueue::new();
        let keep = q.schedule(1.0, "keep").unwrap();
        let drop = q.schedule(2.0, "drop").unwrap();
        assert!(q.cancel(drop));
        assert!(!q.cancel(drop), "second cancel is a no-op");
        let _ = keep;
        let mut seen = Vec::new();
        let n = q.run_until(10.0, |_, _, e| seen.push(e)).unwrap();
        assert_eq!(n, 1);
        assert_eq!(seen, vec!["keep"]);
        // A fired event's handle cannot be cancelled retroactively.
        assert!(!q.cancel(keep));
    }

    #[test]
    fn zero_duration_events_fire_at_the_same_instant_in_order() {
        // A zero-size transmission completes "now"; same-call scheduling at the
        // current clock must be legal and ordered after existing same-time events.
        let mut q = EventQueue::new();
        q.schedule(1.0, "a").unwrap();
        let mut seen = Vec::new();
        q.run_until(1.0, |q, t, e| {
            seen.push(e);
            if e == "a" {
                q.schedule(t, "follow-up").unwrap();
            }
        })
        .unwrap();
        assert_eq!(seen, vec!["a", "follow-up"]);
    }
}
