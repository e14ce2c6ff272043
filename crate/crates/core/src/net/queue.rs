//! Output-port queue with pluggable service and drop policies plus
//! threshold-based congestion marking.
//!
//! Occupancy counts *waiting* packets only; the packet currently being
//! serialized has left the buffer. All policies are deterministic given the
//! queue's own random stream (used only by random drop).

use std::collections::{BTreeMap, VecDeque};

use super::{ConnId, Packet, PacketKind};
use crate::engine::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServicePolicy {
    /// Serve in global arrival order.
    Fifo,
    /// Cycle over per-connection classes, one packet per non-empty class.
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropPolicy {
    /// Reject the arriving packet.
    DropTail,
    /// Evict the oldest waiting packet; admit the arrival.
    DropHead,
    /// Evict one victim drawn uniformly over waiting packets plus the arrival.
    Random,
}

#[derive(Debug, Clone, Copy)]
pub struct QueueConfig {
    /// Maximum number of waiting packets; `None` = unbounded.
    pub capacity: Option<usize>,
    pub service: ServicePolicy,
    pub drop: DropPolicy,
    /// Set the congestion bit on data packets arriving when occupancy is at or
    /// above this many waiting packets. `None` disables marking.
    pub mark_threshold: Option<usize>,
    /// Ask the owning node to send a choke packet to the victim's source on drop.
    pub choke_on_drop: bool,
}

impl Default for QueueConfig {
    fn default() -> Self {
        QueueConfig {
            capacity: None,
            service: ServicePolicy::Fifo,
            drop: DropPolicy::DropTail,
            mark_threshold: Some(1),
            choke_on_drop: false,
        }
    }
}

/// Result of an enqueue attempt. When a drop occurs the victim is returned to
/// the caller (it may be the arriving packet itself — compare ids).
#[derive(Debug)]
pub enum EnqueueOutcome {
    Accepted,
    Dropped { victim: Packet },
}

enum Store {
    Fifo(VecDeque<(u64, Packet)>),
    RoundRobin {
        /// Per-connection classes in first-seen order. Classes persist once
        /// created so the cursor's cycle stays stable.
        classes: Vec<(ConnId, VecDeque<(u64, Packet)>)>,
        /// Index of the next class to consider.
        cursor: usize,
    },
}

pub struct PortQueue {
    config: QueueConfig,
    store: Store,
    /// Monotone stamp giving every accepted packet its global arrival rank.
    arrival_stamp: u64,
    occupancy: usize,
    occupancy_bits: u64,
    per_conn: BTreeMap<ConnId, usize>,
    rng: Option<RngStream>,
    /// Total packets dropped at this queue (any kind).
    pub drops: u64,
    /// Total data packets that had their congestion bit set here.
    pub marks: u64,
}

impl PortQueue {
    /// `rng` is required when the drop policy is `Random` and unused otherwise.
    pub fn new(config: QueueConfig, rng: Option<RngStream>) -> Self {
        assert!(
            config.drop != DropPolicy::Random || rng.is_some(),
            "random drop policy needs a random stream"
        );
        let store = match config.service {
            ServicePolicy::Fifo => Store::Fifo(VecDeque::new()),
            ServicePolicy::RoundRobin => Store::RoundRobin {
                classes: Vec::new(),
                cursor: 0,
            },
        };
        PortQueue {
            config,
            store,
            arrival_stamp: 0,
            occupancy: 0,
            occupancy_bits: 0,
            per_conn: BTreeMap::new(),
            rng,
            drops: 0,
            marks: 0,
        }
    }

    pub fn config(&self) -> &QueueConfig {
        &self.config
    }

    /// Waiting packets (excludes the packet in service).
    pub fn occupancy(&self) -> usize {
        self.occupancy
    }

    /// Waiting bits.
    pub fn occupancy_bits(&self) -> u64 {
        self.occupancy_bits
    }

    pub fn occupancy_of(&self, conn: ConnId) -> usize {
        self.per_conn.get(&conn).copied().unwrap_or(0)
    }

    /// Attempt to admit `p`. Applies congestion marking (based on occupancy at
    /// arrival) before the admission decision, then resolves any drop per the
    /// configured policy.
    pub fn enqueue(&mut self, mut p: Packet) -> EnqueueOutcome {
        if p.kind == PacketKind::Data && !p.congestion_bit {
            if let Some(th) = self.config.mark_threshold {
                if self.occupancy >= th {
                    p.congestion_bit = true;
                    self.marks += 1;
                }
            }
        }

        let full = self
            .config
            .capacity
            .is_some_and(|cap| self.occupancy >= cap);
        if !full {
            self.push(p);
            return EnqueueOutcome::Accepted;
        }

        match self.config.drop {
            DropPolicy::DropTail => {
                self.drops += 1;
                EnqueueOutcome::Dropped { victim: p }
            }
            DropPolicy::DropHead => {
                let victim = self.remove_nth_oldest(0).expect("full queue has a head");
                self.push(p);
                self.drops += 1;
                EnqueueOutcome::Dropped { victim }
            }
            DropPolicy::Random => {
                // Candidates are the waiting packets in arrival order, then the
                // arrival itself at index `occupancy`.
                let n = self.occupancy + 1;
                let pick = self.rng.as_mut().expect("checked at construction").index(n);
                self.drops += 1;
                if pick == self.occupancy {
                    EnqueueOutcome::Dropped { victim: p }
                } else {
                    let victim = self.remove_nth_oldest(pick).expect("index within occupancy");
                    self.push(p);
                    EnqueueOutcome::Dropped { victim }
                }
            }
        }
    }

    /// Pop the next packet to serialize, honoring the service policy.
    pub fn service_next(&mut self) -> Option<Packet> {
        let popped = match &mut self.store {
            Store::Fifo(q) => q.pop_front(),
            Store::RoundRobin { classes, cursor } => {
                if classes.is_empty() {
                    None
                } else {
                    let len = classes.len();
                    let mut found = None;
                    for off in 0..len {
                        let idx = (*cursor + off) % len;
                        if !classes[idx].1.is_empty() {
                            found = Some(idx);
                            break;
                        }
                    }
                    found.map(|idx| {
                        *cursor = (idx + 1) % len;
                        classes[idx].1.pop_front().expect("non-empty class")
                    })
                }
            }
        };
        popped.map(|(_, p)| self.account_removed(p))
    }

    fn push(&mut self, p: Packet) {
        let stamp = self.arrival_stamp;
        self.arrival_stamp += 1;
        self.occupancy += 1;
        self.occupancy_bits += p.size;
        *self.per_conn.entry(p.conn).or_insert(0) += 1;
        match &mut self.store {
            Store::Fifo(q) => q.push_back((stamp, p)),
            Store::RoundRobin { classes, .. } => {
                match classes.iter_mut().find(|(c, _)| *c == p.conn) {
                    Some((_, q)) => q.push_back((stamp, p)),
                    None => {
                        let conn = p.conn;
                        let mut q = VecDeque::new();
                        q.push_back((stamp, p));
                        classes.push((conn, q));
                    }
                }
            }
        }
    }

    /// Remove the waiting packet with global arrival rank `n` (0 = oldest).
    fn remove_nth_oldest(&mut self, n: usize) -> Option<Packet> {
        let removed = match &mut self.store {
            Store::Fifo(q) => q.remove(n),
            Store::RoundRobin { classes, .. } => {
                // Oldest-first merge across class heads by arrival stamp.
                let mut ranks: Vec<(u64, usize, usize)> = Vec::new();
                for (ci, (_, q)) in classes.iter().enumerate() {
                    for (pi, (stamp, _)) in q.iter().enumerate() {
                        ranks.push((*stamp, ci, pi));
                    }
                }
                ranks.sort_unstable();
                ranks
                    .get(n)
                    .copied()
                    .and_then(|(_, ci, pi)| classes[ci].1.remove(pi))
            }
        };
        removed.map(|(_, p)| self.account_removed(p))
    }

    fn account_removed(&mut self, p: Packet) -> Packet {
        self.occupancy -= 1;
        self.occupancy_bits -= p.size;
        if let Some(c) = self.per_conn.get_mut(&p.conn) {
            *c -= 1;
        }
        p
    }

    /// Drain all waiting packets (end-of-run accounting).
    pub fn drain(&mut self) -> Vec<Packet> {
        let mut out = Vec::with_capacity(self.occupancy);
        while let Some(p) = self.service_next() {
            out.push(p);
        }
        out
    }
}
