//! Store-and-forward network model: packets, links, and output-port queues.
//!
//! A router is modeled as a set of output ports; each port owns one link and
//! one [`PortQueue`]. A packet is fully received before it is forwarded, each
//! link serializes one packet at a time (`size / bandwidth` seconds), and
//! propagation delay is added after serialization completes.

mod queue;

pub use queue::{DropPolicy, EnqueueOutcome, PortQueue, QueueConfig, ServicePolicy};

use crate::SimTime;

/// Index of a node in the simulation's node table.
pub type NodeId = usize;
/// Index of a connection in the simulation's connection table.
pub type ConnId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    /// Payload-bearing packet, subject to congestion marking.
    Data,
    /// Cumulative acknowledgment, carrying `ack_num` and an echoed congestion bit.
    Ack,
    /// Router-originated "slow down" notice sent to a connection's source when
    /// one of that connection's packets is dropped. Fire-and-forget.
    Choke,
}

impl PacketKind {
    pub fn label(&self) -> &'static str {
        match self {
            PacketKind::Data => "data",
            PacketKind::Ack => "ack",
            PacketKind::Choke => "choke",
        }
    }
}

/// One packet instance in flight. A retransmission is a distinct instance
/// (fresh `id`, same `conn`/`seq`) so conservation audits can account for
/// every copy separately.
#[derive(Debug, Clone)]
pub struct Packet {
    /// Globally unique per instance.
    pub id: u64,
    pub kind: PacketKind,
    pub conn: ConnId,
    /// Data: per-connection sequence number (1-based).
    /// Ack: the cumulative ack number. Choke: seq of the dropped packet.
    pub seq: u64,
    /// Size on the wire, in bits. Zero is legal for control packets.
    pub size: u64,
    pub src: NodeId,
    pub dst: NodeId,
    /// First time this `seq` was ever sent (copied across retransmissions).
    pub first_sent_at: SimTime,
    /// Time this instance was sent.
    pub sent_at: SimTime,
    /// True if this instance is a retransmission.
    pub retransmission: bool,
    /// Congestion bit, set by queues whose occupancy is at/above threshold.
    pub congestion_bit: bool,
    /// Ack only: OR of congestion bits the receiver saw since its last ack.
    pub echoed_bit: bool,
    /// Choke only: the node that dropped the packet.
    pub congested_node: Option<NodeId>,
}

/// A unidirectional link: bandwidth in bits/s plus propagation delay in seconds.
#[derive(Debug, Clone, Copy)]
pub struct Link {
    pub bandwidth_bps: f64,
    pub prop_delay_s: f64,
}

impl Link {
    /// Serialization time for a packet of `size_bits`: `size / bandwidth`.
    pub fn transmission_time(&self, size_bits: u64) -> SimTime {
        size_bits as f64 / self.bandwidth_bps
    }
}
