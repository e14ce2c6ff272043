//! Receive-side transport: cumulative ack generation with configurable ack
//! frequency, duplicate re-acking, and cached vs. discarded out-of-order
//! handling. The receiver owns no timers; acks are driven purely by arrivals.

use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverMode {
    /// Buffer out-of-order packets; a late gap-filler releases them at once.
    Cache,
    /// Drop out-of-order packets; they must be retransmitted in order.
    Discard,
}

/// What happened to an arriving data packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Acceptance {
    /// In-order (directly or by draining the cache); `new_seqs` sequence
    /// numbers became deliverable, ending at the new cumulative ack.
    InOrder { new_seqs: u64 },
    /// Out-of-order, stored for later.
    Cached,
    /// Out-of-order, discarded (discard mode), or already buffered.
    Discarded,
    /// Sequence number at or below the cumulative ack: duplicate.
    Duplicate,
}

/// Whether the arrival must be acknowledged right away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AckDirective {
    pub send_ack: bool,
    /// Cumulative ack number to carry.
    pub ack_num: u64,
    /// OR of congestion bits seen since the previous ack.
    pub echoed_bit: bool,
}

/// Per-connection receive state.
#[derive(Debug, Clone)]
pub struct ReceiverState {
    mode: ReceiverMode,
    /// Emit an ack every `ack_every`-th deliverable arrival (1 = every packet).
    ack_every: u64,
    cum_ack: u64,
    buffered: BTreeSet<u64>,
    deliverable_count: u64,
    pending_bit: bool,
}

impl ReceiverState {
    pub fn new(mode: ReceiverMode, ack_every: u64) -> Self {
        assert!(ack_every >= 1);
        ReceiverState {
            mode,
            ack_every,
            cum_ack: 0,
            buffered: BTreeSet::new(),
            deliverable_count: 0,
            pending_bit: false,
        }
    }

    /// Highest in-order sequence number delivered so far (0 = none).
    pub fn cum_ack(&self) -> u64 {
        self.cum_ack
    }

    pub fn buffered_count(&self) -> usize {
        self.buffered.len()
    }

    /// Process an arriving data packet.
    ///
    /// Rules: an ack is emitted on every `ack_every`-th deliverable arrival and
    /// immediately on any out-of-order or duplicate arrival (the latter two as
    /// duplicate acks carrying the unchanged cumulative number).
    pub fn on_data(&mut self, seq: u64, congestion_bit: bool) -> (Acceptance, AckDirective) {
        self.pending_bit |= congestion_bit;
        let acceptance = if seq <= self.cum_ack {
            Acceptance::Duplicate
        } else if seq == self.cum_ack + 1 {
            self.cum_ack = seq;
            let mut new_seqs = 1;
            while self.buffered.remove(&(self.cum_ack + 1)) {
                self.cum_ack += 1;
                new_seqs += 1;
            }
            self.deliverable_count += 1;
            Acceptance::InOrder { new_seqs }
        } else {
            match self.mode {
                ReceiverMode::Cache => {
                    if self.buffered.insert(seq) {
                        Acceptance::Cached
                    } else {
                        Acceptance::Discarded // duplicate of a buffered packet
                    }
                }
                ReceiverMode::Discard => Acceptance::Discarded,
            }
        };

        let send_ack = match acceptance {
            Acceptance::InOrder { .. } => {
                if self.deliverable_count >= self.ack_every {
                    self.deliverable_count = 0;
                    true
                } else {
                    false
                }
            }
            // Out-of-order and duplicate arrivals are re-acked immediately so
            // the sender learns the receiver's state without waiting.
            Acceptance::Cached | Acceptance::Discarded | Acceptance::Duplicate => true,
        };

        let directive = AckDirective {
            send_ack,
            ack_num: self.cum_ack,
            echoed_bit: if send_ack { self.take_bit() } else { false },
        };
        (acceptance, directive)
    }

    fn take_bit(&mut self) -> bool {
        std::mem::take(&mut self.pending_bit)
    }
}
