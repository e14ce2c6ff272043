//! Send-side transport: outstanding-packet tracking, cumulative-ack
//! processing with loss-safe round-trip sampling, and the per-connection
//! retransmission timer.
//!
//! One timer per connection: it always belongs to the lowest outstanding
//! sequence number, and its expiry is that packet's *last transmission time*
//! plus the current RTO. When an ack advances, the timer is re-pointed at the
//! new lowest outstanding packet. An expiry computed from an old transmission
//! can therefore land in the past, which fires immediately — that is what lets
//! a naive fixed timer keep retransmitting packets that are merely queued, not
//! lost.

use std::collections::BTreeMap;

use super::rtt::RttEstimator;
use super::TokenBucket;
use crate::SimTime;

/// Standard ceiling on the adaptive policy's exponential backoff multiplier.
pub const DEFAULT_BACKOFF_CAP: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendMode {
    /// New sends admitted while outstanding < floor(window).
    Window,
    /// New sends admitted by a token bucket (outstanding still capped by floor(window)).
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetransmitPolicy {
    /// On timeout, resend every outstanding packet from the expired seq up.
    GoBackN,
    /// On timeout, resend only the expired (lowest outstanding) packet.
    FirstOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RtoPolicy {
    /// Constant timeout, no adaptation, no backoff.
    Fixed(SimTime),
    /// Estimator-driven (`srtt + k·rttvar`), `initial` before the first valid
    /// sample; doubled per timeout until the next valid sample, multiplier
    /// capped at `backoff_cap`.
    Adaptive { initial: SimTime, backoff_cap: f64 },
}

#[derive(Debug, Clone)]
struct Outstanding {
    first_sent: SimTime,
    last_sent: SimTime,
    retransmitted: bool,
}

/// Result of processing one cumulative ack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckResult {
    /// Packets newly acknowledged (0 for a duplicate ack).
    pub newly_acked: u64,
    /// Valid round-trip sample, taken from the highest seq in the batch (the
    /// one whose arrival triggered the ack) — but only when no seq in the
    /// batch was ever retransmitted. A batch with a retransmission is
    /// loss-ambiguous end to end: its clean packets sat cached behind the
    /// hole, so their timings measure ack withholding, not the path.
    pub rtt_sample: Option<SimTime>,
    pub duplicate: bool,
}

/// Result of a timer expiry.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeoutAction {
    /// Seqs to resend, in order. The caller drives each through its send path
    /// (pacing included) and calls [`SenderState::mark_retransmitted`] at the
    /// actual transmission instant.
    pub resend: Vec<u64>,
    /// True if the timer was stale (seq already acked); nothing to do.
    pub stale: bool,
}

#[derive(Debug)]
pub struct SenderState {
    pub mode: SendMode,
    pub retransmit: RetransmitPolicy,
    rto_policy: RtoPolicy,
    pub bucket: Option<TokenBucket>,
    next_seq: u64,
    highest_acked: u64,
    outstanding: BTreeMap<u64, Outstanding>,
    pub estimator: RttEstimator,
    backoff: f64,
    /// Duplicate acks seen (diagnostic).
    pub dup_acks: u64,
}

impl SenderState {
    pub fn new(mode: SendMode, retransmit: RetransmitPolicy, rto_policy: RtoPolicy) -> Self {
        SenderState {
            mode,
            retransmit,
            rto_policy,
            bucket: None,
            next_seq: 1,
            highest_acked: 0,
            outstanding: BTreeMap::new(),
            estimator: RttEstimator::default(),
            backoff: 1.0,
            dup_acks: 0,
        }
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn highest_acked(&self) -> u64 {
        self.highest_acked
    }

    pub fn outstanding_len(&self) -> usize {
        self.outstanding.len()
    }

    pub fn lowest_outstanding(&self) -> Option<u64> {
        self.outstanding.keys().next().copied()
    }

    /// New-send budget under a window of `floor(window)` packets.
    pub fn permits(&self, window_floor: u64) -> u64 {
        window_floor.saturating_sub(self.outstanding.len() as u64)
    }

    /// Allocate the next sequence number and start tracking it.
    pub fn register_send(&mut self, now: SimTime) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.outstanding.insert(
            seq,
            Outstanding {
                first_sent: now,
                last_sent: now,
                retransmitted: false,
            },
        );
        seq
    }

    /// Current effective retransmission timeout.
    pub fn rto(&self) -> SimTime {
        match self.rto_policy {
            RtoPolicy::Fixed(v) => v,
            RtoPolicy::Adaptive { initial, .. } => {
                self.estimator.rto().unwrap_or(initial) * self.backoff
            }
        }
    }

    pub fn backoff(&self) -> f64 {
        self.backoff
    }

    /// The seq the connection's single timer should watch, and its expiry:
    /// the lowest outstanding packet's last transmission time plus the RTO.
    pub fn timer_target(&self) -> Option<(u64, SimTime)> {
        self.outstanding
            .iter()
            .next()
            .map(|(&seq, o)| (seq, o.last_sent + self.rto()))
    }

    /// Process a cumulative ack for everything up to `ack_num`.
    pub fn on_ack(&mut self, ack_num: u64, now: SimTime) -> AckResult {
        if ack_num <= self.highest_acked {
            self.dup_acks += 1;
            return AckResult {
                newly_acked: 0,
                rtt_sample: None,
                duplicate: true,
            };
        }
        let mut newly_acked = 0;
        let mut sample = None;
        let mut batch_has_retx = false;
        let acked: Vec<u64> = self
            .outstanding
            .range(..=ack_num)
            .map(|(&s, _)| s)
            .collect();
        for seq in acked {
            let o = self.outstanding.remove(&seq).expect("listed above");
            newly_acked += 1;
            if o.retransmitted {
                batch_has_retx = true;
            } else {
                // Highest seq wins: it is the packet whose arrival triggered
                // this ack, so its timing is the freshest round trip.
                sample = Some(now - o.first_sent);
            }
        }
        self.highest_acked = ack_num;
        if batch_has_retx {
            sample = None;
        }
        // The backed-off RTO is kept until a clean sample confirms the new
        // round trip; resetting on mere forward progress would point the
        // timer below the true delay for the whole recovery.
        if let Some(s) = sample {
            if self.estimator.update(s).is_ok() {
                self.backoff = 1.0;
            } else {
                sample = None;
            }
        }
        AckResult {
            newly_acked,
            rtt_sample: sample,
            duplicate: false,
        }
    }

    /// Handle the timer expiring for `seq`. Stale timers (seq already acked)
    /// are ignored. Does not touch per-seq send times: those change only when
    /// the retransmission actually leaves, via [`Self::mark_retransmitted`].
    pub fn on_timeout(&mut self, seq: u64) -> TimeoutAction {
        if seq <= self.highest_acked || !self.outstanding.contains_key(&seq) {
            return TimeoutAction {
                resend: Vec::new(),
                stale: true,
            };
        }
        if let RtoPolicy::Adaptive { backoff_cap, .. } = self.rto_policy {
            self.backoff = (self.backoff * 2.0).min(backoff_cap);
        }
        let resend: Vec<u64> = match self.retransmit {
            RetransmitPolicy::GoBackN => self
                .outstanding
                .range(seq..)
                .map(|(&s, _)| s)
                .collect(),
            RetransmitPolicy::FirstOnly => vec![seq],
        };
        TimeoutAction {
            resend,
            stale: false,
        }
    }

    /// Record that `seq` was retransmitted at `now`. Returns the packet's
    /// original first-send time, or `None` if the seq is no longer
    /// outstanding (acked while the resend was waiting its turn), in which
    /// case the resend should be abandoned.
    pub fn mark_retransmitted(&mut self, seq: u64, now: SimTime) -> Option<SimTime> {
        let o = self.outstanding.get_mut(&seq)?;
        o.retransmitted = true;
        o.last_sent = now;
        Some(o.first_sent)
    }
}
