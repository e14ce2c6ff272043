//! Token-bucket admission for rate-based senders: tokens are bits, refilled
//! continuously at the configured rate up to the burst size.

use crate::SimTime;

#[derive(Debug, Clone)]
pub struct TokenBucket {
    rate_bps: f64,
    burst_bits: f64,
    tokens: f64,
    last_refill: SimTime,
}

/// Outcome of an admission attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admission {
    /// Enough tokens: send now (tokens consumed).
    SendNow,
    /// Not enough tokens: earliest time the packet will fit.
    EarliestAt(SimTime),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("packet of {size} bits can never pass a bucket with burst {burst} bits")]
pub struct OversizedPacket {
    pub size: u64,
    pub burst: f64,
}

impl TokenBucket {
    /// Starts full.
    pub fn new(rate_bps: f64, burst_bits: f64) -> Self {
        assert!(rate_bps > 0.0 && burst_bits > 0.0);
        TokenBucket {
            rate_bps,
            burst_bits,
            tokens: burst_bits,
            last_refill: 0.0,
        }
    }

    fn refill(&mut self, now: SimTime) {
        debug_assert!(now >= self.last_refill);
        self.tokens = (self.tokens + (now - self.last_refill) * self.rate_bps).min(self.burst_bits);
        self.last_refill = now;
    }

    /// Try to admit a packet of `size` bits at time `now`. On `SendNow` the
    /// tokens are consumed; on `EarliestAt` nothing is consumed and the caller
    /// should retry at the returned time.
    pub fn admit(&mut self, size: u64, now: SimTime) -> Result<Admission, OversizedPacket> {
        let bits = size as f64;
        if bits > self.burst_bits {
            return Err(OversizedPacket {
                size,
                burst: self.burst_bits,
            });
        }
        self.refill(now);
        let deficit = bits - self.tokens;
        // Repeated refills leave float residue in `tokens`. When the residual
        // deficit is too small for the wait to advance the clock by even one
        // representable step, a deferral could never make progress, so the
        // deficit is below time resolution and the packet is admitted.
        if deficit <= 0.0 || now + deficit / self.rate_bps <= now {
            self.tokens = (self.tokens - bits).max(0.0);
            Ok(Admission::SendNow)
        } else {
            Ok(Admission::EarliestAt(now + deficit / self.rate_bps))
        }
    }
}
