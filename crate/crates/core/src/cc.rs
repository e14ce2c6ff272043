//! Window-based congestion control schemes.
//!
//! Every scheme is a pure decision rule over a real-valued window
//! `1 ≤ w ≤ max`, driven by acks, timeouts, choke notices, echoed congestion
//! bits, and smoothed delay. The sender uses `floor(window)` as its
//! outstanding-packet limit. All scheme parameters are dimensionless counts or
//! ratios — none of them is a time, so a scheme tuned on one network needs no
//! re-tuning on a faster one.
//!
//! Shared discipline: a scheme adjusts at most once per `floor(window)`
//! acknowledged packets (plus one adjustment per timeout or choke), keeping the
//! control frequency tied to the feedback frequency.

use crate::SimTime;

/// Which decision rule drives the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Fixed window; no reaction to anything.
    Static,
    /// Timeout ⇒ window := 1; growth +1 per floor(window) acks (parabolic ramp).
    Cute,
    /// Timeout ⇒ window := 1; growth +1 per `acks_per_increase` acks (linear ramp).
    Linear,
    /// Timeout ⇒ ssthresh := max(2, window/2), window := 1; +1 per ack below
    /// ssthresh, +1 per floor(window) acks at or above it.
    SlowStart,
    /// Per floor(window) acked packets: if ≥ `set_fraction` of their echoed
    /// bits were set, window ×= `decrease_factor`, else window += 1.
    BinaryFeedback,
    /// Per floor(window) acks: if srtt/rtt_min > `delay_ratio`, window ×=
    /// `decrease_factor`, else window += 1.
    DelayBased,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Static => "static",
            Scheme::Cute => "cute",
            Scheme::Linear => "linear",
            Scheme::SlowStart => "slowstart",
            Scheme::BinaryFeedback => "binary",
            Scheme::DelayBased => "delay",
        }
    }
}

/// Dimensionless scheme parameters (counts and ratios only, by design).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    /// Linear scheme: acks per +1 window.
    pub acks_per_increase: u64,
    /// Multiplicative decrease for binary-feedback and delay-based schemes.
    pub decrease_factor: f64,
    /// Binary feedback: fraction of set bits at/above which to decrease.
    pub set_fraction: f64,
    /// Delay-based: srtt/rtt_min ratio above which to decrease.
    pub delay_ratio: f64,
    /// Choke response: multiplier applied to the window.
    pub choke_factor: f64,
    /// Upper window clamp.
    pub max_window: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams {
            acks_per_increase: 8,
            decrease_factor: 0.875,
            set_fraction: 0.5,
            delay_ratio: 1.5,
            choke_factor: 0.5,
            max_window: 1e9,
        }
    }
}

/// Units of every scenario-settable scheme parameter. Only counts and ratios —
/// keeping this table free of seconds is asserted by test, so no scheme can
/// quietly grow a network-specific time constant.
pub const SCHEME_PARAM_UNITS: &[(&str, &str)] = &[
    ("window", "packets"),
    ("max_window", "packets"),
    ("acks_per_increase", "packets"),
    ("decrease_factor", "ratio"),
    ("set_fraction", "ratio"),
    ("delay_ratio", "ratio"),
    ("choke_factor", "ratio"),
];

/// Window controller: one per connection.
#[derive(Debug, Clone)]
pub struct Controller {
    scheme: Scheme,
    params: SchemeParams,
    window: f64,
    ssthresh: f64,
    /// Acks accumulated toward the next once-per-window adjustment.
    ack_credit: u64,
    /// Binary feedback: bits seen/set in the current window of acks.
    bits_seen: u64,
    bits_set: u64,
    /// Delay-based: smallest valid round-trip sample seen.
    rtt_min: Option<SimTime>,
    /// Choke latch: acks remaining before another choke may be honored.
    choke_cooldown: u64,
    /// Audit counters.
    adjustments: u64,
    min_floor_window: u64,
}

impl Controller {
    /// `initial_window` is the static window for `Scheme::Static` and the
    /// starting window elsewhere (adaptive schemes conventionally start at 1).
    pub fn new(scheme: Scheme, initial_window: f64, params: SchemeParams) -> Self {
        assert!(initial_window >= 1.0 && initial_window <= params.max_window);
        Controller {
            scheme,
            params,
            window: initial_window,
            ssthresh: params.max_window,
            ack_credit: 0,
            bits_seen: 0,
            bits_set: 0,
            rtt_min: None,
            choke_cooldown: 0,
            adjustments: 0,
            min_floor_window: initial_window.floor() as u64,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// The sender's outstanding-packet limit.
    pub fn window_floor(&self) -> u64 {
        self.window.floor() as u64
    }

    pub fn ssthresh(&self) -> f64 {
        self.ssthresh
    }

    /// Total window changes made (audit).
    pub fn adjustments(&self) -> u64 {
        self.adjustments
    }

    /// Smallest floor(window) ever in effect (audit).
    pub fn min_floor_window(&self) -> u64 {
        self.min_floor_window
    }

    fn set_window(&mut self, w: f64) {
        let clamped = w.clamp(1.0, self.params.max_window);
        if clamped != self.window {
            self.window = clamped;
            self.adjustments += 1;
            self.min_floor_window = self.min_floor_window.min(self.window_floor());
        }
    }

    /// Feed a valid (never-retransmitted) round-trip sample.
    pub fn on_rtt_sample(&mut self, sample: SimTime) {
        if sample > 0.0 {
            self.rtt_min = Some(self.rtt_min.map_or(sample, |m| m.min(sample)));
        }
    }

    /// Process `newly_acked` packets (cumulative ack advance), the echoed
    /// congestion bit carried by the ack, and the sender's current smoothed
    /// round-trip estimate.
    pub fn on_ack(&mut self, newly_acked: u64, echoed_bit: bool, srtt: Option<SimTime>) {
        if newly_acked == 0 {
            return;
        }
        self.choke_cooldown = self.choke_cooldown.saturating_sub(newly_acked);
        match self.scheme {
            Scheme::Static => {}
            Scheme::Cute => self.credit_increase(newly_acked, |w| w),
            Scheme::Linear => {
                let per = self.params.acks_per_increase.max(1);
                self.credit_increase(newly_acked, move |_| per)
            }
            Scheme::SlowStart => {
                // Below ssthresh every ack is worth +1 (fast ramp); at or above
                // it, fall back to +1 per window of acks.
                let mut left = newly_acked;
                while left > 0 && self.window < self.ssthresh {
                    self.set_window(self.window + 1.0);
                    left -= 1;
                }
                if left > 0 {
                    self.credit_increase(left, |w| w);
                }
            }
            Scheme::BinaryFeedback => {
                self.bits_seen += newly_acked;
                if echoed_bit {
                    self.bits_set += newly_acked;
                }
                if self.bits_seen >= self.window_floor().max(1) {
                    let fraction = self.bits_set as f64 / self.bits_seen as f64;
                    if fraction >= self.params.set_fraction {
                        self.set_window(self.window * self.params.decrease_factor);
                    } else {
                        self.set_window(self.window + 1.0);
                    }
                    self.bits_seen = 0;
                    self.bits_set = 0;
                }
            }
            Scheme::DelayBased => {
                self.ack_credit += newly_acked;
                if self.ack_credit >= self.window_floor().max(1) {
                    self.ack_credit = 0;
                    // No valid baseline or estimate yet: skip this cycle.
                    if let (Some(min), Some(srtt)) = (self.rtt_min, srtt) {
                        if srtt / min > self.params.delay_ratio {
                            self.set_window(self.window * self.params.decrease_factor);
                        } else {
                            self.set_window(self.window + 1.0);
                        }
                    }
                }
            }
        }
    }

    /// +1 window per `per(window_floor)` acks, carrying excess credit over.
    fn credit_increase(&mut self, newly_acked: u64, per: impl Fn(u64) -> u64) {
        self.ack_credit += newly_acked;
        loop {
            let need = per(self.window_floor().max(1)).max(1);
            if self.ack_credit < need {
                break;
            }
            self.ack_credit -= need;
            let before = self.window;
            self.set_window(self.window + 1.0);
            if self.window == before {
                // Clamped at max: stop consuming credit.
                self.ack_credit = 0;
                break;
            }
        }
    }

    /// A retransmission timeout: loss-driven multiplicative restart.
    pub fn on_timeout(&mut self) {
        match self.scheme {
            Scheme::Static => {}
            Scheme::Cute | Scheme::Linear | Scheme::BinaryFeedback | Scheme::DelayBased => {
                self.ack_credit = 0;
                self.bits_seen = 0;
                self.bits_set = 0;
                self.set_window(1.0);
            }
            Scheme::SlowStart => {
                self.ack_credit = 0;
                self.ssthresh = (self.window / 2.0).max(2.0);
                self.set_window(1.0);
            }
        }
    }

    /// A choke notice from the network. Honored at most once per window of
    /// acks: after a response, further chokes are ignored until floor(window)
    /// more packets have been acknowledged. Returns true if the choke was
    /// applied.
    pub fn on_choke(&mut self) -> bool {
        if self.scheme == Scheme::Static {
            return false;
        }
        if self.choke_cooldown > 0 {
            return false;
        }
        self.set_window(self.window * self.params.choke_factor);
        self.choke_cooldown = self.window_floor().max(1);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctrl(scheme: Scheme, w0: f64) -> Controller {
        Controller::new(scheme, w0, SchemeParams::default())
    }

    /// Acks needed, fed one at a time, to grow the window from 1 to `target`.
    fn acks_to_reach(c: &mut Controller, target: f64) -> u64 {
        let mut n = 0;
        while c.window() < target {
            c.on_ack(1, false, None);
            n += 1;
            assert!(n < 2_000_000, "window never reached {target}");
        }
        n
    }

    #[test]
    fn static_window_ignores_everything() {
        let mut c = ctrl(Scheme::Static, 8.0);
        c.on_ack(100, true, Some(9.9));
        c.on_timeout();
        assert!(!c.on_choke());
        assert_eq!(c.window(), 8.0);
        assert_eq!(c.adjustments(), 0);
    }

    #[test]
    fn parabolic_ramp_costs_a_triangular_number_of_acks() {
        // +1 per floor(window) acks from w=1: reaching W takes W(W-1)/2 acks.
        for target in [2u64, 3, 5, 10, 32, 100] {
            let mut c = ctrl(Scheme::Cute, 1.0);
            let acks = acks_to_reach(&mut c, target as f64);
            assert_eq!(
                acks,
                target * (target - 1) / 2,
                "ramp to {target} used the wrong number of acks"
            );
        }
    }

    #[test]
    fn ramp_credit_carries_over_between_increases() {
        let mut c = ctrl(Scheme::Cute, 1.0);
        // Batch of 3 acks at window 1: 1 ack → w=2, 2 more → w=3 exactly.
        c.on_ack(3, false, None);
        assert_eq!(c.window(), 3.0);
    }

    #[test]
    fn timeout_resets_the_window_to_one() {
        let mut c = ctrl(Scheme::Cute, 1.0);
        acks_to_reach(&mut c, 7.0);
        c.on_timeout();
        assert_eq!(c.window(), 1.0);
        assert_eq!(c.min_floor_window(), 1);
    }

    #[test]
    fn linear_ramp_grows_one_window_per_fixed_ack_count() {
        let mut c = ctrl(Scheme::Linear, 1.0);
        c.on_ack(24, false, None); // 24 acks at 8 per increase
        assert_eq!(c.window(), 4.0);
        c.on_timeout();
        assert_eq!(c.window(), 1.0, "shares the restart-to-one rule");
    }

    #[test]
    fn slow_start_ramps_per_ack_below_threshold_then_per_window() {
        let mut c = ctrl(Scheme::SlowStart, 1.0);
        c.ssthresh = 8.0;
        for _ in 0..7 {
            c.on_ack(1, false, None);
        }
        assert_eq!(c.window(), 8.0, "7 acks take the window from 1 to 8");
        // At the threshold the next +1 takes floor(window) = 8 acks.
        for _ in 0..7 {
            c.on_ack(1, false, None);
            assert_eq!(c.window(), 8.0);
        }
        c.on_ack(1, false, None);
        assert_eq!(c.window(), 9.0);
    }

    #[test]
    fn slow_start_timeout_halves_the_threshold_with_a_floor_of_two() {
        let mut c = ctrl(Scheme::SlowStart, 1.0);
        c.window = 16.0;
        c.on_timeout();
        assert_eq!(c.ssthresh(), 8.0);
        assert_eq!(c.window(), 1.0);
        c.window = 2.0;
        c.on_timeout();
        assert_eq!(c.ssthresh(), 2.0);
        c.window = 1.5;
        c.on_timeout();
        assert_eq!(c.ssthresh(), 2.0);
    }

    #[test]
    fn binary_feedback_decreases_on_a_majority_of_set_bits() {
        let mut c = ctrl(Scheme::BinaryFeedback, 1.0);
        c.window = 8.0;
        // 5 of 8 bits set → 0.625 ≥ 0.5 → multiplicative decrease.
        for i in 0..8 {
            c.on_ack(1, i < 5, None);
        }
        assert!((c.window() - 7.0).abs() < 1e-12, "8 × 0.875 = 7");
    }

    #[test]
    fn binary_feedback_increases_additively_on_a_clear_window() {
        let mut c = ctrl(Scheme::BinaryFeedback, 1.0);
        c.window = 8.0;
        // 3 of 8 set → 0.375 < 0.5 → +1.
        for i in 0..8 {
            c.on_ack(1, i < 3, None);
        }
        assert_eq!(c.window(), 9.0);
    }

    #[test]
    fn binary_feedback_decrease_never_goes_below_one() {
        let mut c = ctrl(Scheme::BinaryFeedback, 1.0);
        c.on_ack(1, true, None);
        assert_eq!(c.window(), 1.0, "1 × 0.875 clamps back to 1");
    }

    #[test]
    fn delay_scheme_backs_off_when_delay_inflates_past_the_ratio() {
        let mut c = ctrl(Scheme::DelayBased, 1.0);
        c.window = 8.0;
        c.on_rtt_sample(0.1);
        // One window of acks with srtt 0.16 (ratio 1.6 > 1.5) → decrease.
        c.on_ack(8, false, Some(0.16));
        assert!((c.window() - 7.0).abs() < 1e-12);
        // Ratio 1.2 ≤ 1.5 → additive increase.
        c.on_ack(7, false, Some(0.12));
        assert!((c.window() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn delay_scheme_holds_still_without_a_baseline() {
        let mut c = ctrl(Scheme::DelayBased, 1.0);
        c.window = 4.0;
        c.on_ack(4, false, Some(0.2)); // no rtt_min yet
        assert_eq!(c.window(), 4.0);
        c.on_ack(4, false, None); // no srtt either
        assert_eq!(c.window(), 4.0);
        assert_eq!(c.adjustments(), 0);
    }

    #[test]
    fn choke_halves_once_per_window_of_acks() {
        let mut c = ctrl(Scheme::Cute, 1.0);
        c.window = 8.0;
        assert!(c.on_choke());
        assert_eq!(c.window(), 4.0);
        assert!(!c.on_choke(), "second choke in the same cycle is ignored");
        assert_eq!(c.window(), 4.0);
        // Four acks (one window at w=4) re-arm the response.
        c.on_ack(4, false, None);
        assert!(c.on_choke());
        assert!(c.window() < 4.0);
    }

    #[test]
    fn window_stays_within_bounds_under_arbitrary_event_streams() {
        // Deterministic pseudo-random event mix over every scheme.
        let mut x: u64 = 0x9E3779B97F4A7C15;
        let mut next = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            x
        };
        for scheme in [
            Scheme::Static,
            Scheme::Cute,
            Scheme::Linear,
            Scheme::SlowStart,
            Scheme::BinaryFeedback,
            Scheme::DelayBased,
        ] {
            let params = SchemeParams {
                max_window: 64.0,
                ..SchemeParams::default()
            };
            let w0 = if scheme == Scheme::Static { 8.0 } else { 1.0 };
            let mut c = Controller::new(scheme, w0, params);
            c.on_rtt_sample(0.05);
            for _ in 0..10_000 {
                match next() % 10 {
                    0 => c.on_timeout(),
                    1 => {
                        c.on_choke();
                    }
                    2 => c.on_rtt_sample(0.01 + (next() % 100) as f64 / 500.0),
                    _ => c.on_ack(
                        1 + next() % 3,
                        next() % 4 == 0,
                        Some(0.01 + (next() % 100) as f64 / 500.0),
                    ),
                }
                assert!(
                    c.window() >= 1.0 && c.window() <= 64.0,
                    "{scheme:?} window {w} escaped [1, 64]",
                    w = c.window()
                );
            }
        }
    }

    #[test]
    fn adjustment_budget_respects_the_feedback_frequency() {
        // For every scheme: adjustments ≤ acked / floor(min window) + timeouts + chokes.
        for scheme in [
            Scheme::Cute,
            Scheme::Linear,
            Scheme::SlowStart,
            Scheme::BinaryFeedback,
            Scheme::DelayBased,
        ] {
            let mut c = Controller::new(scheme, 1.0, SchemeParams::default());
            c.on_rtt_sample(0.05);
            let mut acked = 0u64;
            let mut timeouts = 0u64;
            let mut chokes = 0u64;
            for i in 0..5_000u64 {
                if i % 97 == 0 {
                    c.on_timeout();
                    timeouts += 1;
                } else if i % 131 == 0 {
                    if c.on_choke() {
                        chokes += 1;
                    }
                } else {
                    c.on_ack(1, i % 3 == 0, Some(0.06 + (i % 7) as f64 * 0.02));
                    acked += 1;
                }
            }
            let budget =
                acked as f64 / c.min_floor_window().max(1) as f64 + (timeouts + chokes) as f64;
            assert!(
                (c.adjustments() as f64) <= budget,
                "{scheme:?}: {} adjustments exceed budget {budget}",
                c.adjustments()
            );
        }
    }

    #[test]
    fn no_scheme_parameter_is_a_time() {
        for (name, unit) in SCHEME_PARAM_UNITS {
            assert!(
                *unit == "packets" || *unit == "ratio",
                "parameter {name} has unit {unit}; schemes must stay dimensionless"
            );
        }
    }
}
