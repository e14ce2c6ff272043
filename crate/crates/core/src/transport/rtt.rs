//! Smoothed round-trip estimation: exponentially weighted mean plus mean
//! deviation, with the retransmission timeout derived as `srtt + k·rttvar`.

use crate::SimTime;

/// Round-trip estimator. Gains and the deviation multiplier are dimensionless
/// configuration; defaults are 1/8, 1/4 and 4.
#[derive(Debug, Clone)]
pub struct RttEstimator {
    alpha: f64,
    beta: f64,
    k: f64,
    state: Option<(f64, f64)>, // (srtt, rttvar)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("round-trip sample must be positive, got {0}")]
pub struct BadSample(pub f64);

impl Default for RttEstimator {
    fn default() -> Self {
        RttEstimator::new(1.0 / 8.0, 1.0 / 4.0, 4.0)
    }
}

impl RttEstimator {
    pub fn new(alpha: f64, beta: f64, k: f64) -> Self {
        assert!((0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta) && k >= 0.0);
        RttEstimator {
            alpha,
            beta,
            k,
            state: None,
        }
    }

    /// Feed one valid round-trip sample, in seconds.
    ///
    /// First sample: `srtt = s`, `rttvar = s/2`. Later samples:
    /// `rttvar = (1-β)·rttvar + β·|srtt - s|`, then `srtt = (1-α)·srtt + α·s`.
    pub fn update(&mut self, sample: SimTime) -> Result<(), BadSample> {
        if sample <= 0.0 || !sample.is_finite() {
            return Err(BadSample(sample));
        }
        self.state = Some(match self.state {
            None => (sample, sample / 2.0),
            Some((srtt, rttvar)) => {
                let rttvar = (1.0 - self.beta) * rttvar + self.beta * (srtt - sample).abs();
                let srtt = (1.0 - self.alpha) * srtt + self.alpha * sample;
                (srtt, rttvar)
            }
        });
        Ok(())
    }

    pub fn srtt(&self) -> Option<SimTime> {
        self.state.map(|(s, _)| s)
    }

    pub fn rttvar(&self) -> Option<SimTime> {
        self.state.map(|(_, v)| v)
    }

    /// `srtt + k·rttvar`, or `None` before the first sample.
    pub fn rto(&self) -> Option<SimTime> {
        self.state.map(|(s, v)| s + self.k * v)
    }

    pub fn has_sample(&self) -> bool {
        self.state.is_some()
    }
}
