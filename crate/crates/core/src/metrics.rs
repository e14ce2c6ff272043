//! Performance metrics: congestion test, fairness index, power, and
//! knee/cliff detection over load sweeps.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("fairness index needs at least one allocation")]
    EmptyAllocations,
    #[error("fairness index is undefined when every allocation is zero")]
    AllZeroAllocations,
    #[error("power requires a positive delay, got {0}")]
    NonPositiveDelay(f64),
    #[error("knee/cliff detection needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("sweep points must be sorted by strictly increasing load")]
    UnsortedSweep,
}

/// A resource is congested when the sum of demands exceeds its capacity.
/// Demand equal to capacity is full utilization, not congestion.
pub fn is_congested(demands: &[f64], capacity: f64) -> bool {
    demands.iter().sum::<f64>() > capacity
}

/// Fairness index (Σx)² / (n·Σx²), in (0, 1]; 1 means equal shares,
/// and k users sharing equally among n gives k/n.
pub fn fairness_index(allocations: &[f64]) -> Result<f64, MetricError> {
    if allocations.is_empty() {
        return Err(MetricError::EmptyAllocations);
    }
    let sum: f64 = allocations.iter().sum();
    let sum_sq: f64 = allocations.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(MetricError::AllZeroAllocations);
    }
    Ok(sum * sum / (allocations.len() as f64 * sum_sq))
}

/// Power = throughput / delay: rises until queueing delay outgrows the
/// throughput gain, so it peaks at the knee of the load curve.
pub fn power(throughput: f64, delay: f64) -> Result<f64, MetricError> {
    power_weighted(throughput, delay, 1.0)
}

/// Power with a throughput exponent: throughput^exponent / delay. Exponents
/// above 1 favor throughput over delay when picking the operating point.
pub fn power_weighted(throughput: f64, delay: f64, exponent: f64) -> Result<f64, MetricError> {
    if delay <= 0.0 {
        return Err(MetricError::NonPositiveDelay(delay));
    }
    Ok(throughput.powf(exponent) / delay)
}

/// One point of a load sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub offered_load: f64,
    pub throughput: f64,
    pub mean_delay: f64,
}

/// Knee and cliff of a load-response curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KneeCliff {
    /// Load of maximum power: past it, added load buys delay, not throughput.
    pub knee_load: f64,
    /// First load beyond the throughput peak where throughput has fallen below
    /// 90% of the peak — the congestion-collapse point. None if throughput
    /// never falls off.
    pub cliff_load: Option<f64>,
}

/// Locate the knee (max power) and cliff (throughput collapse) of a sweep.
/// Points must be sorted by strictly increasing offered load, at least three
/// of them.
pub fn knee_cliff(points: &[SweepPoint]) -> Result<KneeCliff, MetricError> {
    if points.len() < 3 {
        return Err(MetricError::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    if points
        .windows(2)
        .any(|w| w[1].offered_load <= w[0].offered_load)
    {
        return Err(MetricError::UnsortedSweep);
    }

    let mut knee = points[0];
    let mut knee_power = f64::NEG_INFINITY;
    for p in points {
        let pw = power(p.throughput, p.mean_delay)?;
        if pw > knee_power {
            knee_power = pw;
            knee = *p;
        }
    }

    let (peak_idx, peak) = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.throughput.total_cmp(&b.1.throughput))
        .expect("non-empty");
    let cliff_load = points[peak_idx + 1..]
        .iter()
        .find(|p| p.throughput < 0.9 * peak.throughput)
        .map(|p| p.offered_load);

    Ok(KneeCliff {
        knee_load: knee.offered_load,
        cliff_load,
    })
}

/// Per-connection traffic accounting for one run.
#[derive(Debug, Clone, Default)]
pub struct FlowStats {
    pub name: String,
    /// Data packets injected by the source, retransmissions included.
    pub sent: u64,
    /// Distinct sequence numbers accepted by the receiver.
    pub unique_delivered: u64,
    /// Retransmitted data packets.
    pub retransmitted: u64,
    /// Bits of distinct delivered data.
    pub unique_bits: u64,
    /// Sum of per-packet delays (first transmission to receiver acceptance).
    pub total_delay: f64,
    /// Completion time for finite workloads (last unique delivery).
    pub completion: Option<f64>,
}

impl FlowStats {
    /// Mean end-to-end delay over unique deliveries.
    pub fn mean_delay(&self) -> Option<f64> {
        (self.unique_delivered > 0).then(|| self.total_delay / self.unique_delivered as f64)
    }
}

/// A summary row: one per connection plus an aggregate.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub conn: String,
    pub sent: u64,
    pub unique_delivered: u64,
    pub retransmitted: u64,
    pub goodput_bps: f64,
    pub throughput_bps: Option<f64>,
    pub mean_delay_s: Option<f64>,
    pub completion_s: Option<f64>,
    pub fairness_index: Option<f64>,
}

/// Build summary rows from per-connection stats over a measurement interval.
/// `bottleneck_bits` is total data carried by the designated bottleneck link
/// (duplicates included), if one was named. Fairness is computed over
/// per-connection goodputs and reported on the aggregate row.
pub fn summarize(
    flows: &[FlowStats],
    elapsed: f64,
    bottleneck_bits: Option<u64>,
) -> Vec<SummaryRow> {
    assert!(elapsed > 0.0, "measurement interval must be positive");
    let mut rows: Vec<SummaryRow> = flows
        .iter()
        .map(|f| SummaryRow {
            conn: f.name.clone(),
            sent: f.sent,
            unique_delivered: f.unique_delivered,
            retransmitted: f.retransmitted,
            goodput_bps: f.unique_bits as f64 / elapsed,
            throughput_bps: None,
            mean_delay_s: f.mean_delay(),
            completion_s: f.completion,
            fairness_index: None,
        })
        .collect();

    let goodputs: Vec<f64> = rows.iter().map(|r| r.goodput_bps).collect();
    let aggregate = SummaryRow {
        conn: "aggregate".to_string(),
        sent: flows.iter().map(|f| f.sent).sum(),
        unique_delivered: flows.iter().map(|f| f.unique_delivered).sum(),
        retransmitted: flows.iter().map(|f| f.retransmitted).sum(),
        goodput_bps: goodputs.iter().sum(),
        throughput_bps: bottleneck_bits.map(|b| b as f64 / elapsed),
        mean_delay_s: {
            let n: u64 = flows.iter().map(|f| f.unique_delivered).sum();
            let d: f64 = flows.iter().map(|f| f.total_delay).sum();
            (n > 0).then(|| d / n as f64)
        },
        completion_s: flows
            .iter()
            .map(|f| f.completion)
            .collect::<Option<Vec<_>>>()
            .and_then(|v| v.into_iter().max_by(f64::total_cmp)),
        fairness_index: fairness_index(&goodputs).ok(),
    };
    rows.push(aggregate);
    rows
}
