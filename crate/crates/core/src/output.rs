//! Canonical text output: CSV summaries, long-form time series, sweep tables,
//! and event traces.
//!
//! Every numeric format is pinned here so that identical runs produce
//! byte-identical files: metric values use nine-significant-digit scientific
//! notation, times use fixed-point nanosecond resolution.

use std::fmt::Write;

use crate::sim::RunOutput;
use crate::sweep::SweepResult;

/// Metric values: scientific notation, nine significant digits.
pub fn fmt_metric(v: f64) -> String {
    format!("{v:.8e}")
}

/// Event and sample times: fixed point, nanosecond resolution.
pub fn fmt_time(t: f64) -> String {
    format!("{t:.9}")
}

fn opt_metric(v: Option<f64>) -> String {
    v.map(fmt_metric).unwrap_or_default()
}

pub const SUMMARY_HEADER: &str = "scenario,conn,sent,unique_delivered,retransmitted,\
goodput_bps,throughput_bps,mean_delay_s,completion_s,fairness_index";

/// One summary CSV line (no trailing newline).
pub fn summary_line(scenario: &str, r: &crate::metrics::SummaryRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        scenario,
        r.conn,
        r.sent,
        r.unique_delivered,
        r.retransmitted,
        fmt_metric(r.goodput_bps),
        opt_metric(r.throughput_bps),
        opt_metric(r.mean_delay_s),
        opt_metric(r.completion_s),
        opt_metric(r.fairness_index),
    )
}

/// Per-connection summary rows plus the aggregate row, one CSV line each.
pub fn summary_csv(out: &RunOutput) -> String {
    let mut s = String::with_capacity(256 * (out.rows.len() + 1));
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for r in &out.rows {
        s.push_str(&summary_line(&out.scenario, r));
        s.push('\n');
    }
    s
}

pub const TIMESERIES_HEADER: &str = "t_s,entity,metric,value";

/// Long-form on-change time series: one `(t, entity, metric, value)` row per
/// recorded change.
pub fn timeseries_csv(out: &RunOutput) -> String {
    let mut s = String::with_capacity(48 * (out.timeseries.len() + 1));
    s.push_str(TIMESERIES_HEADER);
    s.push('\n');
    for p in &out.timeseries {
        writeln!(
            s,
            "{},{},{},{}",
            fmt_time(p.t),
            p.entity,
            p.metric,
            fmt_metric(p.value)
        )
        .expect("writing to a String cannot fail");
    }
    s
}

pub const TRACE_HEADER: &str = "t_s,event,detail";

/// One row per processed event, in processing order.
pub fn trace_csv(out: &RunOutput) -> String {
    let mut s = String::with_capacity(64 * (out.trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in &out.trace {
        writeln!(s, "{},{},{}", fmt_time(r.t), r.event, r.detail)
            .expect("writing to a String cannot fail");
    }
    s
}

pub const SWEEP_HEADER: &str = "offered_load,throughput_bps,mean_delay_s,power";

/// Sweep table: one row per swept value (throughput is the aggregate goodput
/// at that point), followed by comment lines locating the knee and cliff.
pub fn sweep_csv(res: &SweepResult) -> String {
    let mut s = String::with_capacity(96 * (res.points.len() + 3));
    s.push_str(SWEEP_HEADER);
    s.push('\n');
    for p in &res.points {
        let a = p.output.aggregate();
        let power = a.mean_delay_s.map(|d| a.goodput_bps / d);
        writeln!(
            s,
            "{},{},{},{}",
            fmt_metric(p.value),
            fmt_metric(a.goodput_bps),
            opt_metric(a.mean_delay_s),
            opt_metric(power),
        )
        .expect("writing to a String cannot fail");
    }
    let fmt_opt = |v: Option<f64>| v.map(fmt_metric).unwrap_or_else(|| "none".to_string());
    writeln!(s, "# knee_load={}", fmt_opt(res.knee_load)).expect("write to String");
    writeln!(s, "# cliff_load={}", fmt_opt(res.cliff_load)).expect("write to String");
    s
}
