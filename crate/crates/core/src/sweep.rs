//! Parameter sweeps: run one scenario at a series of values of a single
//! numeric parameter and locate the knee and cliff of the resulting
//! load-response curve.
//!
//! Points run in parallel. Determinism is preserved by construction: point
//! `i` always runs with seed `base_seed + i` and results are assembled in
//! sweep order, so thread scheduling cannot influence any output.

use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::{knee_cliff, SweepPoint};
use crate::scenario::Scenario;
use crate::sim::{RunError, RunOptions, RunOutput, Simulation};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("scenario {0} declares no sweep")]
    NoSweep(String),
    #[error("sweep point {index}: {msg}")]
    Param { index: usize, msg: String },
    #[error("sweep point {index} ({param} = {value}): {source}")]
    Point {
        index: usize,
        param: String,
        value: f64,
        #[source]
        source: RunError,
    },
}

/// One completed sweep point.
#[derive(Debug)]
pub struct SweepPointResult {
    /// The swept parameter's value at this point.
    pub value: f64,
    /// Seed this point ran with (`base_seed + index`).
    pub seed: u64,
    pub output: RunOutput,
}

/// All sweep points in order, plus the located knee and cliff.
#[derive(Debug)]
pub struct SweepResult {
    pub scenario: String,
    pub param: String,
    pub points: Vec<SweepPointResult>,
    /// Load of maximum power (throughput/delay), when computable (at least
    /// three points, all with delivered traffic).
    pub knee_load: Option<f64>,
    /// First post-peak load where throughput drops below 90% of the peak.
    pub cliff_load: Option<f64>,
}

/// Run the scenario's declared sweep. Each point gets a fresh copy of the
/// scenario with the parameter applied and its own derived seed.
pub fn run_sweep(base: &Scenario, opts: RunOptions) -> Result<SweepResult, SweepError> {
    let sweep = base
        .sweep
        .clone()
        .ok_or_else(|| SweepError::NoSweep(base.name.clone()))?;
    let base_seed = opts.seed_override.unwrap_or(base.run.seed);

    let points: Vec<SweepPointResult> = sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let mut scenario = base.clone();
            scenario.sweep = None; // a point is a single run
            scenario
                .set_param(&sweep.param, value)
                .map_err(|msg| SweepError::Param { index, msg })?;
            let seed = base_seed + index as u64;
            let point_opts = RunOptions {
                seed_override: Some(seed),
                ..opts
            };
            let run_err = |source| SweepError::Point {
                index,
                param: sweep.param.clone(),
                value,
                source,
            };
            let output = Simulation::new(scenario, point_opts)
                .map_err(run_err)?
                .run()
                .map_err(run_err)?;
            Ok(SweepPointResult { value, seed, output })
        })
        .collect::<Result<_, SweepError>>()?;

    let curve: Option<Vec<SweepPoint>> = points
        .iter()
        .map(|p| {
            let a = p.output.aggregate();
            a.mean_delay_s.map(|d| SweepPoint {
                offered_load: p.value,
                throughput: a.goodput_bps,
                mean_delay: d,
            })
        })
        .collect();
    let (knee_load, cliff_load) = match curve.as_deref() {
        Some(c) if c.len() >= 3 => match knee_cliff(c) {
            Ok(kc) => (Some(kc.knee_load), kc.cliff_load),
            Err(_) => (None, None),
        },
        _ => (None, None),
    };

    Ok(SweepResult {
        scenario: base.name.clone(),
        param: sweep.param.clone(),
        points,
        knee_load,
        cliff_load,
    })
}
