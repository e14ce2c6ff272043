//! congestion-lab: a deterministic, packet-level discrete-event simulator for
//! studying congestion in store-and-forward networks.
//!
//! The crate is organized around a small event engine ([`engine`]) driving a
//! store-and-forward network model ([`net`]), a reliable window/rate transport
//! ([`transport`]) whose window is owned by a pluggable congestion controller
//! ([`cc`]), offline analysis helpers ([`metrics`]), a plain-text scenario
//! format with a set of built-in experiment scenarios ([`scenario`]), and the
//! simulation wiring itself ([`sim`], [`sweep`]).
//!
//! Everything is deterministic: same scenario + same seed = byte-identical
//! traces and CSV output, across runs and across sweep parallelism.

pub mod cc;
pub mod engine;
pub mod metrics;
pub mod net;
pub mod output;
pub mod scenario;
pub mod sim;
pub mod sweep;
pub mod transport;

/// Virtual time, in seconds. The engine orders events by `(time, insertion seq)`.
pub type SimTime = f64;

pub use engine::{EventQueue, RngStream};
pub use metrics::{fairness_index, is_congested, knee_cliff, power, summarize};
pub use scenario::Scenario;
pub use sim::{RunOptions, RunOutput, Simulation};
pub use sweep::{run_sweep, SweepResult};
