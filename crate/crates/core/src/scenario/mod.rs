//! Scenario model: topology, connections, run control, and sweeps.
//!
//! A scenario is a fully validated, plain-data description of one experiment.
//! It can be parsed from sectioned text ([`Scenario::parse`]), exported back to
//! canonical text ([`Scenario::export`]), or fetched from the built-in library
//! ([`Scenario::builtin`]).

pub mod builtins;
mod text;

use crate::cc::{Scheme, SchemeParams};
use crate::net::{DropPolicy, ServicePolicy};
use crate::transport::{ReceiverMode, RetransmitPolicy};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

/// A validation defect, attributed to the entity that carries it so the parser
/// can map it back to a source line.
#[derive(Debug, Clone, PartialEq)]
pub enum Flaw {
    Link { index: usize, msg: String },
    Conn { index: usize, msg: String },
    Run(String),
    Sweep(String),
    Global(String),
}

impl Flaw {
    pub fn message(&self) -> &str {
        match self {
            Flaw::Link { msg, .. }
            | Flaw::Conn { msg, .. }
            | Flaw::Run(msg)
            | Flaw::Sweep(msg)
            | Flaw::Global(msg) => msg,
        }
    }
}

impl From<Flaw> for ScenarioError {
    fn from(f: Flaw) -> Self {
        ScenarioError::Invalid(f.message().to_string())
    }
}

/// One directed link with its output queue configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDef {
    pub from: String,
    pub to: String,
    pub bandwidth_bps: f64,
    pub prop_delay_s: f64,
    /// `None` = unbounded queue.
    pub capacity: Option<usize>,
    pub service: ServicePolicy,
    pub drop: DropPolicy,
    /// Congestion-bit threshold in waiting packets; `None` disables marking.
    pub mark_threshold: Option<usize>,
    pub choke_on_drop: bool,
}

impl LinkDef {
    pub fn new(from: &str, to: &str, bandwidth_bps: f64, prop_delay_s: f64) -> Self {
        LinkDef {
            from: from.to_string(),
            to: to.to_string(),
            bandwidth_bps,
            prop_delay_s,
            capacity: None,
            service: ServicePolicy::Fifo,
            drop: DropPolicy::DropTail,
            mark_threshold: Some(1),
            choke_on_drop: false,
        }
    }
}

/// What a connection's application offers to the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Workload {
    /// A finite file of `count` packets, all available at t = 0.
    File { count: u64 },
    /// Constant bit rate: one packet every `size/rate` seconds.
    Cbr { rate_bps: f64 },
    /// Poisson packet arrivals at an average bit rate.
    Poisson { rate_bps: f64 },
}

/// Packet size model, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SizeDist {
    Fixed { bits: u64 },
    Exp { mean_bits: f64 },
}

impl SizeDist {
    pub fn mean_bits(&self) -> f64 {
        match self {
            SizeDist::Fixed { bits } => *bits as f64,
            SizeDist::Exp { mean_bits } => *mean_bits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    /// Fire-and-forget: no acks, no retransmission, no flow control.
    Open,
    /// Sliding window, ack-clocked.
    Window,
    /// Token-bucket paced, with a window as the outstanding-packet cap.
    Rate,
}

/// Retransmission timer policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RtoSpec {
    /// Constant timeout, never backed off (deliberately naive).
    Fixed(f64),
    /// Mean + deviation estimator with exponential backoff on timeout.
    Adaptive,
}

/// One end-to-end connection.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnDef {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub workload: Workload,
    pub size: SizeDist,
    pub transport: TransportKind,
    pub scheme: Scheme,
    /// Initial (and, for the static scheme, permanent) window.
    pub window: f64,
    pub params: SchemeParams,
    pub retransmit: RetransmitPolicy,
    pub receiver: ReceiverMode,
    pub rto: RtoSpec,
    /// Timeout used by the adaptive policy before its first sample.
    pub initial_rto: f64,
    /// Ack every d-th deliverable arrival.
    pub ack_every: u64,
    /// Token-bucket rate (rate transport only).
    pub rate_limit_bps: Option<f64>,
    /// Token-bucket burst, bits (rate transport only).
    pub burst_bits: Option<f64>,
    /// Whether the sender reacts to choke packets.
    pub choke_response: bool,
}

impl ConnDef {
    pub fn new(name: &str, src: &str, dst: &str, workload: Workload) -> Self {
        ConnDef {
            name: name.to_string(),
            src: src.to_string(),
            dst: dst.to_string(),
            workload,
            size: SizeDist::Fixed { bits: 8000 },
            transport: TransportKind::Window,
            scheme: Scheme::Static,
            window: 1.0,
            params: SchemeParams::default(),
            retransmit: RetransmitPolicy::GoBackN,
            receiver: ReceiverMode::Cache,
            rto: RtoSpec::Adaptive,
            initial_rto: 1.0,
            ack_every: 1,
            rate_limit_bps: None,
            burst_bits: None,
            choke_response: true,
        }
    }
}

/// When the run ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Fixed virtual horizon, seconds.
    Duration(f64),
    /// Run until every file workload is fully acknowledged.
    UntilComplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub stop: StopRule,
    pub max_events: u64,
    /// Fraction of the horizon excluded from measurement (persistent sources).
    pub warmup_frac: f64,
    /// Link whose carried data defines aggregate throughput.
    pub bottleneck: Option<(String, String)>,
    pub ack_size_bits: u64,
    pub choke_size_bits: u64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            stop: StopRule::Duration(10.0),
            max_events: 50_000_000,
            warmup_frac: 0.0,
            bottleneck: None,
            ack_size_bits: 320,
            choke_size_bits: 320,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Dotted path of a numeric scenario field, e.g. `connections.c1.rate`.
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub nodes: Vec<String>,
    pub links: Vec<LinkDef>,
    pub connections: Vec<ConnDef>,
    pub run: RunConfig,
    pub sweep: Option<SweepConfig>,
}

impl Scenario {
    /// Parse sectioned scenario text. `default_name` names the scenario unless
    /// the text carries its own `scenario <name>` line.
    pub fn parse(default_name: &str, text: &str) -> Result<Scenario, ScenarioError> {
        text::parse(default_name, text)
    }

    /// Canonical text form; parsing it back yields an equal scenario.
    pub fn export(&self) -> String {
        text::export(self)
    }

    /// Fetch a built-in scenario by name.
    pub fn builtin(name: &str) -> Option<Scenario> {
        builtins::text(name).map(|t| {
            Scenario::parse(name, t).expect("built-in scenarios are valid by construction")
        })
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn link_index(&self, from: &str, to: &str) -> Option<usize> {
        self.links.iter().position(|l| l.from == from && l.to == to)
    }

    /// Full semantic validation. The parser maps returned flaws to lines.
    pub fn validate(&self) -> Result<(), Flaw> {
        let global = |msg: String| Err(Flaw::Global(msg));
        if self.nodes.is_empty() {
            return global("scenario declares no nodes".into());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if self.nodes[..i].contains(n) {
                return global(format!("duplicate node {n}"));
            }
        }

        for (index, l) in self.links.iter().enumerate() {
            let flaw = |msg: String| Err(Flaw::Link { index, msg });
            let id = format!("link {} -> {}", l.from, l.to);
            if self.node_index(&l.from).is_none() {
                return flaw(format!("{id}: undeclared node {}", l.from));
            }
            if self.node_index(&l.to).is_none() {
                return flaw(format!("{id}: undeclared node {}", l.to));
            }
            if l.from == l.to {
                return flaw(format!("{id}: a link cannot loop back to its origin"));
            }
            if l.bandwidth_bps <= 0.0 || !l.bandwidth_bps.is_finite() {
                return flaw(format!("{id}: bandwidth must be positive"));
            }
            if l.prop_delay_s < 0.0 || !l.prop_delay_s.is_finite() {
                return flaw(format!("{id}: propagation delay must be non-negative"));
            }
            if l.capacity == Some(0) {
                return flaw(format!("{id}: capacity must be at least 1 (or inf)"));
            }
            if self.links[..index]
                .iter()
                .any(|p| p.from == l.from && p.to == l.to)
            {
                return flaw(format!("duplicate {id}"));
            }
        }

        if self.connections.is_empty() {
            return global("scenario declares no connections".into());
        }
        let hops = next_hops(&self.nodes, &self.links);
        for (index, c) in self.connections.iter().enumerate() {
            self.validate_conn(index, c, &hops)
                .map_err(|msg| Flaw::Conn { index, msg })?;
        }

        self.validate_run().map_err(Flaw::Run)?;

        if let Some(sweep) = &self.sweep {
            self.validate_sweep(sweep).map_err(Flaw::Sweep)?;
        }
        Ok(())
    }

    fn validate_conn(
        &self,
        index: usize,
        c: &ConnDef,
        hops: &[Vec<Option<usize>>],
    ) -> Result<(), String> {
        let id = format!("connection {}", c.name);
        if c.name == "aggregate" {
            return Err(format!("{id}: the name aggregate is reserved"));
        }
        if self.connections[..index].iter().any(|p| p.name == c.name) {
            return Err(format!("duplicate {id}"));
        }
        let src = self
            .node_index(&c.src)
            .ok_or_else(|| format!("{id}: undeclared node {}", c.src))?;
        let dst = self
            .node_index(&c.dst)
            .ok_or_else(|| format!("{id}: undeclared node {}", c.dst))?;
        if src == dst {
            return Err(format!("{id}: source and destination must differ"));
        }
        if hops[src][dst].is_none() {
            return Err(format!("{id}: no route from {} to {}", c.src, c.dst));
        }
        match c.workload {
            Workload::File { count } => {
                if count == 0 {
                    return Err(format!("{id}: file workload needs at least 1 packet"));
                }
                if c.transport == TransportKind::Open {
                    return Err(format!(
                        "{id}: file workload requires transport=window or transport=rate"
                    ));
                }
            }
            Workload::Cbr { rate_bps } | Workload::Poisson { rate_bps } => {
                if rate_bps <= 0.0 || !rate_bps.is_finite() {
                    return Err(format!("{id}: workload rate must be positive"));
                }
            }
        }
        match c.size {
            SizeDist::Fixed { bits } => {
                if bits == 0 {
                    return Err(format!("{id}: packet size must be at least 1 bit"));
                }
            }
            SizeDist::Exp { mean_bits } => {
                if mean_bits <= 0.0 || !mean_bits.is_finite() {
                    return Err(format!("{id}: mean packet size must be positive"));
                }
            }
        }
        if c.window < 1.0 || !c.window.is_finite() {
            return Err(format!("{id}: window must be at least 1"));
        }
        if c.params.max_window < c.window {
            return Err(format!("{id}: max_window must be at least the window"));
        }
        if c.scheme == Scheme::SlowStart && c.window != 1.0 {
            return Err(format!("{id}: the slow-start scheme must start at window 1"));
        }
        if c.params.acks_per_increase == 0 {
            return Err(format!("{id}: acks_per_increase must be at least 1"));
        }
        for (value, key) in [
            (c.params.decrease_factor, "decrease_factor"),
            (c.params.choke_factor, "choke_factor"),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(format!("{id}: {key} must be strictly between 0 and 1"));
            }
        }
        if !(0.0..=1.0).contains(&c.params.set_fraction) {
            return Err(format!("{id}: set_fraction must be between 0 and 1"));
        }
        if c.params.delay_ratio <= 0.0 || !c.params.delay_ratio.is_finite() {
            return Err(format!("{id}: delay_ratio must be positive"));
        }
        if c.ack_every == 0 {
            return Err(format!("{id}: ack_every must be at least 1"));
        }
        if let RtoSpec::Fixed(t) = c.rto {
            if t <= 0.0 || !t.is_finite() {
                return Err(format!("{id}: fixed timeout must be positive"));
            }
        }
        if c.initial_rto <= 0.0 || !c.initial_rto.is_finite() {
            return Err(format!("{id}: initial_rto must be positive"));
        }
        match c.transport {
            TransportKind::Open => {
                if c.rate_limit_bps.is_some() || c.burst_bits.is_some() {
                    return Err(format!(
                        "{id}: rate_limit/burst require transport=rate"
                    ));
                }
            }
            TransportKind::Window => {
                if c.rate_limit_bps.is_some() || c.burst_bits.is_some() {
                    return Err(format!(
                        "{id}: rate_limit/burst require transport=rate"
                    ));
                }
                if hops[dst][src].is_none() {
                    return Err(format!(
                        "{id}: no return route from {} to {} for acknowledgments",
                        c.dst, c.src
                    ));
                }
            }
            TransportKind::Rate => {
                let rate = c
                    .rate_limit_bps
                    .ok_or_else(|| format!("{id}: transport=rate requires rate_limit"))?;
                let burst = c
                    .burst_bits
                    .ok_or_else(|| format!("{id}: transport=rate requires burst"))?;
                if rate <= 0.0 || !rate.is_finite() {
                    return Err(format!("{id}: rate_limit must be positive"));
                }
                if burst <= 0.0 || !burst.is_finite() {
                    return Err(format!("{id}: burst must be positive"));
                }
                if let SizeDist::Fixed { bits } = c.size {
                    if (bits as f64) > burst {
                        return Err(format!(
                            "{id}: burst must be at least the packet size"
                        ));
                    }
                }
                if hops[dst][src].is_none() {
                    return Err(format!(
                        "{id}: no return route from {} to {} for acknowledgments",
                        c.dst, c.src
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<(), String> {
        let r = &self.run;
        match r.stop {
            StopRule::Duration(d) => {
                if d <= 0.0 || !d.is_finite() {
                    return Err("duration must be positive".into());
                }
            }
            StopRule::UntilComplete => {
                if !self
                    .connections
                    .iter()
                    .any(|c| matches!(c.workload, Workload::File { .. }))
                {
                    return Err(
                        "until_complete requires at least one file workload".into()
                    );
                }
                if r.warmup_frac != 0.0 {
                    return Err("until_complete runs cannot use a warmup fraction".into());
                }
            }
        }
        if r.max_events == 0 {
            return Err("max_events must be at least 1".into());
        }
        if !(0.0..1.0).contains(&r.warmup_frac) {
            return Err("warmup must be a fraction in [0, 1)".into());
        }
        if let Some((from, to)) = &r.bottleneck {
            if self.link_index(from, to).is_none() {
                return Err(format!("bottleneck names an unknown link {from} -> {to}"));
            }
        }
        Ok(())
    }

    fn validate_sweep(&self, sweep: &SweepConfig) -> Result<(), String> {
        if sweep.values.is_empty() {
            return Err("sweep needs at least one value".into());
        }
        if sweep
            .values
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err("sweep values must be strictly increasing".into());
        }
        let mut probe = self.clone();
        probe.sweep = None;
        probe.set_param(&sweep.param, sweep.values[0])?;
        Ok(())
    }

    /// Set a numeric field by dotted path and re-validate. Paths:
    /// `connections.<name>.{rate,window,rate_limit,size}` and
    /// `links.<from>.<to>.{bandwidth,capacity}`.
    pub fn set_param(&mut self, path: &str, value: f64) -> Result<(), String> {
        let parts: Vec<&str> = path.split('.').collect();
        match parts.as_slice() {
            ["connections", name, field] => {
                let conn = self
                    .connections
                    .iter_mut()
                    .find(|c| c.name == *name)
                    .ok_or_else(|| format!("unknown connection {name} in param {path}"))?;
                match *field {
                    "rate" => match &mut conn.workload {
                        Workload::Cbr { rate_bps } | Workload::Poisson { rate_bps } => {
                            *rate_bps = value
                        }
                        Workload::File { .. } => {
                            return Err(format!(
                                "param {path}: file workloads have no rate"
                            ))
                        }
                    },
                    "window" => conn.window = value,
                    "rate_limit" => {
                        if conn.rate_limit_bps.is_none() {
                            return Err(format!(
                                "param {path}: connection has no rate limit"
                            ));
                        }
                        conn.rate_limit_bps = Some(value);
                    }
                    "size" => match &mut conn.size {
                        SizeDist::Fixed { bits } => *bits = value.round() as u64,
                        SizeDist::Exp { mean_bits } => *mean_bits = value,
                    },
                    other => {
                        return Err(format!("unknown connection field {other} in param {path}"))
                    }
                }
            }
            ["links", from, to, field] => {
                let link = self
                    .links
                    .iter_mut()
                    .find(|l| l.from == *from && l.to == *to)
                    .ok_or_else(|| format!("unknown link {from} -> {to} in param {path}"))?;
                match *field {
                    "bandwidth" => link.bandwidth_bps = value,
                    "capacity" => link.capacity = Some(value.round() as usize),
                    other => return Err(format!("unknown link field {other} in param {path}")),
                }
            }
            _ => return Err(format!("unknown param path {path}")),
        }
        self.validate().map_err(|f| f.message().to_string())
    }
}

/// Static shortest-path next hops: `next[src][dst]` is the neighbor to forward
/// to, or `None` if unreachable. Computed by breadth-first search from each
/// destination over reversed links; equal-length paths tie-break toward the
/// lowest-indexed neighbor, so routes are deterministic.
pub fn next_hops(nodes: &[String], links: &[LinkDef]) -> Vec<Vec<Option<usize>>> {
    let n = nodes.len();
    let index = |name: &str| nodes.iter().position(|x| x == name).unwrap();
    // out_edges[u] = nodes v with a link u -> v, in declaration order.
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for l in links {
        let (u, v) = (index(&l.from), index(&l.to));
        out_edges[u].push(v);
        in_edges[v].push(u);
    }
    let mut next = vec![vec![None; n]; n];
    for dst in 0..n {
        // BFS over reversed edges, yielding hop distance to dst.
        let mut dist = vec![usize::MAX; n];
        dist[dst] = 0;
        let mut frontier = std::collections::VecDeque::from([dst]);
        while let Some(v) = frontier.pop_front() {
            for &u in &in_edges[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    frontier.push_back(u);
                }
            }
        }
        for src in 0..n {
            if src == dst || dist[src] == usize::MAX {
                continue;
            }
            next[src][dst] = out_edges[src]
                .iter()
                .copied()
                .filter(|&v| dist[v] != usize::MAX && dist[v] + 1 == dist[src])
                .min();
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> Scenario {
        Scenario {
            name: "t".into(),
            nodes: vec!["S".into(), "D".into()],
            links: vec![
                LinkDef::new("S", "D", 1e6, 0.001),
                LinkDef::new("D", "S", 1e6, 0.001),
            ],
            connections: vec![ConnDef::new("c1", "S", "D", Workload::File { count: 10 })],
            run: RunConfig {
                stop: StopRule::UntilComplete,
                ..RunConfig::default()
            },
            sweep: None,
        }
    }

    #[test]
    fn a_minimal_scenario_validates() {
        two_node().validate().unwrap();
    }

    #[test]
    fn non_positive_bandwidth_is_rejected_by_name() {
        let mut s = two_node();
        s.links[0].bandwidth_bps = -5.0;
        let flaw = s.validate().unwrap_err();
        assert!(flaw.message().contains("bandwidth must be positive"));
        s.links[0].bandwidth_bps = 0.0;
        assert!(s
            .validate()
            .unwrap_err()
            .message()
            .contains("bandwidth must be positive"));
    }

    #[test]
    fn links_to_undeclared_nodes_are_rejected() {
        let mut s = two_node();
        s.links.push(LinkDef::new("S", "X", 1e6, 0.0));
        assert!(s.validate().unwrap_err().message().contains("undeclared node X"));
    }

    #[test]
    fn reliable_connections_need_a_return_route() {
        let mut s = two_node();
        s.links.remove(1); // drop D -> S
        let flaw = s.validate().unwrap_err();
        assert!(flaw.message().contains("no return route"));
    }

    #[test]
    fn open_connections_need_no_return_route() {
        let mut s = two_node();
        s.links.remove(1);
        s.connections[0].workload = Workload::Cbr { rate_bps: 1e5 };
        s.connections[0].transport = TransportKind::Open;
        s.run.stop = StopRule::Duration(1.0);
        s.validate().unwrap();
    }

    #[test]
    fn unroutable_connections_are_rejected() {
        let mut s = two_node();
        s.nodes.push("X".into());
        s.connections[0].dst = "X".into();
        assert!(s.validate().unwrap_err().message().contains("no route from S to X"));
    }

    #[test]
    fn rate_transport_requires_both_bucket_parameters() {
        let mut s = two_node();
        s.connections[0].transport = TransportKind::Rate;
        assert!(s.validate().unwrap_err().message().contains("requires rate_limit"));
        s.connections[0].rate_limit_bps = Some(1e5);
        assert!(s.validate().unwrap_err().message().contains("requires burst"));
        s.connections[0].burst_bits = Some(8000.0);
        s.validate().unwrap();
        // A burst smaller than the packet is a configuration error.
        s.connections[0].burst_bits = Some(100.0);
        assert!(s
            .validate()
            .unwrap_err()
            .message()
            .contains("burst must be at least the packet size"));
    }

    #[test]
    fn until_complete_demands_a_file_workload() {
        let mut s = two_node();
        s.connections[0].workload = Workload::Cbr { rate_bps: 1e5 };
        s.connections[0].transport = TransportKind::Open;
        assert!(s
            .validate()
            .unwrap_err()
            .message()
            .contains("until_complete requires at least one file workload"));
    }

    #[test]
    fn slow_start_must_begin_at_window_one() {
        let mut s = two_node();
        s.connections[0].scheme = Scheme::SlowStart;
        s.connections[0].window = 4.0;
        assert!(s
            .validate()
            .unwrap_err()
            .message()
            .contains("slow-start scheme must start at window 1"));
    }

    #[test]
    fn next_hops_follow_shortest_paths_with_stable_ties() {
        // Diamond: a -> b -> d and a -> c -> d, equal length. b is declared
        // first, so the tie breaks to b.
        let nodes: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let links = vec![
            LinkDef::new("a", "b", 1.0, 0.0),
            LinkDef::new("a", "c", 1.0, 0.0),
            LinkDef::new("b", "d", 1.0, 0.0),
            LinkDef::new("c", "d", 1.0, 0.0),
        ];
        let next = next_hops(&nodes, &links);
        assert_eq!(next[0][3], Some(1));
        assert_eq!(next[0][1], Some(1));
        assert_eq!(next[1][2], None, "no path b -> c");
        assert_eq!(next[3][0], None, "links are one-way");
    }

    #[test]
    fn sweep_paths_set_fields_and_revalidate() {
        let mut s = two_node();
        s.connections[0].workload = Workload::Poisson { rate_bps: 1e5 };
        s.run.stop = StopRule::Duration(10.0);
        s.set_param("connections.c1.rate", 2e5).unwrap();
        assert_eq!(s.connections[0].workload, Workload::Poisson { rate_bps: 2e5 });
        s.set_param("links.S.D.bandwidth", 5e6).unwrap();
        assert_eq!(s.links[0].bandwidth_bps, 5e6);
        s.set_param("links.S.D.capacity", 20.0).unwrap();
        assert_eq!(s.links[0].capacity, Some(20));
        assert!(s.set_param("connections.zz.rate", 1.0).is_err());
        assert!(s.set_param("connections.c1.nope", 1.0).is_err());
        assert!(s.set_param("nonsense", 1.0).is_err());
        // A value that breaks validation is rejected with the named constraint.
        assert!(s
            .set_param("links.S.D.bandwidth", -1.0)
            .unwrap_err()
            .contains("bandwidth must be positive"));
    }

    #[test]
    fn sweep_values_must_be_strictly_increasing_and_nonempty() {
        let mut s = two_node();
        s.connections[0].workload = Workload::Poisson { rate_bps: 1e5 };
        s.run.stop = StopRule::Duration(10.0);
        s.sweep = Some(SweepConfig {
            param: "connections.c1.rate".into(),
            values: vec![],
        });
        assert!(s.validate().is_err());
        s.sweep = Some(SweepConfig {
            param: "connections.c1.rate".into(),
            values: vec![2e5, 1e5],
        });
        assert!(s.validate().is_err());
        s.sweep = Some(SweepConfig {
            param: "connections.c1.rate".into(),
            values: vec![1e5, 2e5],
        });
        s.validate().unwrap();
    }
}
