//! Packet-level discrete-event simulation assembled from a [`Scenario`].
//!
//! Mechanics:
//!
//! - **Store-and-forward output queuing.** Every link owns one output port at
//!   its origin node. A packet serializes for `size / bandwidth`, then takes
//!   the link's propagation delay to reach the far node.
//! - **One retransmission timer per connection**, tracking the lowest
//!   outstanding sequence number. A past-due target fires immediately.
//! - **Unified paced send path.** Retransmissions join a recovery queue that
//!   drains ahead of new traffic through the same admission gates (window
//!   permits for new packets, token bucket for everything), so pacing shapes
//!   recovery bursts exactly like first transmissions.
//! - **Exact packet conservation.** Every packet instance is bean-counted per
//!   connection and kind: `injected = consumed + dropped + in_network` must
//!   hold exactly at the end of every run, where `in_network` covers packets
//!   waiting in queues, in service, or propagating between nodes.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::cc::Controller;
use crate::engine::{EventHandle, EventQueue, RngStream};
use crate::metrics::{summarize, FlowStats, SummaryRow};
use crate::net::{
    ConnId, DropPolicy, EnqueueOutcome, Link, NodeId, Packet, PacketKind, PortQueue, QueueConfig,
};
use crate::scenario::{next_hops, RtoSpec, Scenario, SizeDist, StopRule, TransportKind, Workload};
use crate::transport::{
    Admission, ReceiverState, RtoPolicy, SendMode, SenderState, TokenBucket,
    DEFAULT_BACKOFF_CAP,
};
use crate::SimTime;

/// Queue drop-lottery streams live far above connection streams.
const QUEUE_STREAM_BASE: u64 = 1 << 32;

const KINDS: [PacketKind; 3] = [PacketKind::Data, PacketKind::Ack, PacketKind::Choke];

fn kind_ix(kind: PacketKind) -> usize {
    match kind {
        PacketKind::Data => 0,
        PacketKind::Ack => 1,
        PacketKind::Choke => 2,
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("event budget exhausted after {processed} events at t={t}")]
    EventBudget { processed: u64, t: SimTime },
    #[error("run stalled before completion; unfinished: {0}")]
    Stalled(String),
    #[error("no route from {from} to {to}")]
    NoRoute { from: String, to: String },
    #[error("internal scheduling error: {0}")]
    Internal(String),
}

/// Per-run knobs that are not part of the scenario itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Replaces the scenario's seed (sweeps give each point its own).
    pub seed_override: Option<u64>,
    /// Record one trace row per processed event.
    pub collect_trace: bool,
    /// Record on-change time series of windows, queues, and estimators.
    pub collect_timeseries: bool,
}

/// One processed event, for event-level inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: SimTime,
    /// One of `source-wakeup`, `packet-arrival`, `transmission-complete`,
    /// `timer-expiry`.
    pub event: &'static str,
    pub detail: String,
}

/// One on-change sample of an entity's metric.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePoint {
    pub t: SimTime,
    /// `conn:<name>` or `queue:<from>-><to>`.
    pub entity: String,
    pub metric: &'static str,
    pub value: f64,
}

/// Monotone per-connection counters. Windowed figures are differences of two
/// snapshots of this struct.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlowCounters {
    /// Data packet instances sent (first transmissions + retransmissions).
    pub sent: u64,
    /// Retransmitted instances only.
    pub retransmitted: u64,
    /// Sequence numbers accepted at the destination for the first time.
    pub unique_delivered: u64,
    /// Bits of those first-time acceptances.
    pub unique_bits: u64,
    /// Sum over first-time acceptances of (accept time − first send time).
    pub delay_sum: f64,
    /// Cumulative-ack advances credited to the sender.
    pub acked: u64,
    /// Non-stale retransmission timer expiries.
    pub timeouts: u64,
    /// Choke packets that actually shrank the window.
    pub chokes_heeded: u64,
}

impl FlowCounters {
    fn minus(&self, base: &FlowCounters) -> FlowCounters {
        FlowCounters {
            sent: self.sent - base.sent,
            retransmitted: self.retransmitted - base.retransmitted,
            unique_delivered: self.unique_delivered - base.unique_delivered,
            unique_bits: self.unique_bits - base.unique_bits,
            delay_sum: self.delay_sum - base.delay_sum,
            acked: self.acked - base.acked,
            timeouts: self.timeouts - base.timeouts,
            chokes_heeded: self.chokes_heeded - base.chokes_heeded,
        }
    }
}

/// Final per-connection report.
#[derive(Debug, Clone)]
pub struct FlowReport {
    pub name: String,
    /// Whole-run counters.
    pub totals: FlowCounters,
    /// Counters restricted to the measurement window.
    pub window: FlowCounters,
    /// Congestion window at the end of the run.
    pub final_window: f64,
    /// Window adjustments the controller actually made.
    pub adjustments: u64,
    /// Smallest floor(window) ever active.
    pub min_floor_window: u64,
    /// When the file workload was fully acknowledged (file connections only).
    pub completion: Option<SimTime>,
}

impl FlowReport {
    /// Ceiling on legitimate control activity: at most one adjustment per
    /// floor(min window) acknowledged packets, plus one per timeout or heeded
    /// choke.
    pub fn adjustment_bound(&self) -> f64 {
        self.totals.acked as f64 / self.min_floor_window.max(1) as f64
            + (self.totals.timeouts + self.totals.chokes_heeded) as f64
    }
}

/// Final per-port (per-link output queue) report.
#[derive(Debug, Clone)]
pub struct QueueReport {
    pub from: String,
    pub to: String,
    pub drops: u64,
    pub marks: u64,
    pub max_occupancy_pkts: usize,
    pub final_waiting_pkts: usize,
    pub final_waiting_bits: u64,
    pub forwarded_pkts: u64,
    pub forwarded_bits: u64,
    /// Data bits (duplicates included) that completed service inside the
    /// measurement window.
    pub data_bits_window: u64,
}

/// One conservation ledger line: every packet instance of this connection and
/// kind must be consumed, dropped, or still in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationRow {
    pub conn: String,
    pub kind: &'static str,
    pub injected: u64,
    pub consumed: u64,
    pub dropped: u64,
    pub in_network: u64,
}

impl ConservationRow {
    pub fn balanced(&self) -> bool {
        self.injected == self.consumed + self.dropped + self.in_network
    }
}

/// Everything a finished run reports.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: String,
    pub seed: u64,
    /// Virtual time at which the run ended.
    pub end_time: SimTime,
    /// Start of the measurement window (after warm-up).
    pub measure_start: SimTime,
    /// Length of the measurement window.
    pub elapsed: SimTime,
    pub events: u64,
    pub flows: Vec<FlowReport>,
    pub queues: Vec<QueueReport>,
    /// Per-connection summary rows plus a final `aggregate` row, computed
    /// over the measurement window.
    pub rows: Vec<SummaryRow>,
    pub conservation: Vec<ConservationRow>,
    /// Packet instances injected, by kind (data, ack, choke).
    pub injected_by_kind: [u64; 3],
    pub trace: Vec<TraceRecord>,
    pub timeseries: Vec<TimePoint>,
}

impl RunOutput {
    /// The `aggregate` summary row.
    pub fn aggregate(&self) -> &SummaryRow {
        self.rows.last().expect("summary always has an aggregate row")
    }

    /// Conservation lines that do not balance (must be empty).
    pub fn conservation_violations(&self) -> Vec<&ConservationRow> {
        self.conservation.iter().filter(|r| !r.balanced()).collect()
    }

    /// Connections whose controllers adjusted the window more often than
    /// their ack/timeout/choke activity can justify (must be empty).
    pub fn control_violations(&self) -> Vec<String> {
        self.flows
            .iter()
            .filter(|f| f.adjustments as f64 > f.adjustment_bound() + 1e-9)
            .map(|f| {
                format!(
                    "{}: {} adjustments exceed bound {:.3}",
                    f.name,
                    f.adjustments,
                    f.adjustment_bound()
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Beans {
    injected: u64,
    consumed: u64,
    dropped: u64,
}

#[derive(Debug)]
enum Ev {
    SourceWakeup { conn: ConnId, new_packet: bool },
    Arrival { node: NodeId, pkt: Packet },
    TxComplete { port: usize },
    Timer { conn: ConnId, seq: u64 },
}

struct PortState {
    from: NodeId,
    to: NodeId,
    link: Link,
    queue: PortQueue,
    in_service: Option<Packet>,
    max_occupancy: usize,
    forwarded_pkts: u64,
    forwarded_bits: u64,
    /// Data bits that completed service, duplicates included.
    data_bits: u64,
    snap_data_bits: u64,
}

struct ConnState {
    name: String,
    src: NodeId,
    dst: NodeId,
    workload: Workload,
    size: SizeDist,
    transport: TransportKind,
    choke_response: bool,
    sender: Option<SenderState>,
    receiver: Option<ReceiverState>,
    controller: Controller,
    rng: RngStream,
    /// Application packets waiting to be sent (sizes, arrival order).
    backlog: VecDeque<u64>,
    /// Seqs awaiting retransmission, drained ahead of new traffic.
    retx_queue: VecDeque<u64>,
    /// Size of each unacknowledged seq (sizes are stable across resends).
    seq_sizes: std::collections::BTreeMap<u64, u64>,
    /// Sequence counter for fire-and-forget connections.
    open_seq: u64,
    /// Armed retransmission timer: (seq, expiry, handle).
    timer: Option<(u64, SimTime, EventHandle)>,
    /// A pacing retry wakeup is already scheduled.
    wakeup_pending: bool,
    totals: FlowCounters,
    snap: FlowCounters,
    completed_at: Option<SimTime>,
}

/// A fully wired, runnable instance of a scenario.
pub struct Simulation {
    scenario: Scenario,
    opts: RunOptions,
    seed: u64,
    queue: EventQueue<Ev>,
    conns: Vec<ConnState>,
    ports: Vec<PortState>,
    /// `out_port[node][dst]` = port index of the next hop, if routable.
    out_port: Vec<Vec<Option<usize>>>,
    beans: Vec<[Beans; 3]>,
    /// Packets scheduled to arrive (in propagation) per conn and kind.
    pending: Vec<[u64; 3]>,
    next_pkt_id: u64,
    measure_start: SimTime,
    snapped: bool,
    file_conns: usize,
    completed_files: usize,
    trace: Vec<TraceRecord>,
    timeseries: Vec<TimePoint>,
    ts_last: HashMap<(bool, usize, &'static str), f64>,
    conn_entity: Vec<String>,
    queue_entity: Vec<String>,
}

impl Simulation {
    pub fn new(scenario: Scenario, opts: RunOptions) -> Result<Simulation, RunError> {
        scenario
            .validate()
            .map_err(|f| RunError::Config(f.message().to_string()))?;
        let seed = opts.seed_override.unwrap_or(scenario.run.seed);
        let n = scenario.nodes.len();

        let hops = next_hops(&scenario.nodes, &scenario.links);
        let mut out_port = vec![vec![None; n]; n];
        for u in 0..n {
            for d in 0..n {
                if let Some(v) = hops[u][d] {
                    out_port[u][d] = scenario.link_index(&scenario.nodes[u], &scenario.nodes[v]);
                }
            }
        }

        let ports: Vec<PortState> = scenario
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let config = QueueConfig {
                    capacity: l.capacity,
                    service: l.service,
                    drop: l.drop,
                    mark_threshold: l.mark_threshold,
                    choke_on_drop: l.choke_on_drop,
                };
                let rng = (l.drop == DropPolicy::Random)
                    .then(|| RngStream::new(seed, QUEUE_STREAM_BASE + i as u64));
                PortState {
                    from: scenario.node_index(&l.from).expect("validated"),
                    to: scenario.node_index(&l.to).expect("validated"),
                    link: Link {
                        bandwidth_bps: l.bandwidth_bps,
                        prop_delay_s: l.prop_delay_s,
                    },
                    queue: PortQueue::new(config, rng),
                    in_service: None,
                    max_occupancy: 0,
                    forwarded_pkts: 0,
                    forwarded_bits: 0,
                    data_bits: 0,
                    snap_data_bits: 0,
                }
            })
            .collect();

        let mut conns = Vec::with_capacity(scenario.connections.len());
        for (i, def) in scenario.connections.iter().enumerate() {
            let mut rng = RngStream::new(seed, i as u64);
            let sender = match def.transport {
                TransportKind::Open => None,
                TransportKind::Window | TransportKind::Rate => {
                    let mode = if def.transport == TransportKind::Rate {
                        SendMode::Rate
                    } else {
                        SendMode::Window
                    };
                    let rto_policy = match def.rto {
                        RtoSpec::Fixed(t) => RtoPolicy::Fixed(t),
                        RtoSpec::Adaptive => RtoPolicy::Adaptive {
                            initial: def.initial_rto,
                            backoff_cap: DEFAULT_BACKOFF_CAP,
                        },
                    };
                    let mut s = SenderState::new(mode, def.retransmit, rto_policy);
                    if def.transport == TransportKind::Rate {
                        let rate = def.rate_limit_bps.expect("validated: rate transport");
                        let burst = def.burst_bits.expect("validated: rate transport");
                        s.bucket = Some(TokenBucket::new(rate, burst));
                    }
                    Some(s)
                }
            };
            let receiver = match def.transport {
                TransportKind::Open => None,
                _ => Some(ReceiverState::new(def.receiver, def.ack_every)),
            };
            let mut backlog = VecDeque::new();
            if let Workload::File { count } = def.workload {
                for _ in 0..count {
                    backlog.push_back(draw_size(&mut rng, def.size));
                }
            }
            conns.push(ConnState {
                name: def.name.clone(),
                src: scenario.node_index(&def.src).expect("validated"),
                dst: scenario.node_index(&def.dst).expect("validated"),
                workload: def.workload,
                size: def.size,
                transport: def.transport,
                choke_response: def.choke_response,
                sender,
                receiver,
                controller: Controller::new(def.scheme, def.window, def.params),
                rng,
                backlog,
                retx_queue: VecDeque::new(),
                seq_sizes: std::collections::BTreeMap::new(),
                open_seq: 0,
                timer: None,
                wakeup_pending: false,
                totals: FlowCounters::default(),
                snap: FlowCounters::default(),
                completed_at: None,
            });
        }

        let measure_start = match scenario.run.stop {
            StopRule::Duration(d) => scenario.run.warmup_frac * d,
            StopRule::UntilComplete => 0.0,
        };
        let file_conns = conns
            .iter()
            .filter(|c| matches!(c.workload, Workload::File { .. }))
            .count();
        let conn_entity = conns.iter().map(|c| format!("conn:{}", c.name)).collect();
        let queue_entity = scenario
            .links
            .iter()
            .map(|l| format!("queue:{}->{}", l.from, l.to))
            .collect();
        let n_conns = conns.len();

        Ok(Simulation {
            scenario,
            opts,
            seed,
            queue: EventQueue::new(),
            conns,
            ports,
            out_port,
            beans: vec![[Beans::default(); 3]; n_conns],
            pending: vec![[0; 3]; n_conns],
            next_pkt_id: 0,
            measure_start,
            snapped: false,
            file_conns,
            completed_files: 0,
            trace: Vec::new(),
            timeseries: Vec::new(),
            ts_last: HashMap::new(),
            conn_entity,
            queue_entity,
        })
    }

    /// Run to completion and report.
    pub fn run(mut self) -> Result<RunOutput, RunError> {
        // Initial source activity. Constant-rate sources emit from t = 0;
        // Poisson sources from their first renewal; file backlogs are ready
        // at t = 0 and just need the send loop kicked.
        for i in 0..self.conns.len() {
            let at = match self.conns[i].workload {
                Workload::File { .. } => 0.0,
                Workload::Cbr { .. } => 0.0,
                Workload::Poisson { rate_bps } => {
                    let mean = self.conns[i].size.mean_bits() / rate_bps;
                    self.conns[i].rng.exp(mean)
                }
            };
            let new_packet = !matches!(self.conns[i].workload, Workload::File { .. });
            self.schedule(at, Ev::SourceWakeup { conn: i, new_packet })?;
            let w = self.conns[i].controller.window();
            self.emit_conn(0.0, i, "window", w);
        }

        let (horizon, until_complete) = match self.scenario.run.stop {
            StopRule::Duration(d) => (d, false),
            StopRule::UntilComplete => (f64::INFINITY, true),
        };
        let max_events = self.scenario.run.max_events;
        let mut end_time = if until_complete { 0.0 } else { horizon };

        loop {
            if self.queue.processed() >= max_events {
                return Err(RunError::EventBudget {
                    processed: self.queue.processed(),
                    t: self.queue.clock(),
                });
            }
            let Some((t, ev)) = self.queue.pop_next_before(horizon) else {
                if until_complete && self.completed_files < self.file_conns {
                    let unfinished: Vec<&str> = self
                        .conns
                        .iter()
                        .filter(|c| {
                            matches!(c.workload, Workload::File { .. })
                                && c.completed_at.is_none()
                        })
                        .map(|c| c.name.as_str())
                        .collect();
                    return Err(RunError::Stalled(unfinished.join(", ")));
                }
                break;
            };
            self.maybe_snapshot(t);
            self.dispatch(t, ev)?;
            if until_complete && self.completed_files == self.file_conns {
                end_time = t;
                break;
            }
        }

        Ok(self.finalize(end_time))
    }

    // ------------------------------------------------------------------
    // Event handling
    // ------------------------------------------------------------------

    fn dispatch(&mut self, t: SimTime, ev: Ev) -> Result<(), RunError> {
        if self.opts.collect_trace {
            self.trace_event(t, &ev);
        }
        match ev {
            Ev::SourceWakeup { conn, new_packet } => self.on_wakeup(t, conn, new_packet),
            Ev::Arrival { node, pkt } => self.on_arrival(t, node, pkt),
            Ev::TxComplete { port } => self.on_tx_complete(t, port),
            Ev::Timer { conn, seq } => self.on_timer(t, conn, seq),
        }
    }

    fn on_wakeup(&mut self, t: SimTime, conn: ConnId, new_packet: bool) -> Result<(), RunError> {
        if new_packet {
            let c = &mut self.conns[conn];
            let size = draw_size(&mut c.rng, c.size);
            c.backlog.push_back(size);
            let mean_interval = |rate_bps: f64, dist: SizeDist| dist.mean_bits() / rate_bps;
            let next = match c.workload {
                Workload::Cbr { rate_bps } => Some(t + mean_interval(rate_bps, c.size)),
                Workload::Poisson { rate_bps } => {
                    let m = mean_interval(rate_bps, c.size);
                    Some(t + c.rng.exp(m))
                }
                Workload::File { .. } => {
                    unreachable!("file workloads never schedule arrival wakeups")
                }
            };
            if let Some(at) = next {
                self.schedule(at, Ev::SourceWakeup { conn, new_packet: true })?;
            }
        } else {
            self.conns[conn].wakeup_pending = false;
        }
        self.pump(t, conn)
    }

    /// Drain the connection's send work: recovery queue first, then new
    /// packets, until an admission gate (window, bucket) or empty backlog
    /// stops it. Always leaves the retransmission timer consistent.
    fn pump(&mut self, t: SimTime, conn: ConnId) -> Result<(), RunError> {
        enum Step {
            Send(Packet),
            Retry(SimTime),
            Done,
        }
        loop {
            let step = {
                let c = &mut self.conns[conn];
                if let Some(&seq) = c.retx_queue.front() {
                    let sender = c.sender.as_mut().expect("recovery implies reliable");
                    if seq <= sender.highest_acked() {
                        c.retx_queue.pop_front(); // acked while waiting: abandon
                        continue;
                    }
                    let size = *c.seq_sizes.get(&seq).expect("outstanding seq has a size");
                    match admit(sender, size, t)? {
                        Admission::EarliestAt(at) => Step::Retry(at),
                        Admission::SendNow => {
                            c.retx_queue.pop_front();
                            let first = sender
                                .mark_retransmitted(seq, t)
                                .expect("seq is outstanding");
                            c.totals.sent += 1;
                            c.totals.retransmitted += 1;
                            Step::Send(Packet {
                                id: 0,
                                kind: PacketKind::Data,
                                conn,
                                seq,
                                size,
                                src: c.src,
                                dst: c.dst,
                                first_sent_at: first,
                                sent_at: t,
                                retransmission: true,
                                congestion_bit: false,
                                echoed_bit: false,
                                congested_node: None,
                            })
                        }
                    }
                } else if c.backlog.is_empty() {
                    Step::Done
                } else {
                    match c.transport {
                        TransportKind::Open => {
                            let size = c.backlog.pop_front().expect("checked non-empty");
                            c.open_seq += 1;
                            c.totals.sent += 1;
                            Step::Send(Packet {
                                id: 0,
                                kind: PacketKind::Data,
                                conn,
                                seq: c.open_seq,
                                size,
                                src: c.src,
                                dst: c.dst,
                                first_sent_at: t,
                                sent_at: t,
                                retransmission: false,
                                congestion_bit: false,
                                echoed_bit: false,
                                congested_node: None,
                            })
                        }
                        TransportKind::Window | TransportKind::Rate => {
                            let floor = c.controller.window_floor();
                            let sender = c.sender.as_mut().expect("reliable transport");
                            if sender.permits(floor) == 0 {
                                Step::Done
                            } else {
                                let size = *c.backlog.front().expect("checked non-empty");
                                match admit(sender, size, t)? {
                                    Admission::EarliestAt(at) => Step::Retry(at),
                                    Admission::SendNow => {
                                        c.backlog.pop_front();
                                        let seq = sender.register_send(t);
                                        c.seq_sizes.insert(seq, size);
                                        c.totals.sent += 1;
                                        Step::Send(Packet {
                                            id: 0,
                                            kind: PacketKind::Data,
                                            conn,
                                            seq,
                                            size,
                                            src: c.src,
                                            dst: c.dst,
                                            first_sent_at: t,
                                            sent_at: t,
                                            retransmission: false,
                                            congestion_bit: false,
                                            echoed_bit: false,
                                            congested_node: None,
                                        })
                                    }
                                }
                            }
                        }
                    }
                }
            };
            match step {
                Step::Send(mut pkt) => {
                    self.next_pkt_id += 1;
                    pkt.id = self.next_pkt_id;
                    if self.opts.collect_timeseries {
                        let c = &self.conns[conn];
                        if pkt.retransmission {
                            let v = c.totals.retransmitted as f64;
                            self.emit_conn(t, conn, "retx_total", v);
                        } else if let Some(s) = c.sender.as_ref() {
                            let v = s.outstanding_len() as f64;
                            self.emit_conn(t, conn, "outstanding", v);
                        }
                    }
                    self.inject(t, pkt)?;
                }
                Step::Retry(at) => {
                    let c = &mut self.conns[conn];
                    if !c.wakeup_pending {
                        c.wakeup_pending = true;
                        let at = at.max(t);
                        self.schedule(at, Ev::SourceWakeup { conn, new_packet: false })?;
                    }
                    break;
                }
                Step::Done => break,
            }
        }
        self.rearm_timer(t, conn)
    }

    /// Count a fresh packet instance into the ledger and put it on the wire
    /// at its origin. A packet already addressed to its origin (a choke
    /// raised by the source's own output port) is consumed on the spot.
    fn inject(&mut self, t: SimTime, pkt: Packet) -> Result<(), RunError> {
        self.beans[pkt.conn][kind_ix(pkt.kind)].injected += 1;
        if pkt.src == pkt.dst {
            return self.consume(t, pkt);
        }
        self.route_and_enqueue(t, pkt.src, pkt)
    }

    fn route_and_enqueue(&mut self, t: SimTime, node: NodeId, pkt: Packet) -> Result<(), RunError> {
        let Some(port) = self.out_port[node][pkt.dst] else {
            return Err(RunError::NoRoute {
                from: self.scenario.nodes[node].clone(),
                to: self.scenario.nodes[pkt.dst].clone(),
            });
        };
        self.enqueue_at(t, port, pkt)
    }

    fn enqueue_at(&mut self, t: SimTime, port: usize, pkt: Packet) -> Result<(), RunError> {
        let arriving_id = pkt.id;
        let (dropped, choke_req, idle) = {
            let p = &mut self.ports[port];
            let outcome = p.queue.enqueue(pkt);
            let occ = p.queue.occupancy();
            if occ > p.max_occupancy {
                p.max_occupancy = occ;
            }
            let mut dropped = None;
            let mut choke_req = None;
            match outcome {
                EnqueueOutcome::Accepted => {}
                EnqueueOutcome::Dropped { victim } => {
                    dropped = Some((victim.conn, victim.kind));
                    let _ = arriving_id; // victim may or may not be the arrival
                    if p.queue.config().choke_on_drop && victim.kind == PacketKind::Data {
                        choke_req = Some((p.from, victim.conn, victim.seq, victim.src));
                    }
                }
            }
            (dropped, choke_req, p.in_service.is_none())
        };
        if let Some((conn, kind)) = dropped {
            self.beans[conn][kind_ix(kind)].dropped += 1;
        }
        if self.opts.collect_timeseries {
            let (occ, drops, marks) = {
                let q = &self.ports[port].queue;
                (q.occupancy() as f64, q.drops as f64, q.marks as f64)
            };
            self.emit_queue(t, port, "occupancy_pkts", occ);
            self.emit_queue(t, port, "drops_total", drops);
            self.emit_queue(t, port, "marks_total", marks);
        }
        if idle {
            self.start_service(t, port)?;
        }
        if let Some((at_node, conn, seq, victim_src)) = choke_req {
            // A choke packet races back toward the source of the dropped
            // data packet, naming the congested node.
            if at_node == victim_src || self.out_port[at_node][victim_src].is_some() {
                self.next_pkt_id += 1;
                let choke = Packet {
                    id: self.next_pkt_id,
                    kind: PacketKind::Choke,
                    conn,
                    seq,
                    size: self.scenario.run.choke_size_bits,
                    src: at_node,
                    dst: victim_src,
                    first_sent_at: t,
                    sent_at: t,
                    retransmission: false,
                    congestion_bit: false,
                    echoed_bit: false,
                    congested_node: Some(at_node),
                };
                self.inject(t, choke)?;
            }
        }
        Ok(())
    }

    fn start_service(&mut self, t: SimTime, port: usize) -> Result<(), RunError> {
        let started = {
            let p = &mut self.ports[port];
            debug_assert!(p.in_service.is_none(), "port already serving");
            match p.queue.service_next() {
                None => None,
                Some(next) => {
                    let tx = p.link.transmission_time(next.size);
                    p.in_service = Some(next);
                    Some((tx, p.queue.occupancy() as f64))
                }
            }
        };
        if let Some((tx, occ)) = started {
            self.schedule(t + tx, Ev::TxComplete { port })?;
            if self.opts.collect_timeseries {
                self.emit_queue(t, port, "occupancy_pkts", occ);
            }
        }
        Ok(())
    }

    fn on_tx_complete(&mut self, t: SimTime, port: usize) -> Result<(), RunError> {
        let (pkt, to, prop) = {
            let p = &mut self.ports[port];
            let pkt = p.in_service.take().expect("tx-complete on idle port");
            p.forwarded_pkts += 1;
            p.forwarded_bits += pkt.size;
            if pkt.kind == PacketKind::Data {
                p.data_bits += pkt.size;
            }
            (pkt, p.to, p.link.prop_delay_s)
        };
        self.pending[pkt.conn][kind_ix(pkt.kind)] += 1;
        self.schedule(t + prop, Ev::Arrival { node: to, pkt })?;
        self.start_service(t, port)
    }

    fn on_arrival(&mut self, t: SimTime, node: NodeId, pkt: Packet) -> Result<(), RunError> {
        self.pending[pkt.conn][kind_ix(pkt.kind)] -= 1;
        if node == pkt.dst {
            self.consume(t, pkt)
        } else {
            self.route_and_enqueue(t, node, pkt)
        }
    }

    fn consume(&mut self, t: SimTime, pkt: Packet) -> Result<(), RunError> {
        self.beans[pkt.conn][kind_ix(pkt.kind)].consumed += 1;
        match pkt.kind {
            PacketKind::Data => self.consume_data(t, pkt),
            PacketKind::Ack => self.consume_ack(t, pkt),
            PacketKind::Choke => {
                let conn = pkt.conn;
                let heeded = {
                    let c = &mut self.conns[conn];
                    c.choke_response && c.controller.on_choke()
                };
                if heeded {
                    self.conns[conn].totals.chokes_heeded += 1;
                    if self.opts.collect_timeseries {
                        let w = self.conns[conn].controller.window();
                        self.emit_conn(t, conn, "window", w);
                    }
                }
                Ok(())
            }
        }
    }

    fn consume_data(&mut self, t: SimTime, pkt: Packet) -> Result<(), RunError> {
        let conn = pkt.conn;
        let directive = {
            let c = &mut self.conns[conn];
            match c.receiver.as_mut() {
                None => {
                    // Fire-and-forget: every arrival is a first delivery.
                    c.totals.unique_delivered += 1;
                    c.totals.unique_bits += pkt.size;
                    c.totals.delay_sum += t - pkt.first_sent_at;
                    None
                }
                Some(r) => {
                    let (acceptance, directive) = r.on_data(pkt.seq, pkt.congestion_bit);
                    if matches!(
                        acceptance,
                        crate::transport::Acceptance::InOrder { .. }
                            | crate::transport::Acceptance::Cached
                    ) {
                        c.totals.unique_delivered += 1;
                        c.totals.unique_bits += pkt.size;
                        c.totals.delay_sum += t - pkt.first_sent_at;
                    }
                    Some(directive)
                }
            }
        };
        if let Some(d) = directive {
            if d.send_ack {
                self.next_pkt_id += 1;
                let c = &self.conns[conn];
                let ack = Packet {
                    id: self.next_pkt_id,
                    kind: PacketKind::Ack,
                    conn,
                    seq: d.ack_num,
                    size: self.scenario.run.ack_size_bits,
                    src: c.dst,
                    dst: c.src,
                    first_sent_at: t,
                    sent_at: t,
                    retransmission: false,
                    congestion_bit: false,
                    echoed_bit: d.echoed_bit,
                    congested_node: None,
                };
                self.inject(t, ack)?;
            }
        }
        Ok(())
    }

    fn consume_ack(&mut self, t: SimTime, pkt: Packet) -> Result<(), RunError> {
        let conn = pkt.conn;
        let just_completed = {
            let c = &mut self.conns[conn];
            let sender = c.sender.as_mut().expect("acks imply a reliable sender");
            let res = sender.on_ack(pkt.seq, t);
            if let Some(s) = res.rtt_sample {
                c.controller.on_rtt_sample(s);
            }
            let mut completed = false;
            if res.newly_acked > 0 {
                c.totals.acked += res.newly_acked;
                let srtt = sender.estimator.srtt();
                c.controller.on_ack(res.newly_acked, pkt.echoed_bit, srtt);
                let keep = sender.highest_acked() + 1;
                c.seq_sizes = c.seq_sizes.split_off(&keep);
                if let Workload::File { count } = c.workload {
                    if c.completed_at.is_none()
                        && sender.highest_acked() >= count
                        && sender.outstanding_len() == 0
                        && c.backlog.is_empty()
                    {
                        c.completed_at = Some(t);
                        completed = true;
                    }
                }
            }
            completed
        };
        if just_completed {
            self.completed_files += 1;
        }
        if self.opts.collect_timeseries {
            let (w, srtt, rto, outstanding) = {
                let c = &self.conns[conn];
                let s = c.sender.as_ref().expect("reliable");
                (
                    c.controller.window(),
                    s.estimator.srtt(),
                    s.rto(),
                    s.outstanding_len() as f64,
                )
            };
            self.emit_conn(t, conn, "window", w);
            if let Some(v) = srtt {
                self.emit_conn(t, conn, "srtt", v);
            }
            self.emit_conn(t, conn, "rto_s", rto);
            self.emit_conn(t, conn, "outstanding", outstanding);
        }
        self.pump(t, conn)
    }

    fn on_timer(&mut self, t: SimTime, conn: ConnId, seq: u64) -> Result<(), RunError> {
        {
            let c = &mut self.conns[conn];
            c.timer = None;
            let sender = c.sender.as_mut().expect("timers imply a reliable sender");
            let action = sender.on_timeout(seq);
            if !action.stale {
                c.totals.timeouts += 1;
                c.controller.on_timeout();
                debug_assert!(
                    c.retx_queue.is_empty(),
                    "timers stay disarmed while recovery is in progress"
                );
                c.retx_queue.extend(action.resend);
            }
        }
        if self.opts.collect_timeseries {
            let (w, rto) = {
                let c = &self.conns[conn];
                (c.controller.window(), c.sender.as_ref().expect("reliable").rto())
            };
            self.emit_conn(t, conn, "window", w);
            self.emit_conn(t, conn, "rto_s", rto);
        }
        self.pump(t, conn)
    }

    /// Keep the single retransmission timer pointed at the lowest outstanding
    /// seq's most recent transmission. While the recovery queue is non-empty
    /// the timer stays disarmed: recovery is already in progress, and send
    /// times only become meaningful again once the resends actually leave.
    fn rearm_timer(&mut self, t: SimTime, conn: ConnId) -> Result<(), RunError> {
        let c = &mut self.conns[conn];
        let Some(sender) = c.sender.as_ref() else {
            return Ok(());
        };
        let desired = if c.retx_queue.is_empty() {
            sender.timer_target().map(|(seq, at)| (seq, at.max(t)))
        } else {
            None
        };
        match (c.timer, desired) {
            (None, None) => {}
            (Some((cs, ct, _)), Some((ds, dt))) if cs == ds && ct == dt => {}
            (current, want) => {
                if let Some((_, _, handle)) = current {
                    self.queue.cancel(handle);
                }
                c.timer = None;
                if let Some((seq, at)) = want {
                    let handle = self
                        .queue
                        .schedule(at, Ev::Timer { conn, seq })
                        .map_err(|e| RunError::Internal(e.to_string()))?;
                    c.timer = Some((seq, at, handle));
                }
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Bookkeeping
    // ------------------------------------------------------------------

    fn schedule(&mut self, at: SimTime, ev: Ev) -> Result<EventHandle, RunError> {
        self.queue
            .schedule(at, ev)
            .map_err(|e| RunError::Internal(e.to_string()))
    }

    fn maybe_snapshot(&mut self, t: SimTime) {
        if !self.snapped && t >= self.measure_start {
            self.snapped = true;
            for c in &mut self.conns {
                c.snap = c.totals;
            }
            for p in &mut self.ports {
                p.snap_data_bits = p.data_bits;
            }
        }
    }

    fn trace_event(&mut self, t: SimTime, ev: &Ev) {
        let (event, detail) = match ev {
            Ev::SourceWakeup { conn, new_packet } => (
                "source-wakeup",
                format!("conn={} new={}", self.conns[*conn].name, new_packet),
            ),
            Ev::Arrival { node, pkt } => (
                "packet-arrival",
                format!(
                    "node={} kind={} conn={} seq={} id={}",
                    self.scenario.nodes[*node],
                    pkt.kind.label(),
                    self.conns[pkt.conn].name,
                    pkt.seq,
                    pkt.id
                ),
            ),
            Ev::TxComplete { port } => {
                let p = &self.ports[*port];
                let pkt = p.in_service.as_ref().expect("tx-complete on idle port");
                (
                    "transmission-complete",
                    format!(
                        "link={}->{} kind={} conn={} seq={} id={}",
                        self.scenario.nodes[p.from],
                        self.scenario.nodes[p.to],
                        pkt.kind.label(),
                        self.conns[pkt.conn].name,
                        pkt.seq,
                        pkt.id
                    ),
                )
            }
            Ev::Timer { conn, seq } => (
                "timer-expiry",
                format!("conn={} seq={}", self.conns[*conn].name, seq),
            ),
        };
        self.trace.push(TraceRecord { t, event, detail });
    }

    fn emit_conn(&mut self, t: SimTime, conn: ConnId, metric: &'static str, value: f64) {
        if !self.opts.collect_timeseries {
            return;
        }
        let key = (false, conn, metric);
        if self.ts_last.get(&key) == Some(&value) {
            return;
        }
        self.ts_last.insert(key, value);
        self.timeseries.push(TimePoint {
            t,
            entity: self.conn_entity[conn].clone(),
            metric,
            value,
        });
    }

    fn emit_queue(&mut self, t: SimTime, port: usize, metric: &'static str, value: f64) {
        let key = (true, port, metric);
        if self.ts_last.get(&key) == Some(&value) {
            return;
        }
        self.ts_last.insert(key, value);
        self.timeseries.push(TimePoint {
            t,
            entity: self.queue_entity[port].clone(),
            metric,
            value,
        });
    }

    fn finalize(mut self, end_time: SimTime) -> RunOutput {
        if !self.snapped {
            // The warm-up was never crossed by an event; the window is empty
            // of activity but still well-defined.
            for c in &mut self.conns {
                c.snap = c.totals;
            }
            for p in &mut self.ports {
                p.snap_data_bits = p.data_bits;
            }
        }
        let elapsed = end_time - self.measure_start;

        let queues: Vec<QueueReport> = self
            .ports
            .iter()
            .map(|p| QueueReport {
                from: self.scenario.nodes[p.from].clone(),
                to: self.scenario.nodes[p.to].clone(),
                drops: p.queue.drops,
                marks: p.queue.marks,
                max_occupancy_pkts: p.max_occupancy,
                final_waiting_pkts: p.queue.occupancy(),
                final_waiting_bits: p.queue.occupancy_bits(),
                forwarded_pkts: p.forwarded_pkts,
                forwarded_bits: p.forwarded_bits,
                data_bits_window: p.data_bits - p.snap_data_bits,
            })
            .collect();

        let bottleneck_bits = self.scenario.run.bottleneck.as_ref().map(|(from, to)| {
            let i = self
                .scenario
                .link_index(from, to)
                .expect("validated bottleneck link");
            self.ports[i].data_bits - self.ports[i].snap_data_bits
        });

        let flows: Vec<FlowReport> = self
            .conns
            .iter()
            .map(|c| FlowReport {
                name: c.name.clone(),
                totals: c.totals,
                window: c.totals.minus(&c.snap),
                final_window: c.controller.window(),
                adjustments: c.controller.adjustments(),
                min_floor_window: c.controller.min_floor_window(),
                completion: c.completed_at,
            })
            .collect();

        let stats: Vec<FlowStats> = flows
            .iter()
            .map(|f| FlowStats {
                name: f.name.clone(),
                sent: f.window.sent,
                unique_delivered: f.window.unique_delivered,
                retransmitted: f.window.retransmitted,
                unique_bits: f.window.unique_bits,
                total_delay: f.window.delay_sum,
                completion: f.completion,
            })
            .collect();
        let rows = summarize(&stats, elapsed, bottleneck_bits);

        // Conservation: drain what is still in the network and balance the
        // ledger per connection and kind.
        let mut in_network = vec![[0u64; 3]; self.conns.len()];
        for p in &mut self.ports {
            for pkt in p.queue.drain() {
                in_network[pkt.conn][kind_ix(pkt.kind)] += 1;
            }
            if let Some(pkt) = p.in_service.take() {
                in_network[pkt.conn][kind_ix(pkt.kind)] += 1;
            }
        }
        for (conn, pend) in self.pending.iter().enumerate() {
            for k in 0..3 {
                in_network[conn][k] += pend[k];
            }
        }
        let mut conservation = Vec::new();
        let mut injected_by_kind = [0u64; 3];
        for (i, c) in self.conns.iter().enumerate() {
            for k in 0..3 {
                let b = self.beans[i][k];
                injected_by_kind[k] += b.injected;
                conservation.push(ConservationRow {
                    conn: c.name.clone(),
                    kind: KINDS[k].label(),
                    injected: b.injected,
                    consumed: b.consumed,
                    dropped: b.dropped,
                    in_network: in_network[i][k],
                });
            }
        }

        RunOutput {
            scenario: self.scenario.name.clone(),
            seed: self.seed,
            end_time,
            measure_start: self.measure_start,
            elapsed,
            events: self.queue.processed(),
            flows,
            queues,
            rows,
            conservation,
            injected_by_kind,
            trace: self.trace,
            timeseries: self.timeseries,
        }
    }
}

fn draw_size(rng: &mut RngStream, dist: SizeDist) -> u64 {
    match dist {
        SizeDist::Fixed { bits } => bits,
        SizeDist::Exp { mean_bits } => rng.exp(mean_bits).round().max(1.0) as u64,
    }
}

fn admit(sender: &mut SenderState, size: u64, now: SimTime) -> Result<Admission, RunError> {
    match sender.bucket.as_mut() {
        None => Ok(Admission::SendNow),
        Some(b) => b.admit(size, now).map_err(|e| RunError::Config(e.to_string())),
    }
}
