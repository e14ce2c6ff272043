//! The sectioned plain-text scenario format.
//!
//! Line-oriented: `#` starts a comment, blank lines are ignored, tokens are
//! whitespace-separated. Sections are `[topology]`, `[connections]`, `[run]`,
//! and the optional `[sweep]`. Unknown sections, directives, and keys are
//! errors — nothing is silently ignored. All numbers are decimal; units are
//! fixed per field (bits/s, seconds, bits, packets) and documented in the
//! format reference.

use super::*;
use crate::cc::Scheme;
use crate::net::{DropPolicy, ServicePolicy};
use crate::transport::{ReceiverMode, RetransmitPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Topology,
    Connections,
    Run,
    Sweep,
}

struct Parser {
    scenario: Scenario,
    section: Section,
    /// Declaration line of each link / connection, for error attribution.
    link_lines: Vec<usize>,
    conn_lines: Vec<usize>,
    run_line: usize,
    sweep_line: usize,
    saw_duration: bool,
    sweep_param: Option<String>,
    sweep_values: Option<Vec<f64>>,
}

fn err(line: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse(default_name: &str, text: &str) -> Result<Scenario, ScenarioError> {
    let mut p = Parser {
        scenario: Scenario {
            name: default_name.to_string(),
            nodes: Vec::new(),
            links: Vec::new(),
            connections: Vec::new(),
            run: RunConfig::default(),
            sweep: None,
        },
        section: Section::None,
        link_lines: Vec::new(),
        conn_lines: Vec::new(),
        run_line: 0,
        sweep_line: 0,
        saw_duration: false,
        sweep_param: None,
        sweep_values: None,
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = stripped.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens[0].starts_with('[') {
            let section = match tokens[0] {
                "[topology]" => Section::Topology,
                "[connections]" => Section::Connections,
                "[run]" => {
                    p.run_line = line;
                    Section::Run
                }
                "[sweep]" => {
                    p.sweep_line = line;
                    Section::Sweep
                }
                other => return Err(err(line, format!("unknown section {other}"))),
            };
            if tokens.len() > 1 {
                return Err(err(line, "unexpected tokens after section header"));
            }
            p.section = section;
            continue;
        }
        match p.section {
            Section::None => {
                if tokens[0] == "scenario" && tokens.len() == 2 {
                    p.scenario.name = tokens[1].to_string();
                } else {
                    return Err(err(
                        line,
                        format!("expected a section header, got {}", tokens[0]),
                    ));
                }
            }
            Section::Topology => parse_topology_line(&mut p, line, &tokens)?,
            Section::Connections => parse_connection_line(&mut p, line, &tokens)?,
            Section::Run => parse_run_line(&mut p, line, &tokens)?,
            Section::Sweep => parse_sweep_line(&mut p, line, &tokens)?,
        }
    }

    if p.run_line == 0 {
        return Err(ScenarioError::Invalid(
            "scenario is missing a [run] section".into(),
        ));
    }
    if !p.saw_duration {
        return Err(err(
            p.run_line,
            "the [run] section must set duration or until_complete",
        ));
    }
    if p.sweep_line != 0 {
        let param = p
            .sweep_param
            .take()
            .ok_or_else(|| err(p.sweep_line, "the [sweep] section must set param"))?;
        let values = p
            .sweep_values
            .take()
            .ok_or_else(|| err(p.sweep_line, "the [sweep] section must set values"))?;
        p.scenario.sweep = Some(SweepConfig { param, values });
    }

    // Attribute semantic flaws to the declaring line.
    p.scenario.validate().map_err(|flaw| match &flaw {
        Flaw::Link { index, msg } => err(p.link_lines[*index], msg.clone()),
        Flaw::Conn { index, msg } => err(p.conn_lines[*index], msg.clone()),
        Flaw::Run(msg) => err(p.run_line, msg.clone()),
        Flaw::Sweep(msg) => err(p.sweep_line, msg.clone()),
        Flaw::Global(msg) => ScenarioError::Invalid(msg.clone()),
    })?;
    Ok(p.scenario)
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64, ScenarioError> {
    value
        .parse::<f64>()
        .map_err(|_| err(line, format!("{key}: expected a number, got {value}")))
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64, ScenarioError> {
    value
        .parse::<u64>()
        .map_err(|_| err(line, format!("{key}: expected a non-negative integer, got {value}")))
}

/// Split `key=value`; errors on anything else.
fn key_value(line: usize, token: &str) -> Result<(&str, &str), ScenarioError> {
    token
        .split_once('=')
        .ok_or_else(|| err(line, format!("expected key=value, got {token}")))
}

fn parse_topology_line(
    p: &mut Parser,
    line: usize,
    tokens: &[&str],
) -> Result<(), ScenarioError> {
    match tokens[0] {
        "node" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: node <name>"));
            }
            if p.scenario.nodes.iter().any(|n| n == tokens[1]) {
                return Err(err(line, format!("duplicate node {}", tokens[1])));
            }
            p.scenario.nodes.push(tokens[1].to_string());
        }
        "link" => {
            if tokens.len() < 5 {
                return Err(err(
                    line,
                    "usage: link <from> <to> <bandwidth_bps> <prop_delay_s> [key=value ...]",
                ));
            }
            let mut link = LinkDef::new(tokens[1], tokens[2], 0.0, 0.0);
            link.bandwidth_bps = parse_f64(line, "bandwidth", tokens[3])?;
            link.prop_delay_s = parse_f64(line, "prop_delay", tokens[4])?;
            for token in &tokens[5..] {
                let (key, value) = key_value(line, token)?;
                match key {
                    "capacity" => {
                        link.capacity = if value == "inf" {
                            None
                        } else {
                            Some(parse_u64(line, key, value)? as usize)
                        }
                    }
                    "service" => {
                        link.service = match value {
                            "fifo" => ServicePolicy::Fifo,
                            "rr" => ServicePolicy::RoundRobin,
                            _ => return Err(err(line, format!("service must be fifo or rr, got {value}"))),
                        }
                    }
                    "drop" => {
                        link.drop = match value {
                            "tail" => DropPolicy::DropTail,
                            "head" => DropPolicy::DropHead,
                            "random" => DropPolicy::Random,
                            _ => {
                                return Err(err(
                                    line,
                                    format!("drop must be tail, head, or random, got {value}"),
                                ))
                            }
                        }
                    }
                    "mark" => {
                        link.mark_threshold = if value == "off" {
                            None
                        } else {
                            Some(parse_u64(line, key, value)? as usize)
                        }
                    }
                    "choke" => link.choke_on_drop = parse_on_off(line, key, value)?,
                    other => return Err(err(line, format!("unknown link key {other}"))),
                }
            }
            p.scenario.links.push(link);
            p.link_lines.push(line);
        }
        other => return Err(err(line, format!("unknown topology directive {other}"))),
    }
    Ok(())
}

fn parse_on_off(line: usize, key: &str, value: &str) -> Result<bool, ScenarioError> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(err(line, format!("{key} must be on or off, got {value}"))),
    }
}

fn parse_connection_line(
    p: &mut Parser,
    line: usize,
    tokens: &[&str],
) -> Result<(), ScenarioError> {
    if tokens[0] != "conn" {
        return Err(err(
            line,
            format!("unknown connections directive {}", tokens[0]),
        ));
    }
    if tokens.len() < 5 {
        return Err(err(
            line,
            "usage: conn <name> <src> <dst> key=value ... (workload= and transport= required)",
        ));
    }
    let mut conn = ConnDef::new(tokens[1], tokens[2], tokens[3], Workload::File { count: 1 });
    let mut saw_workload = false;
    let mut saw_transport = false;
    // Keys that only make sense on a reliable (window/rate) transport.
    let mut reliable_keys: Vec<&str> = Vec::new();
    for token in &tokens[4..] {
        let (key, value) = key_value(line, token)?;
        match key {
            "workload" => {
                saw_workload = true;
                conn.workload = match value.split_once(':') {
                    Some(("file", n)) => Workload::File {
                        count: parse_u64(line, key, n)?,
                    },
                    Some(("cbr", r)) => Workload::Cbr {
                        rate_bps: parse_f64(line, key, r)?,
                    },
                    Some(("poisson", r)) => Workload::Poisson {
                        rate_bps: parse_f64(line, key, r)?,
                    },
                    _ => {
                        return Err(err(
                            line,
                            format!("workload must be file:N, cbr:BPS, or poisson:BPS, got {value}"),
                        ))
                    }
                };
            }
            "size" => {
                conn.size = match value.split_once(':') {
                    Some(("exp", m)) => SizeDist::Exp {
                        mean_bits: parse_f64(line, key, m)?,
                    },
                    Some(_) => {
                        return Err(err(
                            line,
                            format!("size must be BITS or exp:MEAN_BITS, got {value}"),
                        ))
                    }
                    None => SizeDist::Fixed {
                        bits: parse_u64(line, key, value)?,
                    },
                };
            }
            "transport" => {
                saw_transport = true;
                conn.transport = match value {
                    "open" => TransportKind::Open,
                    "window" => TransportKind::Window,
                    "rate" => TransportKind::Rate,
                    _ => {
                        return Err(err(
                            line,
                            format!("transport must be open, window, or rate, got {value}"),
                        ))
                    }
                };
            }
            "scheme" => {
                reliable_keys.push(key);
                conn.scheme = match value {
                    "static" => Scheme::Static,
                    "cute" => Scheme::Cute,
                    "linear" => Scheme::Linear,
                    "slowstart" => Scheme::SlowStart,
                    "binary" => Scheme::BinaryFeedback,
                    "delay" => Scheme::DelayBased,
                    _ => return Err(err(line, format!("unknown scheme {value}"))),
                };
            }
            "window" => {
                reliable_keys.push(key);
                conn.window = parse_f64(line, key, value)?;
            }
            "max_window" => {
                reliable_keys.push(key);
                conn.params.max_window = parse_f64(line, key, value)?;
            }
            "retx" => {
                reliable_keys.push(key);
                conn.retransmit = match value {
                    "gobackn" => RetransmitPolicy::GoBackN,
                    "first" => RetransmitPolicy::FirstOnly,
                    _ => {
                        return Err(err(
                            line,
                            format!("retx must be gobackn or first, got {value}"),
                        ))
                    }
                };
            }
            "recv" => {
                reliable_keys.push(key);
                conn.receiver = match value {
                    "cache" => ReceiverMode::Cache,
                    "discard" => ReceiverMode::Discard,
                    _ => {
                        return Err(err(
                            line,
                            format!("recv must be cache or discard, got {value}"),
                        ))
                    }
                };
            }
            "rto" => {
                reliable_keys.push(key);
                conn.rto = match value.split_once(':') {
                    Some(("fixed", t)) => RtoSpec::Fixed(parse_f64(line, key, t)?),
                    None if value == "adaptive" => RtoSpec::Adaptive,
                    _ => {
                        return Err(err(
                            line,
                            format!("rto must be fixed:SECONDS or adaptive, got {value}"),
                        ))
                    }
                };
            }
            "initial_rto" => {
                reliable_keys.push(key);
                conn.initial_rto = parse_f64(line, key, value)?;
            }
            "ack_every" => {
                reliable_keys.push(key);
                conn.ack_every = parse_u64(line, key, value)?;
            }
            "rate_limit" => {
                reliable_keys.push(key);
                conn.rate_limit_bps = Some(parse_f64(line, key, value)?);
            }
            "burst" => {
                reliable_keys.push(key);
                conn.burst_bits = Some(parse_f64(line, key, value)?);
            }
            "choke_response" => {
                reliable_keys.push(key);
                conn.choke_response = parse_on_off(line, key, value)?;
            }
            "acks_per_increase" => {
                reliable_keys.push(key);
                conn.params.acks_per_increase = parse_u64(line, key, value)?;
            }
            "decrease_factor" => {
                reliable_keys.push(key);
                conn.params.decrease_factor = parse_f64(line, key, value)?;
            }
            "set_fraction" => {
                reliable_keys.push(key);
                conn.params.set_fraction = parse_f64(line, key, value)?;
            }
            "delay_ratio" => {
                reliable_keys.push(key);
                conn.params.delay_ratio = parse_f64(line, key, value)?;
            }
            "choke_factor" => {
                reliable_keys.push(key);
                conn.params.choke_factor = parse_f64(line, key, value)?;
            }
            other => return Err(err(line, format!("unknown connection key {other}"))),
        }
    }
    if !saw_workload {
        return Err(err(line, format!("connection {}: workload is required", conn.name)));
    }
    if !saw_transport {
        return Err(err(line, format!("connection {}: transport is required", conn.name)));
    }
    if conn.transport == TransportKind::Open {
        if let Some(key) = reliable_keys.first() {
            return Err(err(
                line,
                format!(
                    "connection {}: key {key} does not apply to transport=open",
                    conn.name
                ),
            ));
        }
    }
    p.scenario.connections.push(conn);
    p.conn_lines.push(line);
    Ok(())
}

fn parse_run_line(p: &mut Parser, line: usize, tokens: &[&str]) -> Result<(), ScenarioError> {
    let run = &mut p.scenario.run;
    match tokens[0] {
        "duration" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: duration <seconds>"));
            }
            if p.saw_duration {
                return Err(err(line, "duration/until_complete set twice"));
            }
            p.saw_duration = true;
            run.stop = StopRule::Duration(parse_f64(line, "duration", tokens[1])?);
        }
        "until_complete" => {
            if tokens.len() != 1 {
                return Err(err(line, "until_complete takes no arguments"));
            }
            if p.saw_duration {
                return Err(err(line, "duration/until_complete set twice"));
            }
            p.saw_duration = true;
            run.stop = StopRule::UntilComplete;
        }
        "max_events" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: max_events <count>"));
            }
            run.max_events = parse_u64(line, "max_events", tokens[1])?;
        }
        "warmup" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: warmup <fraction>"));
            }
            run.warmup_frac = parse_f64(line, "warmup", tokens[1])?;
        }
        "bottleneck" => {
            if tokens.len() != 3 {
                return Err(err(line, "usage: bottleneck <from> <to>"));
            }
            run.bottleneck = Some((tokens[1].to_string(), tokens[2].to_string()));
        }
        "ack_size" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: ack_size <bits>"));
            }
            run.ack_size_bits = parse_u64(line, "ack_size", tokens[1])?;
        }
        "choke_size" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: choke_size <bits>"));
            }
            run.choke_size_bits = parse_u64(line, "choke_size", tokens[1])?;
        }
        "seed" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: seed <integer>"));
            }
            run.seed = parse_u64(line, "seed", tokens[1])?;
        }
        other => return Err(err(line, format!("unknown run key {other}"))),
    }
    Ok(())
}

fn parse_sweep_line(p: &mut Parser, line: usize, tokens: &[&str]) -> Result<(), ScenarioError> {
    match tokens[0] {
        "param" => {
            if tokens.len() != 2 {
                return Err(err(line, "usage: param <dotted.path>"));
            }
            p.sweep_param = Some(tokens[1].to_string());
        }
        "values" => {
            if tokens.len() < 2 {
                return Err(err(line, "usage: values <v1> <v2> ..."));
            }
            let mut values = Vec::with_capacity(tokens.len() - 1);
            for t in &tokens[1..] {
                values.push(parse_f64(line, "values", t)?);
            }
            p.sweep_values = Some(values);
        }
        other => return Err(err(line, format!("unknown sweep key {other}"))),
    }
    Ok(())
}

/// Canonical text form. Every field is written explicitly, so the output is
/// self-documenting and immune to default drift; re-parsing yields an equal
/// scenario.
pub fn export(s: &Scenario) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    push(&mut out, format!("scenario {}", s.name));
    push(&mut out, String::new());
    push(&mut out, "[topology]".into());
    for n in &s.nodes {
        push(&mut out, format!("node {n}"));
    }
    for l in &s.links {
        let capacity = match l.capacity {
            None => "inf".to_string(),
            Some(c) => c.to_string(),
        };
        let service = match l.service {
            ServicePolicy::Fifo => "fifo",
            ServicePolicy::RoundRobin => "rr",
        };
        let drop = match l.drop {
            DropPolicy::DropTail => "tail",
            DropPolicy::DropHead => "head",
            DropPolicy::Random => "random",
        };
        let mark = match l.mark_threshold {
            None => "off".to_string(),
            Some(m) => m.to_string(),
        };
        let choke = if l.choke_on_drop { "on" } else { "off" };
        push(
            &mut out,
            format!(
                "link {} {} {} {} capacity={} service={} drop={} mark={} choke={}",
                l.from, l.to, l.bandwidth_bps, l.prop_delay_s, capacity, service, drop, mark, choke
            ),
        );
    }
    push(&mut out, String::new());
    push(&mut out, "[connections]".into());
    for c in &s.connections {
        let workload = match c.workload {
            Workload::File { count } => format!("file:{count}"),
            Workload::Cbr { rate_bps } => format!("cbr:{rate_bps}"),
            Workload::Poisson { rate_bps } => format!("poisson:{rate_bps}"),
        };
        let size = match c.size {
            SizeDist::Fixed { bits } => format!("{bits}"),
            SizeDist::Exp { mean_bits } => format!("exp:{mean_bits}"),
        };
        let transport = match c.transport {
            TransportKind::Open => "open",
            TransportKind::Window => "window",
            TransportKind::Rate => "rate",
        };
        let mut line = format!(
            "conn {} {} {} workload={workload} size={size} transport={transport}",
            c.name, c.src, c.dst
        );
        if c.transport != TransportKind::Open {
            let retx = match c.retransmit {
                RetransmitPolicy::GoBackN => "gobackn",
                RetransmitPolicy::FirstOnly => "first",
            };
            let recv = match c.receiver {
                ReceiverMode::Cache => "cache",
                ReceiverMode::Discard => "discard",
            };
            let rto = match c.rto {
                RtoSpec::Fixed(t) => format!("fixed:{t}"),
                RtoSpec::Adaptive => "adaptive".to_string(),
            };
            line.push_str(&format!(
                " scheme={} window={} max_window={} retx={retx} recv={recv} rto={rto} \
                 initial_rto={} ack_every={} choke_response={}",
                c.scheme.name(),
                c.window,
                c.params.max_window,
                c.initial_rto,
                c.ack_every,
                if c.choke_response { "on" } else { "off" },
            ));
            if let Some(rate) = c.rate_limit_bps {
                line.push_str(&format!(" rate_limit={rate}"));
            }
            if let Some(burst) = c.burst_bits {
                line.push_str(&format!(" burst={burst}"));
            }
            line.push_str(&format!(
                " acks_per_increase={} decrease_factor={} set_fraction={} delay_ratio={} choke_factor={}",
                c.params.acks_per_increase,
                c.params.decrease_factor,
                c.params.set_fraction,
                c.params.delay_ratio,
                c.params.choke_factor,
            ));
        }
        push(&mut out, line);
    }
    push(&mut out, String::new());
    push(&mut out, "[run]".into());
    match s.run.stop {
        StopRule::Duration(d) => push(&mut out, format!("duration {d}")),
        StopRule::UntilComplete => push(&mut out, "until_complete".into()),
    }
    push(&mut out, format!("max_events {}", s.run.max_events));
    push(&mut out, format!("warmup {}", s.run.warmup_frac));
    if let Some((from, to)) = &s.run.bottleneck {
        push(&mut out, format!("bottleneck {from} {to}"));
    }
    push(&mut out, format!("ack_size {}", s.run.ack_size_bits));
    push(&mut out, format!("choke_size {}", s.run.choke_size_bits));
    push(&mut out, format!("seed {}", s.run.seed));
    if let Some(sweep) = &s.sweep {
        push(&mut out, String::new());
        push(&mut out, "[sweep]".into());
        push(&mut out, format!("param {}", sweep.param));
        let values: Vec<String> = sweep.values.iter().map(|v| v.to_string()).collect();
        push(&mut out, format!("values {}", values.join(" ")));
    }
    out
}
