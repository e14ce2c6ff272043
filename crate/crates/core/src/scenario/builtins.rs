//! The built-in experiment library.
//!
//! Each scenario is authored as a plain scenario file embedded in the binary,
//! so `export` shows exactly what `run` executes and every constant is config,
//! not code. The library groups into five studies:
//!
//! * `myth-buffers*` — unbounded buffers do not prevent collapse; a small
//!   buffer plus an adaptive window does.
//! * `myth-fastlink*` — upgrading one link can slow a transfer down by orders
//!   of magnitude when the transport is naive; an adaptive window repairs it.
//! * `myth-balanced*` — a router fed by two links of its own output speed
//!   still congests; halving demand to capacity clears it.
//! * `knee-*` / `cliff-*` — load sweeps locating the knee (max power) of an
//!   open-loop queue and the cliff (goodput collapse) of a closed loop.
//! * `fairness-*` — FIFO vs round-robin service under an aggressive source.
//! * `choke-rein` — a router that sends choke packets on drop, reining in a
//!   responsive sender.
//! * `schemes-*` — one file transfer, five window schemes, same bottleneck:
//!   bit- and delay-fed schemes avoid loss; probing schemes pay in timeouts.

const MYTH_BUFFERS: &str = "\
# Unbounded bottleneck buffer, naive transport: offered load is twice the
# bottleneck rate, the retransmission timer is pinned at 10x the unloaded
# round trip, and go-back-n resends everything outstanding. Queueing delay
# grows without bound, timers fire while data is still queued, and the
# bottleneck ends up carrying mostly duplicates.
[topology]
node S
node R
node D
link S R 1e6 0.001
link R D 1e5 0.001
link D R 1e6 0.001
link R S 1e6 0.001

[connections]
conn c1 S D workload=cbr:2e5 size=8000 transport=rate rate_limit=2e5 burst=8000 \
  scheme=static window=1e9 max_window=1e9 retx=gobackn recv=discard rto=fixed:0.93

[run]
duration 60
warmup 0.1
bottleneck R D
";

const MYTH_BUFFERS_REPAIRED: &str = "\
# Same offered overload, but the bottleneck buffer is capped at 20 packets and
# the sender runs an adaptive window (reset to 1 on timeout, +1 per window of
# acks), an adaptive timer, first-only retransmission, and an out-of-order
# cache. Losses happen early and cheaply; almost everything carried is new.
[topology]
node S
node R
node D
link S R 1e6 0.001
link R D 1e5 0.001 capacity=20
link D R 1e6 0.001
link R S 1e6 0.001

[connections]
conn c1 S D workload=cbr:2e5 size=8000 transport=window scheme=cute window=1 \
  max_window=64 retx=first recv=cache rto=adaptive initial_rto=1

[run]
duration 60
warmup 0.1
bottleneck R D
";

const MYTH_FASTLINK: &str = "\
# Four nodes in series, 19.2 kbit/s links, 10 ms propagation each way, and a
# 1000-packet file of 8000-bit packets. The window is fixed at 16, the timer
# at 20 s, and retransmission is go-back-n. All links run at the same speed,
# so nothing ever overflows the 10-packet router buffers: the transfer is a
# clean pipeline finishing in about 417 s of serialization.
[topology]
node n1
node n2
node n3
node n4
link n1 n2 19200 0.01
link n2 n3 19200 0.01 capacity=10
link n3 n4 19200 0.01 capacity=10
link n4 n3 19200 0.01
link n3 n2 19200 0.01
link n2 n1 19200 0.01

[connections]
conn xfer n1 n4 workload=file:1000 size=8000 transport=window scheme=static \
  window=16 max_window=16 retx=gobackn recv=discard rto=fixed:20

[run]
until_complete
bottleneck n2 n3
";

const MYTH_FASTLINK_UPGRADED: &str = "\
# The first link upgraded to 1 Mbit/s, everything else identical. The sender
# now bursts its whole 16-packet window into the 10-packet buffer at n2,
# loses the tail of every burst, stalls on the 20 s timer, and repeats.
# The upgraded network is several times SLOWER than the all-19.2k baseline.
[topology]
node n1
node n2
node n3
node n4
link n1 n2 1e6 0.01
link n2 n3 19200 0.01 capacity=10
link n3 n4 19200 0.01 capacity=10
link n4 n3 19200 0.01
link n3 n2 19200 0.01
link n2 n1 19200 0.01

[connections]
conn xfer n1 n4 workload=file:1000 size=8000 transport=window scheme=static \
  window=16 max_window=16 retx=gobackn recv=discard rto=fixed:20

[run]
until_complete
bottleneck n2 n3
";

const MYTH_FASTLINK_REPAIRED: &str = "\
# The upgraded topology again, but the transport adapts: window starts at 1
# and backs off to 1 on loss, the timer tracks measured round trips with
# backoff, only the lost packet is resent, and the receiver caches
# out-of-order arrivals. Completion returns to within a fraction of the
# baseline.
[topology]
node n1
node n2
node n3
node n4
link n1 n2 1e6 0.01
link n2 n3 19200 0.01 capacity=10
link n3 n4 19200 0.01 capacity=10
link n4 n3 19200 0.01
link n3 n2 19200 0.01
link n2 n1 19200 0.01

[connections]
conn xfer n1 n4 workload=file:1000 size=8000 transport=window scheme=cute \
  window=1 max_window=64 retx=first recv=cache rto=adaptive initial_rto=2

[run]
until_complete
bottleneck n2 n3
";

const MYTH_BALANCED: &str = "\
# A router whose input links sum to twice its output rate, all 1 Gbit/s.
# Two deterministic sources send flat out; the output link is saturated and
# the backlog grows at exactly (2 - 1) Gbit/s: 10 Mbit after 10 ms.
[topology]
node A
node B
node R
node C
link A R 1e9 0
link B R 1e9 0
link R C 1e9 0

[connections]
conn a A C workload=cbr:1e9 size=8000 transport=open
conn b B C workload=cbr:1e9 size=8000 transport=open

[run]
duration 0.01
bottleneck R C
";

const MYTH_BALANCED_HALVED: &str = "\
# The same configuration with both inputs halved: demand equals capacity,
# which is full utilization, not congestion — the backlog stays at zero.
# The end time sits off the 16 us arrival grid so the closing snapshot is
# taken while the later half of a synchronized pair is in service, not at
# the very instant a new pair lands behind it.
[topology]
node A
node B
node R
node C
link A R 1e9 0
link B R 1e9 0
link R C 1e9 0

[connections]
conn a A C workload=cbr:5e8 size=8000 transport=open
conn b B C workload=cbr:5e8 size=8000 transport=open

[run]
duration 0.010004
bottleneck R C
";

const KNEE_OPEN: &str = "\
# Open-loop Poisson traffic with exponential packet sizes into a single
# 1 Mbit/s link: a memoryless single-server queue. Sweeping the offered load
# from 0.1 to 0.9 of capacity traces the classic throughput/delay curve;
# power (throughput/delay) peaks at half capacity — the knee.
[topology]
node S
node D
link S D 1e6 0

[connections]
conn c1 S D workload=poisson:5e5 size=exp:8000 transport=open

[run]
duration 600
warmup 0.1
bottleneck S D

[sweep]
param connections.c1.rate
values 1e5 2e5 3e5 4e5 5e5 6e5 7e5 8e5 9e5
";

const KNEE_OPEN_DET: &str = "\
# The deterministic twin of knee-open: constant bit rate, fixed packet size.
# With no randomness there is no queueing below capacity, delay stays flat,
# and the knee moves to the top of the swept range — deterministic traffic
# buys a later knee than Poisson traffic.
[topology]
node S
node D
link S D 1e6 0

[connections]
conn c1 S D workload=cbr:5e5 size=8000 transport=open

[run]
duration 600
warmup 0.1
bottleneck S D

[sweep]
param connections.c1.rate
values 1e5 2e5 3e5 4e5 5e5 6e5 7e5 8e5 9e5
";

const CLIFF_CLOSED: &str = "\
# Closed-loop overload: a reliable sender with a fixed 130 ms timer,
# go-back-n, a discarding receiver, and a 20-packet bottleneck buffer.
# Below capacity the sweep tracks offered load; past capacity the queue
# pins at its limit, round trips exceed the timer, and go-back-n floods the
# bottleneck with duplicates — goodput falls off a cliff beyond load 1.
[topology]
node S
node R
node D
link S R 1e7 0.001
link R D 1e6 0.001 capacity=20
link D R 1e7 0.001
link R S 1e7 0.001

[connections]
conn c1 S D workload=poisson:5e5 size=8000 transport=rate rate_limit=2e6 burst=16000 \
  scheme=static window=64 max_window=64 retx=gobackn recv=discard rto=fixed:0.13

[run]
duration 60
warmup 0.1
bottleneck R D

[sweep]
param connections.c1.rate
values 2e5 4e5 6e5 8e5 1.05e6 1.25e6 1.45e6 1.65e6 1.85e6
";

const FAIRNESS_FIFO: &str = "\
# Four Poisson sources share one overloaded 1 Mbit/s bottleneck; f4 offers
# three times the rate of the others. First-in-first-out service hands out
# goodput in proportion to offered load, so the aggressor takes half the
# link and the fairness index lands near 0.75.
[topology]
node s1
node s2
node s3
node s4
node R
node D
link s1 R 1e7 0.001
link s2 R 1e7 0.001
link s3 R 1e7 0.001
link s4 R 1e7 0.001
link R D 1e6 0.001 capacity=50 service=fifo drop=head

[connections]
conn f1 s1 D workload=poisson:3e5 size=8000 transport=open
conn f2 s2 D workload=poisson:3e5 size=8000 transport=open
conn f3 s3 D workload=poisson:3e5 size=8000 transport=open
conn f4 s4 D workload=poisson:9e5 size=8000 transport=open

[run]
duration 60
warmup 0.1
bottleneck R D
";

const FAIRNESS_RR: &str = "\
# The same offered traffic, but the bottleneck serves connections in
# round-robin order (drop-head eviction, as before, so the oldest — the
# hog's — packets absorb the overflow). Each backlogged connection gets an
# equal service share and the index climbs toward 1.
[topology]
node s1
node s2
node s3
node s4
node R
node D
link s1 R 1e7 0.001
link s2 R 1e7 0.001
link s3 R 1e7 0.001
link s4 R 1e7 0.001
link R D 1e6 0.001 capacity=50 service=rr drop=head

[connections]
conn f1 s1 D workload=poisson:3e5 size=8000 transport=open
conn f2 s2 D workload=poisson:3e5 size=8000 transport=open
conn f3 s3 D workload=poisson:3e5 size=8000 transport=open
conn f4 s4 D workload=poisson:9e5 size=8000 transport=open

[run]
duration 60
warmup 0.1
bottleneck R D
";

const FAIRNESS_RR_EQUAL: &str = "\
# Round-robin under symmetric overload: four identical sources. Equal
# treatment of equals — the fairness index should be indistinguishable
# from 1.
[topology]
node s1
node s2
node s3
node s4
node R
node D
link s1 R 1e7 0.001
link s2 R 1e7 0.001
link s3 R 1e7 0.001
link s4 R 1e7 0.001
link R D 1e6 0.001 capacity=50 service=rr drop=head

[connections]
conn f1 s1 D workload=poisson:4.5e5 size=8000 transport=open
conn f2 s2 D workload=poisson:4.5e5 size=8000 transport=open
conn f3 s3 D workload=poisson:4.5e5 size=8000 transport=open
conn f4 s4 D workload=poisson:4.5e5 size=8000 transport=open

[run]
duration 60
warmup 0.1
bottleneck R D
";

const CHOKE_REIN: &str = "\
# Feedback by choke packet: the bottleneck router answers every drop with a
# choke sent back to the source, and the sender halves its window on receipt
# (at most once per window of acks). The linear-growth window probes upward,
# gets choked, and settles around the buffer size. The retransmit timer is
# fixed and generous so that the choke feedback, not timer expiry, is the
# signal doing the reining.
[topology]
node S
node R
node D
link S R 1e7 0.001
link R D 1e6 0.001 capacity=10 choke=on
link D R 1e7 0.001
link R S 1e7 0.001

[connections]
conn c1 S D workload=file:2000 size=8000 transport=window scheme=linear window=1 \
  max_window=64 retx=gobackn recv=cache rto=fixed:0.2 choke_response=on

[run]
until_complete
bottleneck R D
";

/// One 3000-packet transfer over a marking bottleneck, per scheme.
macro_rules! schemes_scenario {
    ($comment:literal, $conn:literal) => {
        concat!(
            $comment,
            "[topology]\n",
            "node S\n",
            "node R\n",
            "node D\n",
            "link S R 1e7 0.001\n",
            "link R D 1e6 0.001 capacity=20 mark=5\n",
            "link D R 1e7 0.001\n",
            "link R S 1e7 0.001\n",
            "\n[connections]\n",
            $conn,
            "\n\n[run]\n",
            "until_complete\n",
            "bottleneck R D\n"
        )
    };
}

const SCHEMES_CUTE: &str = schemes_scenario!(
    "# Scheme study: timeout-probed parabolic ramp. Grows +1 per window of\n\
     # acks until a loss, then restarts from 1. Probing finds the buffer\n\
     # limit the hard way, so expect a few timeouts.\n",
    "conn c1 S D workload=file:3000 size=8000 transport=window scheme=cute window=1 \
  max_window=64 retx=first recv=cache rto=adaptive initial_rto=1"
);

const SCHEMES_LINEAR: &str = schemes_scenario!(
    "# Scheme study: linear ramp (+1 per 8 acks), timeout reset to 1.\n",
    "conn c1 S D workload=file:3000 size=8000 transport=window scheme=linear window=1 \
  max_window=64 retx=first recv=cache rto=adaptive initial_rto=1"
);

const SCHEMES_SLOWSTART: &str = schemes_scenario!(
    "# Scheme study: slow start. Per-ack doubling below the threshold, one\n\
     # per window above it; timeout halves the threshold and restarts at 1.\n",
    "conn c1 S D workload=file:3000 size=8000 transport=window scheme=slowstart window=1 \
  max_window=64 retx=first recv=cache rto=adaptive initial_rto=1"
);

const SCHEMES_BINARY: &str = schemes_scenario!(
    "# Scheme study: binary feedback. The bottleneck sets a congestion bit\n\
     # when five or more packets wait; the receiver echoes it in acks; the\n\
     # sender decreases 12.5% when half a window's acks carry the bit, else\n\
     # adds 1. Converges without ever dropping a packet.\n",
    "conn c1 S D workload=file:3000 size=8000 transport=window scheme=binary window=1 \
  max_window=64 retx=first recv=cache rto=adaptive initial_rto=1"
);

const SCHEMES_DELAY: &str = schemes_scenario!(
    "# Scheme study: delay-based. Compares smoothed round-trip time to the\n\
     # minimum observed; backs off 12.5% when the ratio exceeds 1.5, else\n\
     # adds 1. Needs no router support and drops nothing.\n",
    "conn c1 S D workload=file:3000 size=8000 transport=window scheme=delay window=1 \
  max_window=64 retx=first recv=cache rto=adaptive initial_rto=1"
);

/// Name → authored text for every built-in scenario, in display order.
pub const BUILTINS: &[(&str, &str)] = &[
    ("myth-buffers", MYTH_BUFFERS),
    ("myth-buffers-repaired", MYTH_BUFFERS_REPAIRED),
    ("myth-fastlink", MYTH_FASTLINK),
    ("myth-fastlink-upgraded", MYTH_FASTLINK_UPGRADED),
    ("myth-fastlink-repaired", MYTH_FASTLINK_REPAIRED),
    ("myth-balanced", MYTH_BALANCED),
    ("myth-balanced-halved", MYTH_BALANCED_HALVED),
    ("knee-open", KNEE_OPEN),
    ("knee-open-det", KNEE_OPEN_DET),
    ("cliff-closed", CLIFF_CLOSED),
    ("fairness-fifo", FAIRNESS_FIFO),
    ("fairness-rr", FAIRNESS_RR),
    ("fairness-rr-equal", FAIRNESS_RR_EQUAL),
    ("choke-rein", CHOKE_REIN),
    ("schemes-cute", SCHEMES_CUTE),
    ("schemes-linear", SCHEMES_LINEAR),
    ("schemes-slowstart", SCHEMES_SLOWSTART),
    ("schemes-binary", SCHEMES_BINARY),
    ("schemes-delay", SCHEMES_DELAY),
];

pub fn names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

pub fn text(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
