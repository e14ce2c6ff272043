//! Acceptance gate: twelve pinned criteria the finished simulator must meet,
//! one test per criterion. Each test prints a single `ACCEPTANCE nn PASS`
//! line when its criterion holds; a failed assertion carries the analysis in
//! its message. Every threshold is a constant in this file — nothing is
//! computed from the run being judged.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the verdict
//! lines.

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use congestion_lab::cc::{Controller, Scheme, SchemeParams};
use congestion_lab::metrics::{fairness_index, is_congested};
use congestion_lab::scenario::builtins;
use congestion_lab::sweep::run_sweep;
use congestion_lab::{RunOptions, RunOutput, Scenario, Simulation};

fn verdict(n: usize, what: &str) {
    println!("ACCEPTANCE {n:02} PASS: {what}");
}

fn run_builtin(name: &str) -> RunOutput {
    let scenario = Scenario::builtin(name).expect("known builtin");
    Simulation::new(scenario, RunOptions::default())
        .expect("builtin validates")
        .run()
        .unwrap_or_else(|e| panic!("builtin {name} failed: {e}"))
}

fn within_budget(n: usize, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "ACCEPTANCE {n:02} FAIL: took {elapsed:?}, budget {budget:?}"
    );
}

/// 1. A window transfer over equal-rate links finishes in serialization time
///    (1000 packets x 8000 bits / 19200 bit/s = 416.7 s, +-10%), and making
///    the first link 38x faster makes the same transfer at least 3x SLOWER,
///    because the fast entry hop overflows the unchanged mid-path buffer.
#[test]
fn criterion_01_faster_entry_link_slows_the_transfer() {
    let t0 = Instant::now();
    let base = run_builtin("myth-fastlink").aggregate().completion_s.unwrap();
    let upgraded = run_builtin("myth-fastlink-upgraded")
        .aggregate()
        .completion_s
        .unwrap();
    let analytic = 1000.0 * 8000.0 / 19200.0;
    assert!(
        (base / analytic - 1.0).abs() <= 0.10,
        "ACCEPTANCE 01 FAIL: baseline completion {base:.2} s strays more than \
         10% from the {analytic:.1} s serialization bound"
    );
    assert!(
        upgraded / base >= 3.0,
        "ACCEPTANCE 01 FAIL: upgraded hop finished in {upgraded:.2} s, less \
         than 3x the {base:.2} s baseline — the slowdown did not reproduce"
    );
    within_budget(1, t0.elapsed(), Duration::from_secs(10));
    verdict(
        1,
        &format!("speed mismatch: {base:.1} s baseline vs {upgraded:.1} s upgraded"),
    );
}

/// 2. Adding adaptive timers and slow-start to the upgraded topology repairs
///    it: completion within 1.5x of the all-equal baseline.
#[test]
fn criterion_02_adaptive_control_repairs_the_mismatch() {
    let t0 = Instant::now();
    let base = run_builtin("myth-fastlink").aggregate().completion_s.unwrap();
    let repaired = run_builtin("myth-fastlink-repaired")
        .aggregate()
        .completion_s
        .unwrap();
    assert!(
        repaired <= 1.5 * base,
        "ACCEPTANCE 02 FAIL: repaired completion {repaired:.2} s exceeds \
         1.5x the {base:.2} s baseline"
    );
    within_budget(2, t0.elapsed(), Duration::from_secs(10));
    verdict(2, &format!("repaired transfer: {repaired:.1} s vs {base:.1} s baseline"));
}

/// 3. With unbounded buffers and a timer pinned below the queueing delay the
///    bottleneck carries mostly duplicates (goodput <= 50% of throughput);
///    an adaptive timer on the same topology recovers goodput >= 90%.
#[test]
fn criterion_03_infinite_buffers_fill_with_duplicates() {
    let t0 = Instant::now();
    let broken = run_builtin("myth-buffers");
    let agg = broken.aggregate();
    let ratio = agg.goodput_bps / agg.throughput_bps.unwrap();
    assert!(
        ratio <= 0.5,
        "ACCEPTANCE 03 FAIL: goodput/throughput {ratio:.3} — the duplicate \
         storm did not materialize"
    );
    let repaired = run_builtin("myth-buffers-repaired");
    let agg = repaired.aggregate();
    let repaired_ratio = agg.goodput_bps / agg.throughput_bps.unwrap();
    assert!(
        repaired_ratio >= 0.9,
        "ACCEPTANCE 03 FAIL: adaptive timer only reached goodput ratio \
         {repaired_ratio:.3}"
    );
    within_budget(3, t0.elapsed(), Duration::from_secs(10));
    verdict(
        3,
        &format!("buffer myth: goodput ratio {ratio:.3} broken, {repaired_ratio:.3} repaired"),
    );
}

/// 4. Congestion is a demand/capacity mismatch, not a link-speed problem:
///    two 1 Gbit/s inputs into a 1 Gbit/s output build exactly the predicted
///    10^7-bit backlog in 10 ms, halving the demands leaves zero backlog,
///    and the congestion predicate agrees (sum > capacity, not >=).
#[test]
fn criterion_04_balanced_gigabit_links_still_congest() {
    let out = run_builtin("myth-balanced");
    let q = out
        .queues
        .iter()
        .find(|q| q.from == "R" && q.to == "C")
        .expect("bottleneck queue");
    let backlog = q.final_waiting_bits as f64;
    assert!(
        (backlog - 1e7).abs() <= 8000.0,
        "ACCEPTANCE 04 FAIL: backlog {backlog} bits, predicted 1e7 +- one packet"
    );
    let halved = run_builtin("myth-balanced-halved");
    let q = halved
        .queues
        .iter()
        .find(|q| q.from == "R" && q.to == "C")
        .expect("bottleneck queue");
    assert!(
        q.final_waiting_bits == 0 && q.drops == 0,
        "ACCEPTANCE 04 FAIL: demand equal to capacity queued {} bits, dropped {}",
        q.final_waiting_bits,
        q.drops
    );
    assert!(
        is_congested(&[1e9, 1e9], 1e9) && !is_congested(&[5e8, 5e8], 1e9),
        "ACCEPTANCE 04 FAIL: congestion predicate disagrees with demand > capacity"
    );
    verdict(4, &format!("balanced 1 Gbit/s inputs queue {backlog:.0} bits in 10 ms"));
}

/// 5. The open-loop load sweep has its power peak (the knee) at half the
///    bottleneck capacity, 5e5 bit/s +- one 1e5 grid step, found from nine
///    points in under 30 s.
#[test]
fn criterion_05_power_peaks_at_the_knee() {
    let t0 = Instant::now();
    let scenario = Scenario::builtin("knee-open").unwrap();
    let sweep = run_sweep(&scenario, RunOptions::default()).expect("sweep runs");
    assert_eq!(
        sweep.points.len(),
        9,
        "ACCEPTANCE 05 FAIL: expected the nine-point load grid"
    );
    let knee = sweep
        .knee_load
        .expect("ACCEPTANCE 05 FAIL: no knee located");
    assert!(
        (knee - 5e5).abs() <= 1e5,
        "ACCEPTANCE 05 FAIL: knee at {knee:.3e}, expected 5e5 +- 1e5"
    );
    within_budget(5, t0.elapsed(), Duration::from_secs(30));
    verdict(5, &format!("knee located at {knee:.3e} bit/s, half of capacity"));
}

/// 6. The closed-loop sweep collapses past saturation: the cliff sits at an
///    offered load strictly above capacity (1e6 bit/s), and goodput there
///    has fallen below half the pre-cliff peak — the link stays busy, but
///    with retransmissions and packets doomed to be dropped downstream.
#[test]
fn criterion_06_goodput_falls_off_a_cliff_past_saturation() {
    let scenario = Scenario::builtin("cliff-closed").unwrap();
    let sweep = run_sweep(&scenario, RunOptions::default()).expect("sweep runs");
    let cliff = sweep
        .cliff_load
        .expect("ACCEPTANCE 06 FAIL: no cliff located");
    assert!(
        cliff > 1e6,
        "ACCEPTANCE 06 FAIL: cliff at {cliff:.3e} is not past the 1e6 capacity"
    );
    let peak = sweep
        .points
        .iter()
        .map(|p| p.output.aggregate().goodput_bps)
        .fold(f64::MIN, f64::max);
    let at_cliff = sweep
        .points
        .iter()
        .find(|p| p.value == cliff)
        .expect("cliff point in sweep")
        .output
        .aggregate()
        .goodput_bps;
    assert!(
        at_cliff < 0.5 * peak,
        "ACCEPTANCE 06 FAIL: goodput at the cliff is {at_cliff:.3e}, \
         not below half the {peak:.3e} peak"
    );
    verdict(
        6,
        &format!("cliff at {cliff:.3e} bit/s: goodput {at_cliff:.2e} vs {peak:.2e} peak"),
    );
}

/// 7. The parabolic window ramp: raising the window by one per window of
///    acks means reaching window W from 1 costs exactly W(W-1)/2 acks.
///    Checked for W = 100 in under a second.
#[test]
fn criterion_07_window_ramp_counts_its_acks() {
    let t0 = Instant::now();
    let mut ctl = Controller::new(Scheme::Cute, 1.0, SchemeParams::default());
    let target = 100.0;
    let mut acks: u64 = 0;
    while ctl.window() < target {
        ctl.on_ack(1, false, None);
        acks += 1;
        assert!(
            acks <= 10_000,
            "ACCEPTANCE 07 FAIL: window stuck at {} after {acks} acks",
            ctl.window()
        );
    }
    assert_eq!(
        acks,
        100 * 99 / 2,
        "ACCEPTANCE 07 FAIL: window 1 -> 100 took {acks} acks, identity says 4950"
    );
    within_budget(7, t0.elapsed(), Duration::from_secs(1));
    verdict(7, "window ramp 1 -> 100 took exactly 4950 acks");
}

/// 8. Fairness: the index is exact on hand cases (one-of-four gets 0.25,
///    equal shares get 1.0); FIFO service lets an aggressive source convert
///    arrival share into bandwidth share (index < 0.8, aggressor above 45%),
///    while round-robin holds the index above 0.99 regardless of demand.
#[test]
fn criterion_08_round_robin_restores_fairness() {
    let idx = fairness_index(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(
        (idx - 0.25).abs() < 1e-12,
        "ACCEPTANCE 08 FAIL: one-of-four index {idx}"
    );
    let idx = fairness_index(&[5.0, 5.0, 5.0, 5.0]).unwrap();
    assert!(
        (idx - 1.0).abs() < 1e-12,
        "ACCEPTANCE 08 FAIL: equal-share index {idx}"
    );

    let fifo = run_builtin("fairness-fifo");
    let rr = run_builtin("fairness-rr");
    let fifo_idx = fifo.aggregate().fairness_index.unwrap();
    let rr_idx = rr.aggregate().fairness_index.unwrap();
    let share = |out: &RunOutput| {
        out.rows.iter().find(|r| r.conn == "f4").unwrap().goodput_bps
            / out.aggregate().goodput_bps
    };
    assert!(
        fifo_idx < 0.8,
        "ACCEPTANCE 08 FAIL: FIFO index {fifo_idx:.4} — unfairness did not reproduce"
    );
    assert!(
        share(&fifo) >= 0.45,
        "ACCEPTANCE 08 FAIL: FIFO aggressor share {:.3} stayed near fair",
        share(&fifo)
    );
    assert!(
        rr_idx >= 0.99 && rr_idx - fifo_idx >= 0.2,
        "ACCEPTANCE 08 FAIL: round-robin index {rr_idx:.4} vs FIFO {fifo_idx:.4}"
    );
    let equal = run_builtin("fairness-rr-equal").aggregate().fairness_index.unwrap();
    assert!(
        equal >= 0.99,
        "ACCEPTANCE 08 FAIL: equal demands under round-robin scored {equal:.4}"
    );
    verdict(
        8,
        &format!("fairness index {fifo_idx:.3} FIFO -> {rr_idx:.5} round-robin"),
    );
}

/// 9. Control-frequency discipline: in every built-in run, no controller
///    adjusts its window more often than once per window of acks plus once
///    per timeout or choke.
#[test]
fn criterion_09_controllers_respect_the_adjustment_budget() {
    for name in builtins::names() {
        let out = run_builtin(name);
        let violations = out.control_violations();
        assert!(
            violations.is_empty(),
            "ACCEPTANCE 09 FAIL: {name}: {violations:?}"
        );
    }
    verdict(9, "every controller stayed within its adjustment budget");
}

/// 10. Determinism at the file level: running the binary twice with the same
///     seed produces byte-identical summary, timeseries, and trace files,
///     for both a stochastic open-loop scenario and the choke scenario.
#[test]
fn criterion_10_equal_seeds_give_equal_bytes() {
    let base = std::env::temp_dir().join("congestion-lab-acceptance-10");
    let _ = fs::remove_dir_all(&base);
    for scenario in ["knee-open", "choke-rein"] {
        let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
        for attempt in 0..2 {
            let dir: PathBuf = base.join(format!("{scenario}-{attempt}"));
            fs::create_dir_all(&dir).expect("scratch dir");
            let status = Command::new(env!("CARGO_BIN_EXE_congestion-lab"))
                .args([
                    "run", scenario, "--seed", "7", "--trace", "--timeseries",
                    "--out", dir.to_str().unwrap(),
                ])
                .status()
                .expect("spawn binary");
            assert!(status.success(), "ACCEPTANCE 10 FAIL: {scenario} run errored");
            outputs.push(
                ["summary.csv", "timeseries.csv", "trace.log"]
                    .iter()
                    .map(|f| (f.to_string(), fs::read(dir.join(f)).expect("output file")))
                    .collect(),
            );
        }
        let second = outputs.pop().unwrap();
        let first = outputs.pop().unwrap();
        for ((name, a), (_, b)) in first.iter().zip(second.iter()) {
            assert!(
                a == b,
                "ACCEPTANCE 10 FAIL: {scenario}: {name} differs between equal-seed runs"
            );
        }
    }
    verdict(10, "equal seeds reproduce summary, timeseries, and trace byte for byte");
}

/// 11. Packet conservation: in every built-in run, injected equals consumed
///     plus dropped plus still-in-network, exactly, per packet kind.
#[test]
fn criterion_11_packets_are_conserved() {
    for name in builtins::names() {
        let out = run_builtin(name);
        let violations = out.conservation_violations();
        assert!(
            violations.is_empty(),
            "ACCEPTANCE 11 FAIL: {name}: {violations:?}"
        );
    }
    verdict(11, "injected == consumed + dropped + in-network in every scenario");
}

/// 12. Choke packets exist only where the scenario enables them: the choke
///     demo emits them and its sender heeds them; no other built-in injects
///     a single one.
#[test]
fn criterion_12_chokes_appear_only_when_asked() {
    let mut demo_chokes = 0;
    for name in builtins::names() {
        let out = run_builtin(name);
        let chokes = out.injected_by_kind[2];
        if name == "choke-rein" {
            let heeded: u64 = out.flows.iter().map(|f| f.totals.chokes_heeded).sum();
            assert!(
                chokes > 0 && heeded > 0,
                "ACCEPTANCE 12 FAIL: choke demo injected {chokes}, heeded {heeded}"
            );
            demo_chokes = chokes;
        } else {
            assert_eq!(
                chokes, 0,
                "ACCEPTANCE 12 FAIL: {name} injected choke packets"
            );
        }
    }
    verdict(
        12,
        &format!("{demo_chokes} chokes in the demo, zero everywhere else"),
    );
}
