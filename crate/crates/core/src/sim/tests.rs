// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::netlist::{elaborate, parse_netlist};
use proptest::prelude::*;

const PAIR: &str = "module p\ninput clk\ninput m\ninput d\noutput q\nwire t\n\
                    dff t d clock clk edge rising\nsdff q t clock clk mode m\nend";

fn pair() -> ElaboratedCircuit {
    elaborate(&parse_netlist(PAIR).unwrap(), &["clk"]).unwrap()
}

fn one_reg() -> ElaboratedCircuit {
    let text = "module r\ninput clk\ninput d\noutput q\ndff q d clock clk edge rising\nend";
    elaborate(&parse_netlist(text).unwrap(), &["clk"]).unwrap()
}

/// `d` symbols in `bits`, each held for `step` ps starting just after the
/// hold window of the edge at `first_edge + i*step`.
fn stream(mut s: Stimulus, bits: &[bool], first_edge: Time, step: Time, hold: Time) -> Stimulus {
    for (i, b) in bits.iter().enumerate() {
        let t = if i == 0 {
            0
        } else {
            first_edge + (i as Time - 1) * step + hold
        };
        s = s.drive("d", t, *b);
    }
    s
}

#[test]
fn init_queues_clock_and_rejects_bad_drives() {
    let c = pair();
    let m = DelayModel::default();
    let stim = Stimulus::default()
        .clock(ClockSpec::new("clk", 4000))
        .watch("clk");
    let mut sim = Simulation::new(&c, &m, &stim).unwrap();
    sim.run_until(8000).unwrap();
    let times: Vec<_> = sim.state().trace.iter().map(|e| e.time).collect();
    assert_eq!(times, vec![2000, 4000, 6000, 8000]);

    let bad = Stimulus::default().drive("t", 10, true);
    assert!(matches!(Simulation::new(&c, &m, &bad), Err(SimError::NotAnInput(n)) if n == "t"));
    let bad = Stimulus::default().drive("nope", 10, true);
    assert!(matches!(
        Simulation::new(&c, &m, &bad),
        Err(SimError::UnknownNet(_))
    ));
    let bad = Stimulus::default()
        .clock(ClockSpec::new("clk", 4000))
        .drive("clk", 10, true);
    assert!(matches!(
        Simulation::new(&c, &m, &bad),
        Err(SimError::ConflictingDrive(_))
    ));
}

#[test]
fn empty_watch_has_empty_trace() {
    let c = pair();
    let stim = Stimulus::default()
        .clock(ClockSpec::new("clk", 1000))
        .drive("d", 0, true);
    let mut sim = Simulation::new(&c, &DelayModel::default(), &stim).unwrap();
    sim.run_until(10_000).unwrap();
    assert!(sim.state().trace.is_empty());
    assert!(sim.state().events_processed > 0);
}

#[test]
fn single_edge_pair_is_two_stage_shift() {
    let c = pair();
    let model = DelayModel::default();
    let period = 2000;
    let bits = [true, false, true, true, false, false, true, false];
    let stim = stream(
        Stimulus::default().clock(ClockSpec::new("clk", period)),
        &bits,
        period / 2,
        period,
        model.t_hold,
    );
    let mut sim = Simulation::new(&c, &model, &stim).unwrap();
    let q2 = c.register_by_q("q").unwrap();
    sim.probe_registers([q2]);
    sim.run_until(period / 2 + period * 10).unwrap();
    assert!(sim.violations().is_empty());
    let caps: Vec<bool> = sim.captures().iter().map(|c| c.value).collect();
    // edge k captures what the first stage took at edge k-1
    assert!(!caps[0]);
    assert_eq!(&caps[1..=bits.len()], &bits[..]);
}

#[test]
fn dual_edge_pair_moves_data_every_half_period() {
    let c = pair();
    let model = DelayModel::default();
    let period = 2000;
    let half = period / 2;
    // data changes after each rising edge; q captures on the following fall
    let bits = [true, false, false, true, true, false, true, false];
    let mut stim = Stimulus::default()
        .clock(ClockSpec::new("clk", period))
        .drive("m", 0, true);
    for (i, b) in bits.iter().enumerate() {
        let t = if i == 0 {
            0
        } else {
            half + (i as Time - 1) * period + model.t_hold
        };
        stim = stim.drive("d", t, *b);
    }
    let mut sim = Simulation::new(&c, &model, &stim).unwrap();
    let q2 = c.register_by_q("q").unwrap();
    sim.probe_registers([q2]);
    sim.run_until(half + period * bits.len() as Time).unwrap();
    assert!(sim.violations().is_empty());
    let caps = sim.captures();
    assert_eq!(caps.len(), bits.len());
    for (i, cap) in caps.iter().enumerate() {
        // capture at the falling edge half a period after the launching rise
        assert_eq!(
            cap.time,
            half + i as Time * period + half + model.gate(GateKind::Xor).unwrap()
        );
        assert_eq!(cap.value, bits[i]);
    }
}

#[test]
fn setup_violation_margin() {
    let c = one_reg();
    let model = DelayModel::default();
    let stim = Stimulus::default()
        .clock(ClockSpec::new("clk", 1000))
        .drive("d", 499, true);
    let mut sim = Simulation::new(&c, &model, &stim).unwrap();
    sim.run_until(600).unwrap();
    let v = sim.violations();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].kind, ViolationKind::Setup);
    assert_eq!(v[0].margin, 1 - 50);
    assert_eq!((v[0].edge_time, v[0].data_time), (500, 499));
}

#[test]
fn hold_violation_margin() {
    let c = one_reg();
    let model = DelayModel::default();
    let stim = Stimulus::default()
        .clock(ClockSpec::new("clk", 1000))
        .drive("d", 510, true);
    let mut sim = Simulation::new(&c, &model, &stim).unwrap();
    sim.run_until(600).unwrap();
    let v = sim.violations();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].kind, ViolationKind::Hold);
    assert_eq!(v[0].margin, 10 - 30);
}

#[test]
fn toggle_counts() {
    let c = pair();
    let n = 7;
    let period = 1000;
    for mode in [false, true] {
        let stim = Stimulus::default()
            .clock(ClockSpec::new("clk", period))
            .drive("m", 0, mode);
        let mut sim = Simulation::new(&c, &DelayModel::default(), &stim).unwrap();
        // a little past the last edge so the XOR output has settled
        sim.run_until(n * period + 100).unwrap();
        let r = sim.toggle_report(Some(&["clk", "m", "d", "q$eclk"]));
        assert_eq!(r["clk"], 2 * n);
        assert_eq!(r["m"], 0);
        assert_eq!(r["d"], 0);
        assert_eq!(r["q$eclk"], 2 * n);
    }
}

#[test]
fn vcd_header_only_without_changes() {
    let c = pair();
    let stim = Stimulus::default().watch("d").watch("q");
    let mut sim = Simulation::new(&c, &DelayModel::default(), &stim).unwrap();
    sim.run_until(5000).unwrap();
    let text = String::from_utf8(sim.vcd_bytes(&VcdHeader::default())).unwrap();
    assert!(text.contains("$timescale 1ps $end"));
    assert!(text.contains("$var wire 1 ! d $end"));
    assert!(text.contains("$var wire 1 \" q $end"));
    assert!(text.ends_with("#0\n$dumpvars\n0!\n0\"\n$end\n"));
}

#[test]
fn vcd_q_changes_after_fall_plus_xor_plus_c2q() {
    let c = pair();
    let model = DelayModel::default();
    let period = 2000;
    let mut stim = Stimulus::default()
        .clock(ClockSpec::new("clk", period))
        .drive("m", 0, true)
        .watch("q");
    let bits = [true, false, true, false];
    for (i, b) in bits.iter().enumerate() {
        let t = if i == 0 {
            0
        } else {
            1000 + (i as Time - 1) * period + model.t_hold
        };
        stim = stim.drive("d", t, *b);
    }
    let mut sim = Simulation::new(&c, &model, &stim).unwrap();
    sim.run_until(4 * period + 1000).unwrap();
    let text = String::from_utf8(sim.vcd_bytes(&VcdHeader::default())).unwrap();
    let times: Vec<Time> = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .map(|t| t.parse().unwrap())
        .filter(|t| *t > 0)
        .collect();
    let xor = model.gate(GateKind::Xor).unwrap();
    let expected: Vec<Time> = (0..4)
        .map(|k| 2000 + k * period + xor + model.t_c2q)
        .collect();
    assert_eq!(times, expected);
}

#[test]
fn vcd_is_deterministic() {
    let c = pair();
    let stim = Stimulus::default()
        .clock(ClockSpec::new("clk", 1000))
        .drive("m", 0, true)
        .drive("d", 0, true)
        .drive("d", 1530, false)
        .watch("clk")
        .watch("q")
        .watch("t");
    let run = || {
        let mut sim = Simulation::new(&c, &DelayModel::default(), &stim).unwrap();
        sim.run_until(6000).unwrap();
        (sim.vcd_bytes(&VcdHeader::default()), sim.into_state())
    };
    let (a, sa) = run();
    let (b, sb) = run();
    assert_eq!(a, b);
    assert_eq!(sa, sb);
}

#[test]
fn event_cap_stops_runaway_timestamps() {
    let c = pair();
    let stim = Stimulus::default().clock(ClockSpec::new("clk", 1000));
    let mut sim = Simulation::new(&c, &DelayModel::default(), &stim).unwrap();
    sim.set_event_cap(0);
    assert!(matches!(
        sim.run_until(1000),
        Err(SimError::Oscillation { time: 500, .. })
    ));
}

#[test]
fn mode_may_change_only_while_clock_low() {
    let c = pair();
    let m = DelayModel::default();
    let ok = Stimulus::default()
        .clock(ClockSpec::new("clk", 1000))
        .drive("m", 200, true);
    assert!(Simulation::new(&c, &m, &ok).is_ok());
    let bad = Stimulus::default()
        .clock(ClockSpec::new("clk", 1000))
        .drive("m", 700, true);
    assert!(matches!(
        Simulation::new(&c, &m, &bad),
        Err(SimError::ModeSwitchWhileClockHigh { time: 700, .. })
    ));
}

#[test]
fn run_backwards_is_an_error() {
    let c = pair();
    let mut sim = Simulation::new(&c, &DelayModel::default(), &Stimulus::default()).unwrap();
    sim.run_until(100).unwrap();
    assert_eq!(
        sim.run_until(50),
        Err(SimError::TimeReversal {
            now: 100,
            target: 50
        })
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn toggles_match_replayed_trace(
        period in 200u64..3000,
        mode in any::<bool>(),
        drives in prop::collection::vec((1u64..20_000, any::<bool>()), 0..40),
    ) {
        let c = pair();
        let mut stim = Stimulus::default()
            .clock(ClockSpec::new("clk", period))
            .drive("m", 0, mode);
        let mut drives = drives;
        drives.sort_by_key(|d| d.0);
        for (t, v) in &drives {
            stim = stim.drive("d", *t, *v);
        }
        for n in &c.nets {
            stim = stim.watch(n.name.clone());
        }
        let mut sim = Simulation::new(&c, &DelayModel::default(), &stim).unwrap();
        sim.run_until(25_000).unwrap();
        let st = sim.state();
        let mut cur: Vec<bool> = vec![false; c.nets.len()];
        for (n, v) in &st.initial {
            cur[n.idx()] = *v;
        }
        let mut counts = vec![0u64; c.nets.len()];
        let mut last_t = 0;
        for e in &st.trace {
            prop_assert!(e.time >= last_t);
            last_t = e.time;
            prop_assert_ne!(cur[e.net.idx()], e.value);
            cur[e.net.idx()] = e.value;
            counts[e.net.idx()] += 1;
        }
        prop_assert_eq!(&counts, &st.toggles);
        prop_assert_eq!(&cur, &st.values);
    }
}
