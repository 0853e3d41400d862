// SPDX-License-Identifier: Apache-2.0

//! Static timing for register-to-register paths.
//!
//! For every launch/capture pair the longest and shortest combinational
//! delays are found by dynamic programming over the topologically sorted
//! gate list. Clock skew is not a parameter: it is the difference of the
//! gate delays accumulated on the two registers' elaborated clock paths, so
//! the mode XOR of a switchable register shows up on its own.
//!
//! With `A` the time available between launch and capture edge
//! (`T` for same-edge pairs, `T/2` for adjacent-edge pairs) and `skew` the
//! capture-minus-launch clock path delay:
//!
//! ```text
//! setup:  A + skew >= t_c2q + max_delay + t_setup
//! hold:   t_hold   <= t_c2q + min_delay - skew
//! ```
//!
//! For a rising register feeding a switchable one in mode 1 this is
//! `T/2 >= t_c2q + max + t_setup - t_xor` and `t_hold <= t_c2q + min - t_xor`.
//! The hold form is period independent and therefore conservative for
//! adjacent-edge pairs, where the real hold window is a further `T/2` wide.

mod model;

use serde::Serialize;
use thiserror::Error;

pub use model::{load_delay_model, DelayModel};

use crate::netlist::{ElaboratedCircuit, GateKind, NetId, RegId};
use crate::Time;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimingError {
    #[error("delay model has no entry for gate kind {0}")]
    MissingDelay(GateKind),
    #[error("t_c2q must be at least 1 ps")]
    ZeroClockToQ,
    #[error("delay model is missing `{0}`")]
    MissingKey(String),
    #[error("delay `{0}` is negative")]
    NegativeDelay(String),
    #[error("bad delay model: {0}")]
    BadModel(String),
    #[error("mode must be 0 or 1, got {0}")]
    BadMode(u8),
    #[error(
        "clock path of register `{register}` goes through `{net}`, whose side input is not a module input"
    )]
    UnsupportedClockPath { register: String, net: String },
}

/// Which root-clock edge a register captures on, under a given mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockPhase {
    Rising,
    Falling,
    /// The clock is blocked by a controlling side input; never captures.
    Gated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeRelation {
    SameEdge,
    AdjacentEdge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathReport {
    pub launch: String,
    pub capture: String,
    #[serde(skip)]
    pub launch_id: RegId,
    #[serde(skip)]
    pub capture_id: RegId,
    pub max_delay: Time,
    pub min_delay: Time,
    pub capture_clock_skew: i64,
    pub edge_relation: EdgeRelation,
    /// Smallest clock period this pair alone tolerates (may be odd or
    /// non-positive).
    pub required_period: i64,
    /// Nets along the longest path, launch Q first, capture D last.
    pub critical_path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HoldResult {
    pub launch: String,
    pub capture: String,
    pub slack: i64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimingReport {
    pub mode: u8,
    /// Smallest even period meeting every setup constraint; 0 without pairs.
    pub t_min: Time,
    /// Index into `paths` of the pair that sets `t_min`.
    pub binding: Option<usize>,
    pub paths: Vec<PathReport>,
    pub hold: Vec<HoldResult>,
    pub diagnostics: Vec<String>,
}

impl TimingReport {
    pub fn hold_ok(&self) -> bool {
        self.hold.iter().all(|h| h.pass)
    }

    pub fn worst_hold_slack(&self) -> Option<i64> {
        self.hold.iter().map(|h| h.slack).min()
    }

    pub fn binding_path(&self) -> Option<&PathReport> {
        self.binding.map(|i| &self.paths[i])
    }

    pub fn path(&self, launch: &str, capture: &str) -> Option<&PathReport> {
        self.paths
            .iter()
            .find(|p| p.launch == launch && p.capture == capture)
    }
}

fn check_mode(mode: u8) -> Result<bool, TimingError> {
    match mode {
        0 => Ok(false),
        1 => Ok(true),
        m => Err(TimingError::BadMode(m)),
    }
}

/// Capture edge and clock-path delay of `reg`. Side inputs of clock-path
/// gates must be module inputs and are taken to carry the mode value.
pub fn clock_phase(
    circuit: &ElaboratedCircuit,
    model: &DelayModel,
    reg: RegId,
    mode: u8,
) -> Result<(ClockPhase, Time), TimingError> {
    let m = check_mode(mode)?;
    let path = &circuit.clock_paths[reg.idx()];
    let mut prev = path.root;
    let mut inverted = false;
    let mut gated = false;
    let mut delay = 0;
    for g in &path.gates {
        let gate = circuit.gate(*g);
        delay += model.gate(gate.kind)?;
        let mut side = None;
        let mut skipped = false;
        for i in &gate.inputs {
            if *i == prev && !skipped {
                skipped = true;
            } else {
                side = Some(*i);
            }
        }
        let side_value = match side {
            None => false,
            Some(s) if circuit.is_input(s) => m,
            Some(_) => {
                return Err(TimingError::UnsupportedClockPath {
                    register: circuit.reg(reg).name.clone(),
                    net: circuit.net_name(gate.output).to_string(),
                })
            }
        };
        match gate.kind {
            GateKind::Buf => {}
            GateKind::Not => inverted = !inverted,
            GateKind::Xor => inverted ^= side_value,
            GateKind::Xnor => inverted ^= !side_value,
            GateKind::And => gated |= !side_value,
            GateKind::Nand => {
                gated |= !side_value;
                inverted = !inverted;
            }
            GateKind::Or => gated |= side_value,
            GateKind::Nor => {
                gated |= side_value;
                inverted = !inverted;
            }
        }
        prev = gate.output;
    }
    let phase = match (gated, inverted) {
        (true, _) => ClockPhase::Gated,
        (false, false) => ClockPhase::Rising,
        (false, true) => ClockPhase::Falling,
    };
    Ok((phase, delay))
}

struct Arrival {
    max: Vec<Option<Time>>,
    min: Vec<Option<Time>>,
    pred: Vec<Option<NetId>>,
}

fn arrivals(circuit: &ElaboratedCircuit, delays: &[Time], from: NetId) -> Arrival {
    let n = circuit.nets.len();
    let mut a = Arrival {
        max: vec![None; n],
        min: vec![None; n],
        pred: vec![None; n],
    };
    a.max[from.idx()] = Some(0);
    a.min[from.idx()] = Some(0);
    for g in &circuit.comb {
        let gate = circuit.gate(*g);
        let mut best: Option<(Time, NetId)> = None;
        let mut least: Option<Time> = None;
        for i in &gate.inputs {
            if let (Some(mx), Some(mn)) = (a.max[i.idx()], a.min[i.idx()]) {
                if best.is_none_or(|(b, _)| mx > b) {
                    best = Some((mx, *i));
                }
                least = Some(least.map_or(mn, |l| l.min(mn)));
            }
        }
        if let (Some((mx, p)), Some(mn)) = (best, least) {
            let d = delays[g.idx()];
            let out = gate.output.idx();
            a.max[out] = Some(mx + d);
            a.min[out] = Some(mn + d);
            a.pred[out] = Some(p);
        }
    }
    a
}

/// Longest and shortest combinational delay for every register pair.
pub fn path_extremes(
    circuit: &ElaboratedCircuit,
    model: &DelayModel,
    mode: u8,
) -> Result<Vec<PathReport>, TimingError> {
    check_mode(mode)?;
    let delays = model.resolve(circuit)?;
    let phases = circuit
        .reg_ids()
        .map(|r| clock_phase(circuit, model, r, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let setup_need = (model.t_c2q + model.t_setup) as i64;

    let mut out = Vec::with_capacity(circuit.reg_pairs.len());
    let mut current: Option<(RegId, Arrival)> = None;
    for pair in &circuit.reg_pairs {
        let (lp, ld) = phases[pair.launch.idx()];
        let (cp, cd) = phases[pair.capture.idx()];
        if lp == ClockPhase::Gated || cp == ClockPhase::Gated {
            continue;
        }
        if current.as_ref().map(|(r, _)| *r) != Some(pair.launch) {
            let q = circuit.reg(pair.launch).q;
            current = Some((pair.launch, arrivals(circuit, &delays, q)));
        }
        let arr = &current.as_ref().unwrap().1;
        let d = circuit.reg(pair.capture).d;
        let max_delay = arr.max[d.idx()].expect("pair implies a path");
        let min_delay = arr.min[d.idx()].expect("pair implies a path");

        let q = circuit.reg(pair.launch).q;
        let mut critical = vec![d];
        let mut net = d;
        while net != q {
            net = arr.pred[net.idx()].expect("path back to launch");
            critical.push(net);
        }
        critical.reverse();

        let skew = cd as i64 - ld as i64;
        let edge_relation = if lp == cp {
            EdgeRelation::SameEdge
        } else {
            EdgeRelation::AdjacentEdge
        };
        let need = setup_need + max_delay as i64 - skew;
        let required_period = match edge_relation {
            EdgeRelation::SameEdge => need,
            EdgeRelation::AdjacentEdge => 2 * need,
        };
        out.push(PathReport {
            launch: circuit.reg(pair.launch).name.clone(),
            capture: circuit.reg(pair.capture).name.clone(),
            launch_id: pair.launch,
            capture_id: pair.capture,
            max_delay,
            min_delay,
            capture_clock_skew: skew,
            edge_relation,
            required_period,
            critical_path: critical
                .into_iter()
                .map(|n| circuit.net_name(n).to_string())
                .collect(),
        });
    }
    Ok(out)
}

fn analyze(
    circuit: &ElaboratedCircuit,
    model: &DelayModel,
    mode: u8,
) -> Result<TimingReport, TimingError> {
    let paths = path_extremes(circuit, model, mode)?;
    let mut diagnostics = Vec::new();
    for r in circuit.reg_ids() {
        if clock_phase(circuit, model, r, mode)?.0 == ClockPhase::Gated {
            diagnostics.push(format!(
                "register `{}` has its clock gated off in mode {mode}",
                circuit.reg(r).name
            ));
        }
    }

    let binding = paths
        .iter()
        .enumerate()
        .max_by_key(|(i, p)| (p.required_period, std::cmp::Reverse(*i)))
        .map(|(i, _)| i);
    let t_min = match binding {
        None => {
            diagnostics.push("no register-to-register paths".into());
            0
        }
        Some(i) => {
            let req = paths[i].required_period.max(2) as Time;
            req + req % 2
        }
    };

    let hold = paths
        .iter()
        .map(|p| {
            let slack = model.t_c2q as i64 + p.min_delay as i64
                - p.capture_clock_skew
                - model.t_hold as i64;
            HoldResult {
                launch: p.launch.clone(),
                capture: p.capture.clone(),
                slack,
                pass: slack >= 0,
            }
        })
        .collect();

    Ok(TimingReport {
        mode,
        t_min,
        binding,
        paths,
        hold,
        diagnostics,
    })
}

/// Full timing report; `t_min` is the smallest even clock period that meets
/// every setup constraint under mode `mode`.
pub fn min_clock_period(
    circuit: &ElaboratedCircuit,
    model: &DelayModel,
    mode: u8,
) -> Result<TimingReport, TimingError> {
    analyze(circuit, model, mode)
}

/// Full timing report; see [`TimingReport::hold`] for the per-pair results.
/// Hold slack does not depend on the clock period.
pub fn hold_check(
    circuit: &ElaboratedCircuit,
    model: &DelayModel,
    mode: u8,
) -> Result<TimingReport, TimingError> {
    analyze(circuit, model, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{elaborate, parse_netlist};

    fn circuit(text: &str) -> ElaboratedCircuit {
        elaborate(&parse_netlist(text).unwrap(), &["clk"]).unwrap()
    }

    fn pair_with(logic: &str, wires: &str) -> ElaboratedCircuit {
        circuit(&format!(
            "module p\ninput clk\ninput m\ninput d\noutput q\nwire t\nwire u\n{wires}\
             dff t d clock clk edge rising\n{logic}sdff q u clock clk mode m\nend"
        ))
    }

    fn model() -> DelayModel {
        DelayModel::default()
    }

    #[test]
    fn direct_connection_is_zero() {
        let c = pair_with("gate BUF u t\n", "");
        let m = model().with_gate(GateKind::Buf, 0);
        let p = &path_extremes(&c, &m, 0).unwrap()[0];
        assert_eq!((p.max_delay, p.min_delay), (0, 0));
        let c = circuit(
            "module p\ninput clk\ninput d\noutput q\nwire t\n\
             dff t d clock clk edge rising\ndff q t clock clk edge rising\nend",
        );
        let p = &path_extremes(&c, &model(), 0).unwrap()[0];
        assert_eq!((p.max_delay, p.min_delay), (0, 0));
        assert_eq!(p.critical_path, vec!["t"]);
    }

    #[test]
    fn and_xor_chain() {
        let c = pair_with("gate AND a t d\ngate XOR u a m\n", "wire a\n");
        let p = &path_extremes(&c, &model(), 1).unwrap()[0];
        assert_eq!((p.max_delay, p.min_delay), (35, 35));
        assert_eq!(p.critical_path, vec!["t", "a", "u"]);
    }

    #[test]
    fn diamond_max_and_min() {
        let c = pair_with(
            "gate NOT n t\ngate AND a t d\ngate OR o a d\ngate AND u n o\n",
            "wire n\nwire a\nwire o\n",
        );
        let m = model().with_gate(GateKind::And, 15);
        let p = &path_extremes(&c, &m, 0).unwrap()[0];
        // NOT(8) + AND(15) vs AND(15) + OR(15) + AND(15)
        assert_eq!((p.max_delay, p.min_delay), (45, 23));
    }

    #[test]
    fn spec_diamond_max_30_min_8() {
        // launch -> {NOT ; AND + OR} -> capture; the NOT branch is the direct
        // path into an XOR that merges both branches at zero cost.
        let c = pair_with(
            "gate NOT n t\ngate AND a t d\ngate OR o a d\ngate XOR u n o\n",
            "wire n\nwire a\nwire o\n",
        );
        let m = model().with_gate(GateKind::Xor, 0);
        let p = &path_extremes(&c, &m, 0).unwrap()[0];
        assert_eq!((p.max_delay, p.min_delay), (30, 8));
    }

    /// Pair joined by a single BUF whose delay is the logic delay.
    fn logic_pair(logic_ps: Time) -> (ElaboratedCircuit, DelayModel) {
        let c = pair_with("gate BUF u t\n", "");
        (c, model().with_gate(GateKind::Buf, logic_ps))
    }

    #[test]
    fn substitution_mode_one_and_zero() {
        let (c, m) = logic_pair(350);
        let r1 = min_clock_period(&c, &m, 1).unwrap();
        assert_eq!(r1.paths[0].edge_relation, EdgeRelation::AdjacentEdge);
        assert_eq!(r1.paths[0].capture_clock_skew, 20);
        assert_eq!(r1.t_min, 960);
        let r0 = min_clock_period(&c, &m, 0).unwrap();
        assert_eq!(r0.paths[0].edge_relation, EdgeRelation::SameEdge);
        assert_eq!(r0.paths[0].capture_clock_skew, 20);
        assert_eq!(r0.t_min, 480);
        assert_eq!(r0.binding, Some(0));
    }

    #[test]
    fn hold_substitution() {
        let (c, m) = logic_pair(0);
        let r = hold_check(&c, &m, 1).unwrap();
        assert_eq!(r.hold[0].slack, 50);
        assert!(r.hold[0].pass);

        let bad = DelayModel {
            t_hold: 200,
            ..m.clone()
        };
        let r = hold_check(&c, &bad, 1).unwrap();
        assert_eq!(r.hold[0].slack, -120);
        assert!(!r.hold_ok());
    }

    #[test]
    fn buffer_raises_hold_slack_by_its_delay() {
        let (c, m) = logic_pair(0);
        let base = hold_check(&c, &m, 0).unwrap().hold[0].slack;
        let c2 = pair_with("gate BUF x t\ngate BUF u x\n", "wire x\n");
        let with_buf = hold_check(&c2, &m.clone().with_gate(GateKind::Buf, 5), 0).unwrap();
        // one BUF stays at 0 ps in `m`; the extra one is a 5 ps buffer
        let m5 = m.with_gate(GateKind::Buf, 5);
        let one = hold_check(&c, &m5, 0).unwrap().hold[0].slack;
        assert_eq!(one, base + 5);
        assert_eq!(with_buf.hold[0].slack, base + 10);
    }

    #[test]
    fn no_pairs_gives_zero() {
        let c =
            circuit("module s\ninput clk\ninput d\noutput q\ndff q d clock clk edge rising\nend");
        let r = min_clock_period(&c, &model(), 0).unwrap();
        assert_eq!(r.t_min, 0);
        assert_eq!(r.binding, None);
        assert_eq!(
            r.diagnostics,
            vec!["no register-to-register paths".to_string()]
        );
    }

    #[test]
    fn missing_xor_surfaces_at_analysis() {
        let (c, _) = logic_pair(0);
        let mut m = model();
        m.gates.remove(&GateKind::Xor);
        assert_eq!(
            min_clock_period(&c, &m, 1),
            Err(TimingError::MissingDelay(GateKind::Xor))
        );
    }

    #[test]
    fn odd_requirement_rounds_up_to_even() {
        let (c, m) = logic_pair(351);
        assert_eq!(min_clock_period(&c, &m, 0).unwrap().t_min, 482);
        assert_eq!(
            min_clock_period(&c, &m, 0).unwrap().paths[0].required_period,
            481
        );
    }

    #[test]
    fn xor_delay_lowers_mode_one_half_period() {
        let (c, m) = logic_pair(350);
        let base = min_clock_period(&c, &m, 1).unwrap().paths[0].required_period;
        let slower_xor = m.with_gate(GateKind::Xor, 45);
        let r = min_clock_period(&c, &slower_xor, 1).unwrap().paths[0].required_period;
        assert_eq!(base / 2 - r / 2, 25);
    }

    #[test]
    fn falling_and_gated_clock_phases() {
        let c = circuit(
            "module g\ninput clk\ninput en\ninput d\noutput q\nwire t\nwire gc\n\
             dff t d clock clk edge falling\ngate AND gc clk en\ndff q t clock gc edge rising\nend",
        );
        let m = model();
        assert_eq!(
            clock_phase(&c, &m, RegId(0), 0).unwrap(),
            (ClockPhase::Falling, 8)
        );
        assert_eq!(
            clock_phase(&c, &m, RegId(1), 0).unwrap().0,
            ClockPhase::Gated
        );
        assert_eq!(
            clock_phase(&c, &m, RegId(1), 1).unwrap(),
            (ClockPhase::Rising, 15)
        );
        let r = min_clock_period(&c, &m, 0).unwrap();
        assert!(r.paths.is_empty());
        assert_eq!(r.diagnostics.len(), 2);
    }
}
