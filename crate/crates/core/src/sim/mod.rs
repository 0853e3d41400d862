// SPDX-License-Identifier: Apache-2.0

//! Discrete-event simulation of an [`ElaboratedCircuit`].
//!
//! Two-valued logic, transport delays, and registers that are all rising-edge
//! flip-flops on their effective clock net. Events are ordered by
//! `(time, insertion sequence)`. Each timestamp runs in two phases:
//!
//! 1. commit every net change scheduled for the timestamp, re-evaluating the
//!    affected gates once per delta (zero-delay gates add further deltas) and
//!    noting registers whose effective clock rose;
//! 2. every noted register samples its D as committed at the end of phase 1
//!    and schedules `Q` at `now + t_c2q`.
//!
//! Since `t_c2q >= 1`, a register never observes a Q change caused by the
//! same edge, so back-to-back registers shift correctly.

mod stimulus;
mod vcd;

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

pub use stimulus::{ClockSpec, Drive, Stimulus};
pub use vcd::VcdHeader;

use crate::netlist::{ElaboratedCircuit, GateId, GateKind, NetId, RegId};
use crate::timing::DelayModel;
use crate::Time;

pub const DEFAULT_EVENT_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("delay model has no entry for gate kind {0}")]
    MissingDelay(GateKind),
    #[error("t_c2q must be at least 1 ps")]
    ZeroClockToQ,
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("`{0}` is not a module input and cannot be driven by the stimulus")]
    NotAnInput(String),
    #[error("net `{0}` has more than one clock, or is both a clock and driven")]
    ConflictingDrive(String),
    #[error("clock on `{net}`: {reason}")]
    BadClock { net: String, reason: String },
    #[error("drive of `{net}` at {time} ps has value {value}; expected 0 or 1")]
    BadValue { net: String, time: Time, value: u8 },
    #[error("mode net `{net}` changes at {time} ps while clock `{clock}` is high")]
    ModeSwitchWhileClockHigh {
        net: String,
        time: Time,
        clock: String,
    },
    #[error("more than {cap} events at {time} ps; the circuit oscillates")]
    Oscillation { time: Time, cap: usize },
    #[error("cannot run backwards from {now} ps to {target} ps")]
    TimeReversal { now: Time, target: Time },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Setup,
    Hold,
}

/// A setup or hold window violated at a register's effective clock and D
/// pins. `margin` is the measured interval minus the required one, so it is
/// always negative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimingViolation {
    pub kind: ViolationKind,
    #[serde(skip)]
    pub register: RegId,
    #[serde(rename = "register")]
    pub register_name: String,
    pub edge_time: Time,
    pub data_time: Time,
    pub margin: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub time: Time,
    pub net: NetId,
    pub value: bool,
}

/// A register capture recorded for a probed register.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capture {
    pub time: Time,
    pub reg: RegId,
    pub value: bool,
}

/// Observable simulation state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimState {
    pub now: Time,
    pub values: Vec<bool>,
    /// Committed value changes per net since time 0.
    pub toggles: Vec<u64>,
    pub last_d_change: Vec<Option<Time>>,
    pub last_edge: Vec<Option<Time>>,
    pub violations: Vec<TimingViolation>,
    /// One entry per committed change of a watched net, in time order.
    pub trace: Vec<TraceEntry>,
    /// Watched nets in watch order, with their values at time 0.
    pub initial: Vec<(NetId, bool)>,
    pub events_processed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Event {
    time: Time,
    seq: u64,
    net: NetId,
    value: bool,
    clock: Option<u32>,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, Copy)]
struct ClockGen {
    net: NetId,
    high: Time,
    low: Time,
}

pub struct Simulation<'c> {
    circuit: &'c ElaboratedCircuit,
    delays: Vec<Time>,
    t_c2q: Time,
    t_setup: Time,
    t_hold: Time,
    clocks: Vec<ClockGen>,
    watched: Vec<bool>,
    queue: BinaryHeap<Reverse<Event>>,
    /// Value each net will hold once its pending events are applied.
    projected: Vec<bool>,
    seq: u64,
    event_cap: usize,
    halt_on_violation: bool,
    probed: Vec<bool>,
    captures: Vec<Capture>,
    state: SimState,
    // scratch
    pending: Vec<Option<bool>>,
    touched: Vec<NetId>,
    dirty: Vec<bool>,
    dirty_list: Vec<GateId>,
    rose: Vec<RegId>,
}

impl<'c> Simulation<'c> {
    /// Builds the time-0 state: inputs at their time-0 drives (or 0), clocks
    /// at their start level, registers at `init`, and every gate output
    /// settled to its combinational value. Later drives and clock toggles
    /// are queued.
    pub fn new(
        circuit: &'c ElaboratedCircuit,
        model: &DelayModel,
        stimulus: &Stimulus,
    ) -> Result<Self, SimError> {
        if model.t_c2q < 1 {
            return Err(SimError::ZeroClockToQ);
        }
        let delays = model.resolve(circuit).map_err(|e| match e {
            crate::timing::TimingError::MissingDelay(k) => SimError::MissingDelay(k),
            _ => unreachable!("resolve only reports missing delays"),
        })?;
        let n = circuit.nets.len();
        let lookup = |name: &str| {
            circuit
                .net(name)
                .ok_or_else(|| SimError::UnknownNet(name.to_string()))
        };
        let input = |name: &str| {
            let id = lookup(name)?;
            if circuit.is_input(id) {
                Ok(id)
            } else {
                Err(SimError::NotAnInput(name.to_string()))
            }
        };

        let mut values = vec![false; n];
        let mut clocked = vec![false; n];
        let mut clocks = Vec::new();
        let mut clock_specs: Vec<(NetId, &ClockSpec)> = Vec::new();
        for spec in &stimulus.clocks {
            let net = input(&spec.net)?;
            if std::mem::replace(&mut clocked[net.idx()], true) {
                return Err(SimError::ConflictingDrive(spec.net.clone()));
            }
            if spec.period < 2 {
                return Err(SimError::BadClock {
                    net: spec.net.clone(),
                    reason: "period must be at least 2 ps".into(),
                });
            }
            if !(spec.duty > 0.0 && spec.duty < 1.0) {
                return Err(SimError::BadClock {
                    net: spec.net.clone(),
                    reason: format!("duty {} is outside (0, 1)", spec.duty),
                });
            }
            values[net.idx()] = spec.start_high;
            clocks.push(ClockGen {
                net,
                high: spec.high_time(),
                low: spec.low_time(),
            });
            clock_specs.push((net, spec));
        }

        let mode_nets = circuit.mode_nets();
        let mut later = Vec::new();
        for d in &stimulus.drives {
            let net = input(&d.net)?;
            if clocked[net.idx()] {
                return Err(SimError::ConflictingDrive(d.net.clone()));
            }
            if d.value > 1 {
                return Err(SimError::BadValue {
                    net: d.net.clone(),
                    time: d.time,
                    value: d.value,
                });
            }
            let v = d.value == 1;
            if d.time == 0 {
                values[net.idx()] = v;
                continue;
            }
            if mode_nets.contains(&net) {
                for (i, r) in circuit.regs.iter().enumerate() {
                    if r.mode != Some(net) {
                        continue;
                    }
                    let root = circuit.clock_paths[i].root;
                    if let Some((_, spec)) = clock_specs.iter().find(|(c, _)| *c == root) {
                        if spec.level_at(d.time) {
                            return Err(SimError::ModeSwitchWhileClockHigh {
                                net: d.net.clone(),
                                time: d.time,
                                clock: spec.net.clone(),
                            });
                        }
                    }
                }
            }
            later.push((d.time, net, v));
        }

        let mut watched = vec![false; n];
        let mut initial = Vec::new();
        for w in &stimulus.watch {
            let id = lookup(w)?;
            if !std::mem::replace(&mut watched[id.idx()], true) {
                initial.push(id);
            }
        }

        for r in &circuit.regs {
            values[r.q.idx()] = r.init;
        }
        for g in &circuit.comb {
            let gate = circuit.gate(*g);
            values[gate.output.idx()] = eval(gate.kind, &gate.inputs, &values);
        }

        let regs = circuit.regs.len();
        let state = SimState {
            now: 0,
            toggles: vec![0; n],
            last_d_change: vec![None; regs],
            last_edge: vec![None; regs],
            violations: Vec::new(),
            trace: Vec::new(),
            initial: initial.iter().map(|id| (*id, values[id.idx()])).collect(),
            events_processed: 0,
            values,
        };
        let mut sim = Simulation {
            circuit,
            delays,
            t_c2q: model.t_c2q,
            t_setup: model.t_setup,
            t_hold: model.t_hold,
            clocks,
            watched,
            queue: BinaryHeap::new(),
            projected: state.values.clone(),
            seq: 0,
            event_cap: DEFAULT_EVENT_CAP,
            halt_on_violation: false,
            probed: vec![false; regs],
            captures: Vec::new(),
            state,
            pending: vec![None; n],
            touched: Vec::new(),
            dirty: vec![false; circuit.gates.len()],
            dirty_list: Vec::new(),
            rose: Vec::new(),
        };
        for i in 0..sim.clocks.len() {
            let c = sim.clocks[i];
            let high = sim.state.values[c.net.idx()];
            let first = if high { c.high } else { c.low };
            sim.push(first, c.net, !high, Some(i as u32));
        }
        for (t, net, v) in later {
            sim.push(t, net, v, None);
        }
        Ok(sim)
    }

    pub fn circuit(&self) -> &'c ElaboratedCircuit {
        self.circuit
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn into_state(self) -> SimState {
        self.state
    }

    pub fn now(&self) -> Time {
        self.state.now
    }

    pub fn set_event_cap(&mut self, cap: usize) {
        self.event_cap = cap;
    }

    /// Stop [`run_until`](Self::run_until) at the end of the first timestamp
    /// that records a violation.
    pub fn set_halt_on_violation(&mut self, halt: bool) {
        self.halt_on_violation = halt;
    }

    /// Record every capture of the given registers in [`captures`](Self::captures).
    pub fn probe_registers(&mut self, regs: impl IntoIterator<Item = RegId>) {
        for r in regs {
            self.probed[r.idx()] = true;
        }
    }

    pub fn captures(&self) -> &[Capture] {
        &self.captures
    }

    pub fn value(&self, net: NetId) -> bool {
        self.state.values[net.idx()]
    }

    pub fn value_of(&self, name: &str) -> Option<bool> {
        self.circuit.net(name).map(|n| self.value(n))
    }

    pub fn violations(&self) -> &[TimingViolation] {
        &self.state.violations
    }

    fn push(&mut self, time: Time, net: NetId, value: bool, clock: Option<u32>) {
        self.seq += 1;
        self.queue.push(Reverse(Event {
            time,
            seq: self.seq,
            net,
            value,
            clock,
        }));
    }

    fn next_time(&self) -> Option<Time> {
        self.queue.peek().map(|Reverse(e)| e.time)
    }

    /// Processes every event with `time <= t_end`, then sets `now = t_end`.
    pub fn run_until(&mut self, t_end: Time) -> Result<(), SimError> {
        if t_end < self.state.now {
            return Err(SimError::TimeReversal {
                now: self.state.now,
                target: t_end,
            });
        }
        while let Some(t) = self.next_time() {
            if t > t_end {
                break;
            }
            self.state.now = t;
            let before = self.state.violations.len();
            self.step(t)?;
            if self.halt_on_violation && self.state.violations.len() > before {
                return Ok(());
            }
        }
        self.state.now = t_end;
        Ok(())
    }

    fn step(&mut self, t: Time) -> Result<(), SimError> {
        let mut processed = 0usize;
        let mut batch = Vec::new();
        loop {
            batch.clear();
            while let Some(Reverse(ev)) = self.queue.peek() {
                if ev.time != t {
                    break;
                }
                let Reverse(ev) = self.queue.pop().unwrap();
                processed += 1;
                if processed > self.event_cap {
                    return Err(SimError::Oscillation {
                        time: t,
                        cap: self.event_cap,
                    });
                }
                batch.push(ev);
            }
            if batch.is_empty() {
                break;
            }
            self.state.events_processed += batch.len() as u64;

            for ev in &batch {
                if let Some(ci) = ev.clock {
                    let c = self.clocks[ci as usize];
                    let next = t + if ev.value { c.high } else { c.low };
                    self.push(next, ev.net, !ev.value, Some(ci));
                }
                if self.pending[ev.net.idx()].is_none() {
                    self.touched.push(ev.net);
                }
                // events landing on the same net in the same delta collapse
                // to the last one
                self.pending[ev.net.idx()] = Some(ev.value);
            }
            let touched = std::mem::take(&mut self.touched);
            for net in &touched {
                let v = self.pending[net.idx()].take().unwrap();
                if v != self.state.values[net.idx()] {
                    self.commit(*net, v, t);
                }
            }
            self.touched = touched;
            self.touched.clear();

            let mut dirty = std::mem::take(&mut self.dirty_list);
            dirty.sort_unstable();
            for g in dirty.drain(..) {
                self.dirty[g.idx()] = false;
                let gate = self.circuit.gate(g);
                let v = eval(gate.kind, &gate.inputs, &self.state.values);
                let out = gate.output;
                if v != self.projected[out.idx()] {
                    self.projected[out.idx()] = v;
                    self.push(t + self.delays[g.idx()], out, v, None);
                }
            }
            self.dirty_list = dirty;
        }

        let mut rose = std::mem::take(&mut self.rose);
        rose.sort_unstable();
        rose.dedup();
        for r in rose.drain(..) {
            let reg = self.circuit.reg(r);
            if let Some(dc) = self.state.last_d_change[r.idx()] {
                let dt = t - dc;
                if dt < self.t_setup {
                    // a D change at the edge itself counts as setup only
                    self.state.violations.push(TimingViolation {
                        kind: ViolationKind::Setup,
                        register: r,
                        register_name: reg.name.clone(),
                        edge_time: t,
                        data_time: dc,
                        margin: dt as i64 - self.t_setup as i64,
                    });
                }
            }
            self.state.last_edge[r.idx()] = Some(t);
            let v = self.state.values[reg.d.idx()];
            if self.probed[r.idx()] {
                self.captures.push(Capture {
                    time: t,
                    reg: r,
                    value: v,
                });
            }
            if v != self.projected[reg.q.idx()] {
                self.projected[reg.q.idx()] = v;
                self.push(t + self.t_c2q, reg.q, v, None);
            }
        }
        self.rose = rose;
        Ok(())
    }

    fn commit(&mut self, net: NetId, v: bool, t: Time) {
        let c = self.circuit;
        self.state.values[net.idx()] = v;
        self.state.toggles[net.idx()] += 1;
        if self.watched[net.idx()] {
            self.state.trace.push(TraceEntry {
                time: t,
                net,
                value: v,
            });
        }
        for r in c.regs_with_d(net) {
            if let Some(e) = self.state.last_edge[r.idx()] {
                let dt = t - e;
                if dt < self.t_hold && dt > 0 {
                    self.state.violations.push(TimingViolation {
                        kind: ViolationKind::Hold,
                        register: *r,
                        register_name: c.reg(*r).name.clone(),
                        edge_time: e,
                        data_time: t,
                        margin: dt as i64 - self.t_hold as i64,
                    });
                }
            }
            self.state.last_d_change[r.idx()] = Some(t);
        }
        if v {
            self.rose.extend_from_slice(c.regs_with_eclk(net));
        }
        for g in c.fanout(net) {
            if !self.dirty[g.idx()] {
                self.dirty[g.idx()] = true;
                self.dirty_list.push(*g);
            }
        }
    }

    /// Committed transitions per net name, optionally restricted to `nets`.
    pub fn toggle_report(&self, nets: Option<&[&str]>) -> BTreeMap<String, u64> {
        let c = self.circuit;
        match nets {
            Some(names) => names
                .iter()
                .filter_map(|n| {
                    c.net(n)
                        .map(|id| (n.to_string(), self.state.toggles[id.idx()]))
                })
                .collect(),
            None => c
                .nets
                .iter()
                .zip(&self.state.toggles)
                .map(|(n, t)| (n.name.clone(), *t))
                .collect(),
        }
    }

    /// Renders the trace as a VCD document.
    pub fn write_vcd<W: std::io::Write>(
        &self,
        out: &mut W,
        header: &VcdHeader,
    ) -> std::io::Result<()> {
        vcd::write(out, self.circuit, &self.state, header)
    }

    pub fn vcd_bytes(&self, header: &VcdHeader) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_vcd(&mut buf, header)
            .expect("writing to a Vec cannot fail");
        buf
    }
}

#[inline]
fn eval(kind: GateKind, inputs: &[NetId], values: &[bool]) -> bool {
    let a = values[inputs[0].idx()];
    let b = inputs.get(1).is_some_and(|n| values[n.idx()]);
    kind.eval(a, b)
}

#[cfg(test)]
mod tests;
