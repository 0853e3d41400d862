// SPDX-License-Identifier: Apache-2.0

//! Elaboration of a validated [`Netlist`] into a flat gate graph.
//!
//! Every register is reduced to a rising-edge flip-flop on an *effective
//! clock* net:
//! - `falling` registers get a `NOT` on their clock,
//! - `switchable` registers get `XOR(clock, mode)` on their clock.
//!
//! The inserted gates are ordinary combinational gates, so the simulator sees
//! the clock inversion and the timing engine sees the clock-path delay without
//! any special casing.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use serde::Serialize;
use thiserror::Error;

use super::validate::{validate, Diagnostic};
use super::{Direction, GateKind, Netlist, RegisterKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NetId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GateId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RegId(pub u32);

impl NetId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl GateId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl RegId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetRole {
    Input,
    Output,
    Wire,
    /// Created by elaboration (effective clock nets).
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabNet {
    pub name: String,
    pub role: NetRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateOrigin {
    /// Index into `Netlist::gates`.
    Netlist(usize),
    /// Inserted on the clock path of a register.
    ClockPath(RegId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabGate {
    pub kind: GateKind,
    pub output: NetId,
    pub inputs: Vec<NetId>,
    pub origin: GateOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabRegister {
    /// The register is named after its output net.
    pub name: String,
    pub q: NetId,
    pub d: NetId,
    /// Clock net as declared.
    pub clock: NetId,
    /// Net whose rising edge triggers a capture.
    pub eclk: NetId,
    pub kind: RegisterKind,
    pub mode: Option<NetId>,
    pub init: bool,
}

/// Gates between a clock root and a register's effective clock pin, in
/// signal-flow order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockPath {
    pub root: NetId,
    pub gates: Vec<GateId>,
}

/// A launch/capture register pair joined by at least one combinational path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegPair {
    pub launch: RegId,
    pub capture: RegId,
    /// Gates lying on some path from the launch Q to the capture D, in
    /// topological order. Empty for a direct connection.
    pub cone: Vec<GateId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Gate(GateId),
    Register(RegId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElabWarning {
    /// The mode net of `register` is driven by sequential logic clocked from
    /// the same clock root, so it may switch while the clock is high.
    ModeDrivenInDomain { register: String, mode: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElabError {
    #[error("netlist is not valid: {}", .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Invalid(Vec<Diagnostic>),
    #[error("no clock roots given")]
    NoClockRoots,
    #[error("clock root `{0}` is not a net of the module")]
    UnknownClockRoot(String),
    #[error("combinational cycle through nets {}", .nets.join(" -> "))]
    CombinationalCycle { nets: Vec<String> },
    #[error("clock `{clock}` of register `{register}` does not trace back to a clock root")]
    UnreachableClock { register: String, clock: String },
}

#[derive(Debug, Clone)]
pub struct ElaboratedCircuit {
    pub name: String,
    pub nets: Vec<ElabNet>,
    pub gates: Vec<ElabGate>,
    /// Every gate, in topological order (ties broken by declaration order,
    /// inserted clock gates after the netlist's own gates).
    pub comb: Vec<GateId>,
    pub regs: Vec<ElabRegister>,
    pub clock_roots: Vec<NetId>,
    /// Indexed by [`RegId`].
    pub clock_paths: Vec<ClockPath>,
    pub reg_pairs: Vec<RegPair>,
    pub warnings: Vec<ElabWarning>,
    index: HashMap<String, NetId>,
    drivers: Vec<Option<Driver>>,
    fanout: Vec<Vec<GateId>>,
    reg_by_d: Vec<Vec<RegId>>,
    reg_by_eclk: Vec<Vec<RegId>>,
}

impl ElaboratedCircuit {
    pub fn net(&self, name: &str) -> Option<NetId> {
        self.index.get(name).copied()
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.nets[net.idx()].name
    }

    pub fn gate(&self, id: GateId) -> &ElabGate {
        &self.gates[id.idx()]
    }

    pub fn reg(&self, id: RegId) -> &ElabRegister {
        &self.regs[id.idx()]
    }

    pub fn reg_ids(&self) -> impl Iterator<Item = RegId> {
        (0..self.regs.len() as u32).map(RegId)
    }

    pub fn register_by_q(&self, q: &str) -> Option<RegId> {
        let net = self.net(q)?;
        match self.drivers[net.idx()] {
            Some(Driver::Register(r)) => Some(r),
            _ => None,
        }
    }

    pub fn driver(&self, net: NetId) -> Option<Driver> {
        self.drivers[net.idx()]
    }

    pub fn fanout(&self, net: NetId) -> &[GateId] {
        &self.fanout[net.idx()]
    }

    pub fn regs_with_d(&self, net: NetId) -> &[RegId] {
        &self.reg_by_d[net.idx()]
    }

    pub fn regs_with_eclk(&self, net: NetId) -> &[RegId] {
        &self.reg_by_eclk[net.idx()]
    }

    pub fn is_input(&self, net: NetId) -> bool {
        self.nets[net.idx()].role == NetRole::Input
    }

    /// Number of gates inserted on register clock paths.
    pub fn inserted_clock_gates(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.origin, GateOrigin::ClockPath(_)))
            .count()
    }

    /// Nets used as the mode input of a switchable register.
    pub fn mode_nets(&self) -> Vec<NetId> {
        let set: BTreeSet<NetId> = self.regs.iter().filter_map(|r| r.mode).collect();
        set.into_iter().collect()
    }

    /// Every net driven by a gate on some register's clock path.
    pub fn clock_path_nets(&self) -> BTreeSet<NetId> {
        self.clock_paths
            .iter()
            .flat_map(|p| p.gates.iter().map(|g| self.gate(*g).output))
            .collect()
    }
}

/// Clock roots implied by the registers of `netlist`: each register clock is
/// followed back through the first input of its driving gates until a module
/// input is reached.
pub fn infer_clock_roots(netlist: &Netlist) -> Vec<String> {
    let inputs: BTreeSet<String> = netlist.input_nets().into_iter().collect();
    let by_output: HashMap<&str, &super::Gate> = netlist
        .gates
        .iter()
        .map(|g| (g.output.as_str(), g))
        .collect();
    let mut roots = Vec::new();
    for reg in &netlist.registers {
        let mut net = reg.clock.as_str();
        for _ in 0..=netlist.gates.len() {
            if inputs.contains(net) {
                if !roots.iter().any(|r| r == net) {
                    roots.push(net.to_string());
                }
                break;
            }
            match by_output.get(net).and_then(|g| g.inputs.first()) {
                Some(next) => net = next,
                None => break,
            }
        }
    }
    roots
}

/// Desugars, sorts and indexes `netlist`.
pub fn elaborate<S: AsRef<str>>(
    netlist: &Netlist,
    clock_roots: &[S],
) -> Result<ElaboratedCircuit, ElabError> {
    let diags = validate(netlist);
    if !diags.is_empty() {
        return Err(ElabError::Invalid(diags));
    }
    if clock_roots.is_empty() {
        return Err(ElabError::NoClockRoots);
    }

    let mut nets = Vec::new();
    let mut index = HashMap::new();
    let add_net = |nets: &mut Vec<ElabNet>,
                   index: &mut HashMap<String, NetId>,
                   name: String,
                   role: NetRole| {
        let id = NetId(nets.len() as u32);
        index.insert(name.clone(), id);
        nets.push(ElabNet { name, role });
        id
    };
    for p in &netlist.ports {
        let role = match p.direction {
            Direction::Input => NetRole::Input,
            Direction::Output => NetRole::Output,
        };
        for n in super::expand(&p.name, p.width) {
            add_net(&mut nets, &mut index, n, role);
        }
    }
    for w in &netlist.wires {
        for n in super::expand(&w.name, w.width) {
            add_net(&mut nets, &mut index, n, NetRole::Wire);
        }
    }

    let lookup = |index: &HashMap<String, NetId>, name: &str| index[name];

    let mut roots = Vec::new();
    for r in clock_roots {
        let r = r.as_ref();
        let id = index
            .get(r)
            .copied()
            .ok_or_else(|| ElabError::UnknownClockRoot(r.to_string()))?;
        if !roots.contains(&id) {
            roots.push(id);
        }
    }

    let mut gates: Vec<ElabGate> = netlist
        .gates
        .iter()
        .enumerate()
        .map(|(i, g)| ElabGate {
            kind: g.kind,
            output: lookup(&index, &g.output),
            inputs: g.inputs.iter().map(|n| lookup(&index, n)).collect(),
            origin: GateOrigin::Netlist(i),
        })
        .collect();

    let mut regs = Vec::with_capacity(netlist.registers.len());
    for (i, r) in netlist.registers.iter().enumerate() {
        let rid = RegId(i as u32);
        let clock = lookup(&index, &r.clock);
        let mode = r.mode.as_ref().map(|m| lookup(&index, m));
        let eclk = match r.kind {
            RegisterKind::Rising => clock,
            RegisterKind::Falling | RegisterKind::Switchable => {
                let name = unique_name(&index, &format!("{}$eclk", r.q));
                let eclk = add_net(&mut nets, &mut index, name, NetRole::Internal);
                let (kind, inputs) = match (r.kind, mode) {
                    (RegisterKind::Switchable, Some(m)) => (GateKind::Xor, vec![clock, m]),
                    _ => (GateKind::Not, vec![clock]),
                };
                gates.push(ElabGate {
                    kind,
                    output: eclk,
                    inputs,
                    origin: GateOrigin::ClockPath(rid),
                });
                eclk
            }
        };
        regs.push(ElabRegister {
            name: r.q.clone(),
            q: lookup(&index, &r.q),
            d: lookup(&index, &r.d),
            clock,
            eclk,
            kind: r.kind,
            mode,
            init: r.init,
        });
    }

    let n_nets = nets.len();
    let mut drivers = vec![None; n_nets];
    let mut fanout = vec![Vec::new(); n_nets];
    let mut reg_by_d = vec![Vec::new(); n_nets];
    let mut reg_by_eclk = vec![Vec::new(); n_nets];
    for (i, g) in gates.iter().enumerate() {
        let gid = GateId(i as u32);
        drivers[g.output.idx()] = Some(Driver::Gate(gid));
        for inp in &g.inputs {
            if !fanout[inp.idx()].contains(&gid) {
                fanout[inp.idx()].push(gid);
            }
        }
    }
    for (i, r) in regs.iter().enumerate() {
        let rid = RegId(i as u32);
        drivers[r.q.idx()] = Some(Driver::Register(rid));
        reg_by_d[r.d.idx()].push(rid);
        reg_by_eclk[r.eclk.idx()].push(rid);
    }

    let comb = topo_sort(&gates, &drivers, &fanout, &nets)?;

    let mut circuit = ElaboratedCircuit {
        name: netlist.name.clone(),
        nets,
        gates,
        comb,
        regs,
        clock_roots: roots,
        clock_paths: Vec::new(),
        reg_pairs: Vec::new(),
        warnings: Vec::new(),
        index,
        drivers,
        fanout,
        reg_by_d,
        reg_by_eclk,
    };
    circuit.clock_paths = trace_clock_paths(&circuit)?;
    circuit.reg_pairs = register_pairs(&circuit);
    circuit.warnings = mode_warnings(&circuit);
    Ok(circuit)
}

fn unique_name(index: &HashMap<String, NetId>, base: &str) -> String {
    let mut name = base.to_string();
    let mut n = 1;
    while index.contains_key(&name) {
        name = format!("{base}{n}");
        n += 1;
    }
    name
}

/// Kahn's algorithm with a min-heap on gate index, so ready gates come out
/// in declaration order.
fn topo_sort(
    gates: &[ElabGate],
    drivers: &[Option<Driver>],
    fanout: &[Vec<GateId>],
    nets: &[ElabNet],
) -> Result<Vec<GateId>, ElabError> {
    let gate_pred = |g: &ElabGate| -> Vec<GateId> {
        let mut preds: Vec<GateId> = g
            .inputs
            .iter()
            .filter_map(|n| match drivers[n.idx()] {
                Some(Driver::Gate(p)) => Some(p),
                _ => None,
            })
            .collect();
        preds.sort();
        preds.dedup();
        preds
    };
    let mut indegree: Vec<usize> = gates.iter().map(|g| gate_pred(g).len()).collect();
    let mut ready: BinaryHeap<Reverse<GateId>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, d)| **d == 0)
        .map(|(i, _)| Reverse(GateId(i as u32)))
        .collect();
    let mut order = Vec::with_capacity(gates.len());
    while let Some(Reverse(g)) = ready.pop() {
        order.push(g);
        for succ in &fanout[gates[g.idx()].output.idx()] {
            indegree[succ.idx()] -= 1;
            if indegree[succ.idx()] == 0 {
                ready.push(Reverse(*succ));
            }
        }
    }
    if order.len() == gates.len() {
        return Ok(order);
    }

    // Walk predecessors among the unsorted gates until one repeats.
    let start = (0..gates.len()).find(|&i| indegree[i] > 0).unwrap();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut walk = vec![start];
    let mut cur = start;
    loop {
        seen.insert(cur, walk.len() - 1);
        let next = gate_pred(&gates[cur])
            .into_iter()
            .map(|p| p.idx())
            .find(|p| indegree[*p] > 0)
            .unwrap();
        if let Some(&pos) = seen.get(&next) {
            let mut cycle: Vec<String> = walk[pos..]
                .iter()
                .rev()
                .map(|g| nets[gates[*g].output.idx()].name.clone())
                .collect();
            // start the report at the lexically smallest net for stable output
            let min = (0..cycle.len()).min_by_key(|&i| &cycle[i]).unwrap();
            cycle.rotate_left(min);
            return Err(ElabError::CombinationalCycle { nets: cycle });
        }
        walk.push(next);
        cur = next;
    }
}

fn trace_clock_paths(c: &ElaboratedCircuit) -> Result<Vec<ClockPath>, ElabError> {
    // reaches[n]: Some(root) when a root is reachable backwards from n
    let mut reaches: Vec<Option<NetId>> = vec![None; c.nets.len()];
    for r in &c.clock_roots {
        reaches[r.idx()] = Some(*r);
    }
    for g in &c.comb {
        let gate = c.gate(*g);
        if reaches[gate.output.idx()].is_none() {
            reaches[gate.output.idx()] = gate.inputs.iter().find_map(|i| reaches[i.idx()]);
        }
    }

    c.regs
        .iter()
        .map(|r| {
            let Some(root) = reaches[r.eclk.idx()] else {
                return Err(ElabError::UnreachableClock {
                    register: r.name.clone(),
                    clock: c.net_name(r.clock).to_string(),
                });
            };
            let mut path = Vec::new();
            let mut net = r.eclk;
            while !c.clock_roots.contains(&net) {
                let Some(Driver::Gate(g)) = c.drivers[net.idx()] else {
                    unreachable!("reachability implies a gate driver");
                };
                path.push(g);
                net = *c
                    .gate(g)
                    .inputs
                    .iter()
                    .find(|i| reaches[i.idx()].is_some())
                    .unwrap();
            }
            path.reverse();
            Ok(ClockPath { root, gates: path })
        })
        .collect()
}

fn register_pairs(c: &ElaboratedCircuit) -> Vec<RegPair> {
    let mut topo_pos = vec![0usize; c.gates.len()];
    for (pos, g) in c.comb.iter().enumerate() {
        topo_pos[g.idx()] = pos;
    }
    let mut pairs = Vec::new();
    for (li, launch) in c.regs.iter().enumerate() {
        // forward reach from Q
        let mut net_fwd = vec![false; c.nets.len()];
        let mut gate_fwd = vec![false; c.gates.len()];
        net_fwd[launch.q.idx()] = true;
        for g in &c.comb {
            let gate = c.gate(*g);
            if gate.inputs.iter().any(|i| net_fwd[i.idx()]) {
                gate_fwd[g.idx()] = true;
                net_fwd[gate.output.idx()] = true;
            }
        }
        for (ci, capture) in c.regs.iter().enumerate() {
            if !net_fwd[capture.d.idx()] {
                continue;
            }
            let mut net_back = vec![false; c.nets.len()];
            net_back[capture.d.idx()] = true;
            let mut cone = Vec::new();
            for g in c.comb.iter().rev() {
                let gate = c.gate(*g);
                if gate_fwd[g.idx()] && net_back[gate.output.idx()] {
                    cone.push(*g);
                    for i in &gate.inputs {
                        net_back[i.idx()] = true;
                    }
                }
            }
            cone.sort_by_key(|g| topo_pos[g.idx()]);
            pairs.push(RegPair {
                launch: RegId(li as u32),
                capture: RegId(ci as u32),
                cone,
            });
        }
    }
    pairs
}

fn mode_warnings(c: &ElaboratedCircuit) -> Vec<ElabWarning> {
    let mut out = Vec::new();
    for (i, r) in c.regs.iter().enumerate() {
        let Some(mode) = r.mode else { continue };
        let root = c.clock_paths[i].root;
        // registers in the combinational fan-in of the mode net
        let mut stack = vec![mode];
        let mut seen = vec![false; c.nets.len()];
        let mut in_domain = false;
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n.idx()], true) {
                continue;
            }
            match c.drivers[n.idx()] {
                Some(Driver::Gate(g)) => stack.extend(c.gate(g).inputs.iter().copied()),
                Some(Driver::Register(src)) if c.clock_paths[src.idx()].root == root => {
                    in_domain = true;
                }
                _ => {}
            }
        }
        if in_domain {
            out.push(ElabWarning::ModeDrivenInDomain {
                register: r.name.clone(),
                mode: c.net_name(mode).to_string(),
            });
        }
    }
    out
}
