// SPDX-License-Identifier: Apache-2.0

//! Structural netlists: the line-oriented text format, validation and
//! elaboration into the flat graph consumed by the simulator and the timing
//! engine.
//!
//! Buses are sugar: `input A[4]` declares the scalar nets `A[0]`..`A[3]` and
//! every gate or register pin refers to exactly one scalar net.

mod elaborate;
mod parse;
mod render;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use elaborate::{
    elaborate, infer_clock_roots, ClockPath, Driver, ElabError, ElabGate, ElabNet, ElabRegister,
    ElabWarning, ElaboratedCircuit, GateId, GateOrigin, NetId, NetRole, RegId, RegPair,
};
pub use parse::{parse_netlist, ParseError};
pub use render::render;
pub use validate::{validate, Diagnostic, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    Not,
    Buf,
}

impl GateKind {
    pub const ALL: [GateKind; 8] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xnor,
        GateKind::Not,
        GateKind::Buf,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Buf => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xnor => "XNOR",
            GateKind::Not => "NOT",
            GateKind::Buf => "BUF",
        }
    }

    /// Evaluates the gate. `b` is ignored by the single-input kinds.
    #[inline]
    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Xor => a ^ b,
            GateKind::Nand => !(a & b),
            GateKind::Nor => !(a | b),
            GateKind::Xnor => !(a ^ b),
            GateKind::Not => !a,
            GateKind::Buf => a,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL.into_iter().find(|k| k.name() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
}

/// A module port. `width: None` is a scalar port, `Some(w)` a bus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    pub width: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wire {
    pub name: String,
    pub width: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub output: String,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegisterKind {
    Rising,
    Falling,
    /// Rising edge for `M = 0`, falling edge for `M = 1`.
    Switchable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub q: String,
    pub d: String,
    pub clock: String,
    pub kind: RegisterKind,
    /// Present iff `kind` is [`RegisterKind::Switchable`].
    pub mode: Option<String>,
    pub init: bool,
}

impl Register {
    pub fn rising(q: impl Into<String>, d: impl Into<String>, clock: impl Into<String>) -> Self {
        Register {
            q: q.into(),
            d: d.into(),
            clock: clock.into(),
            kind: RegisterKind::Rising,
            mode: None,
            init: false,
        }
    }

    pub fn switchable(
        q: impl Into<String>,
        d: impl Into<String>,
        clock: impl Into<String>,
        mode: impl Into<String>,
    ) -> Self {
        Register {
            q: q.into(),
            d: d.into(),
            clock: clock.into(),
            kind: RegisterKind::Switchable,
            mode: Some(mode.into()),
            init: false,
        }
    }
}

/// A flat (non-hierarchical) circuit description in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Netlist {
    pub name: String,
    pub ports: Vec<Port>,
    pub wires: Vec<Wire>,
    pub gates: Vec<Gate>,
    pub registers: Vec<Register>,
}

/// Name of bit `index` of bus `name`.
pub fn bit_name(name: &str, index: u32) -> String {
    format!("{name}[{index}]")
}

pub(crate) fn expand(name: &str, width: Option<u32>) -> Vec<String> {
    match width {
        None => vec![name.to_string()],
        Some(w) => (0..w).map(|i| bit_name(name, i)).collect(),
    }
}

impl Netlist {
    pub fn new(name: impl Into<String>) -> Self {
        Netlist {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn input(&mut self, name: &str, width: Option<u32>) -> &mut Self {
        self.ports.push(Port {
            name: name.to_string(),
            direction: Direction::Input,
            width,
        });
        self
    }

    pub fn output(&mut self, name: &str, width: Option<u32>) -> &mut Self {
        self.ports.push(Port {
            name: name.to_string(),
            direction: Direction::Output,
            width,
        });
        self
    }

    pub fn wire(&mut self, name: &str, width: Option<u32>) -> &mut Self {
        self.wires.push(Wire {
            name: name.to_string(),
            width,
        });
        self
    }

    pub fn gate(&mut self, kind: GateKind, output: &str, inputs: &[&str]) -> &mut Self {
        self.gates.push(Gate {
            kind,
            output: output.to_string(),
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        });
        self
    }

    pub fn register(&mut self, register: Register) -> &mut Self {
        self.registers.push(register);
        self
    }

    /// All scalar nets: ports first, then wires, each in declaration order.
    pub fn nets(&self) -> Vec<String> {
        self.ports
            .iter()
            .flat_map(|p| expand(&p.name, p.width))
            .chain(self.wires.iter().flat_map(|w| expand(&w.name, w.width)))
            .collect()
    }

    pub fn input_nets(&self) -> Vec<String> {
        self.port_nets(Direction::Input)
    }

    pub fn output_nets(&self) -> Vec<String> {
        self.port_nets(Direction::Output)
    }

    fn port_nets(&self, direction: Direction) -> Vec<String> {
        self.ports
            .iter()
            .filter(|p| p.direction == direction)
            .flat_map(|p| expand(&p.name, p.width))
            .collect()
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn switchable_count(&self) -> usize {
        self.registers
            .iter()
            .filter(|r| r.kind == RegisterKind::Switchable)
            .count()
    }
}
