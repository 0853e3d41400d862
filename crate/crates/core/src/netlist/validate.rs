// SPDX-License-Identifier: Apache-2.0

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;

use super::{expand, Direction, GateKind, Netlist, RegisterKind};

/// Where in a [`Netlist`] a diagnostic applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Port(usize),
    Wire(usize),
    Gate(usize),
    Register(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Port(i) => write!(f, "port #{i}"),
            Location::Wire(i) => write!(f, "wire #{i}"),
            Location::Gate(i) => write!(f, "gate #{i}"),
            Location::Register(i) => write!(f, "register #{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    DuplicateNet {
        net: String,
        at: Location,
    },
    ZeroWidth {
        name: String,
        at: Location,
    },
    UndeclaredNet {
        net: String,
        at: Location,
    },
    MultipleDrivers {
        net: String,
        at: Location,
    },
    DrivenInput {
        net: String,
        at: Location,
    },
    ArityMismatch {
        kind: GateKind,
        expected: usize,
        found: usize,
        at: Location,
    },
    MissingMode {
        q: String,
        at: Location,
    },
    UnexpectedMode {
        q: String,
        at: Location,
    },
    QIsClock {
        q: String,
        at: Location,
    },
    QIsMode {
        q: String,
        at: Location,
    },
}

impl Diagnostic {
    pub fn location(&self) -> Location {
        match self {
            Diagnostic::DuplicateNet { at, .. }
            | Diagnostic::ZeroWidth { at, .. }
            | Diagnostic::UndeclaredNet { at, .. }
            | Diagnostic::MultipleDrivers { at, .. }
            | Diagnostic::DrivenInput { at, .. }
            | Diagnostic::ArityMismatch { at, .. }
            | Diagnostic::MissingMode { at, .. }
            | Diagnostic::UnexpectedMode { at, .. }
            | Diagnostic::QIsClock { at, .. }
            | Diagnostic::QIsMode { at, .. } => *at,
        }
    }

    /// Short machine-readable code, e.g. `multiple-drivers`.
    pub fn code(&self) -> &'static str {
        match self {
            Diagnostic::DuplicateNet { .. } => "duplicate-net",
            Diagnostic::ZeroWidth { .. } => "zero-width",
            Diagnostic::UndeclaredNet { .. } => "undeclared-net",
            Diagnostic::MultipleDrivers { .. } => "multiple-drivers",
            Diagnostic::DrivenInput { .. } => "driven-input",
            Diagnostic::ArityMismatch { .. } => "arity-mismatch",
            Diagnostic::MissingMode { .. } => "missing-mode",
            Diagnostic::UnexpectedMode { .. } => "unexpected-mode",
            Diagnostic::QIsClock { .. } => "q-is-clock",
            Diagnostic::QIsMode { .. } => "q-is-mode",
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateNet { net, .. } => write!(f, "net `{net}` declared twice"),
            Diagnostic::ZeroWidth { name, .. } => write!(f, "`{name}` declared with width 0"),
            Diagnostic::UndeclaredNet { net, .. } => write!(f, "net `{net}` is not declared"),
            Diagnostic::MultipleDrivers { net, .. } => {
                write!(f, "net `{net}` has more than one driver")
            }
            Diagnostic::DrivenInput { net, .. } => {
                write!(f, "module input `{net}` is driven inside the module")
            }
            Diagnostic::ArityMismatch {
                kind,
                expected,
                found,
                ..
            } => write!(f, "{kind} takes {expected} input(s), found {found}"),
            Diagnostic::MissingMode { q, .. } => {
                write!(f, "switchable register `{q}` has no mode net")
            }
            Diagnostic::UnexpectedMode { q, .. } => {
                write!(f, "register `{q}` is not switchable but names a mode net")
            }
            Diagnostic::QIsClock { q, .. } => write!(f, "register `{q}` drives its own clock"),
            Diagnostic::QIsMode { q, .. } => write!(f, "register `{q}` drives its own mode"),
        }
    }
}

/// Checks every structural invariant of `netlist`. Returns an empty vector
/// iff the netlist is well formed.
pub fn validate(netlist: &Netlist) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    // net -> is module input
    let mut declared: HashMap<String, bool> = HashMap::new();

    let decls = netlist
        .ports
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (
                &p.name,
                p.width,
                p.direction == Direction::Input,
                Location::Port(i),
            )
        })
        .chain(
            netlist
                .wires
                .iter()
                .enumerate()
                .map(|(i, w)| (&w.name, w.width, false, Location::Wire(i))),
        );
    for (name, width, is_input, at) in decls {
        if width == Some(0) {
            diags.push(Diagnostic::ZeroWidth {
                name: name.clone(),
                at,
            });
        }
        for net in expand(name, width) {
            match declared.entry(net) {
                Entry::Occupied(e) => diags.push(Diagnostic::DuplicateNet {
                    net: e.key().clone(),
                    at,
                }),
                Entry::Vacant(e) => {
                    e.insert(is_input);
                }
            }
        }
    }

    let check_ref = |net: &str, at: Location, diags: &mut Vec<Diagnostic>| {
        if !declared.contains_key(net) {
            diags.push(Diagnostic::UndeclaredNet {
                net: net.to_string(),
                at,
            });
        }
    };

    let mut drivers: HashMap<String, Location> = HashMap::new();
    let mut drive = |net: &str, at: Location, diags: &mut Vec<Diagnostic>| {
        if drivers.insert(net.to_string(), at).is_some() {
            diags.push(Diagnostic::MultipleDrivers {
                net: net.to_string(),
                at,
            });
        }
    };

    for (i, gate) in netlist.gates.iter().enumerate() {
        let at = Location::Gate(i);
        if gate.inputs.len() != gate.kind.arity() {
            diags.push(Diagnostic::ArityMismatch {
                kind: gate.kind,
                expected: gate.kind.arity(),
                found: gate.inputs.len(),
                at,
            });
        }
        check_ref(&gate.output, at, &mut diags);
        for input in &gate.inputs {
            check_ref(input, at, &mut diags);
        }
        drive(&gate.output, at, &mut diags);
    }

    for (i, reg) in netlist.registers.iter().enumerate() {
        let at = Location::Register(i);
        check_ref(&reg.q, at, &mut diags);
        check_ref(&reg.d, at, &mut diags);
        check_ref(&reg.clock, at, &mut diags);
        match (reg.kind, &reg.mode) {
            (RegisterKind::Switchable, None) => diags.push(Diagnostic::MissingMode {
                q: reg.q.clone(),
                at,
            }),
            (RegisterKind::Rising | RegisterKind::Falling, Some(_)) => {
                diags.push(Diagnostic::UnexpectedMode {
                    q: reg.q.clone(),
                    at,
                })
            }
            _ => {}
        }
        if let Some(mode) = &reg.mode {
            check_ref(mode, at, &mut diags);
            if *mode == reg.q {
                diags.push(Diagnostic::QIsMode {
                    q: reg.q.clone(),
                    at,
                });
            }
        }
        if reg.q == reg.clock {
            diags.push(Diagnostic::QIsClock {
                q: reg.q.clone(),
                at,
            });
        }
        drive(&reg.q, at, &mut diags);
    }

    let mut driven: Vec<(String, Location)> = drivers.into_iter().collect();
    driven.sort_by_key(|(_, at)| *at);
    for (net, at) in driven {
        if declared.get(net.as_str()) == Some(&true) {
            diags.push(Diagnostic::DrivenInput { net, at });
        }
    }

    diags
}
