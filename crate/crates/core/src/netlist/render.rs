// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::{Direction, Netlist, RegisterKind};

/// Pretty-prints `netlist` in the text format accepted by
/// [`parse_netlist`](super::parse_netlist).
pub fn render(netlist: &Netlist) -> String {
    let mut out = String::new();
    let decl = |out: &mut String, kw: &str, name: &str, width: Option<u32>| {
        match width {
            Some(w) => writeln!(out, "{kw} {name}[{w}]"),
            None => writeln!(out, "{kw} {name}"),
        }
        .unwrap()
    };

    writeln!(out, "module {}", netlist.name).unwrap();
    for p in &netlist.ports {
        let kw = match p.direction {
            Direction::Input => "input",
            Direction::Output => "output",
        };
        decl(&mut out, kw, &p.name, p.width);
    }
    for w in &netlist.wires {
        decl(&mut out, "wire", &w.name, w.width);
    }
    for g in &netlist.gates {
        write!(out, "gate {} {}", g.kind, g.output).unwrap();
        for i in &g.inputs {
            write!(out, " {i}").unwrap();
        }
        out.push('\n');
    }
    for r in &netlist.registers {
        match r.kind {
            RegisterKind::Rising | RegisterKind::Falling => {
                let edge = if r.kind == RegisterKind::Rising {
                    "rising"
                } else {
                    "falling"
                };
                write!(out, "dff {} {} clock {} edge {edge}", r.q, r.d, r.clock).unwrap();
                if let Some(m) = &r.mode {
                    write!(out, " mode {m}").unwrap();
                }
            }
            RegisterKind::Switchable => {
                write!(out, "sdff {} {} clock {}", r.q, r.d, r.clock).unwrap();
                if let Some(m) = &r.mode {
                    write!(out, " mode {m}").unwrap();
                }
            }
        }
        if r.init {
            out.push_str(" init 1");
        }
        out.push('\n');
    }
    out.push_str("end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{parse_netlist, GateKind, Register};
    use proptest::prelude::*;

    #[test]
    fn renders_pair() {
        let mut n = Netlist::new("p");
        n.input("clk", None)
            .input("m", None)
            .input("D", Some(2))
            .output("q", None)
            .wire("t", None)
            .gate(GateKind::Xor, "t", &["D[0]", "D[1]"])
            .register(Register::switchable("q", "t", "clk", "m"));
        n.registers[0].init = true;
        assert_eq!(
            render(&n),
            "module p\ninput clk\ninput m\ninput D[2]\noutput q\nwire t\n\
             gate XOR t D[0] D[1]\nsdff q t clock clk mode m init 1\nend\n"
        );
    }

    /// Random valid netlists: inputs, a gate chain over previously defined
    /// nets, then registers on fresh nets.
    fn arb_netlist() -> impl Strategy<Value = Netlist> {
        let gate = (
            0usize..8,
            any::<prop::sample::Index>(),
            any::<prop::sample::Index>(),
        );
        let reg = (
            any::<prop::sample::Index>(),
            0u8..3,
            any::<bool>(),
            any::<prop::sample::Index>(),
        );
        (
            1u32..4,
            prop::option::of(1u32..5),
            prop::collection::vec(gate, 0..12),
            prop::collection::vec(reg, 0..6),
        )
            .prop_map(|(scalars, bus, gates, regs)| {
                let mut n = Netlist::new("rand");
                let mut pool: Vec<String> = Vec::new();
                for i in 0..scalars {
                    let name = format!("in{i}");
                    n.input(&name, None);
                    pool.push(name);
                }
                if let Some(w) = bus {
                    n.input("BUS", Some(w));
                    pool.extend((0..w).map(|i| format!("BUS[{i}]")));
                }
                n.input("clk", None);
                n.input("mode", None);
                n.output("OUT", Some(gates.len().max(1) as u32));
                for (i, (k, a, b)) in gates.iter().enumerate() {
                    let kind = GateKind::ALL[*k];
                    let out = format!("OUT[{i}]");
                    let ins: Vec<&str> = match kind.arity() {
                        1 => vec![pool[a.index(pool.len())].as_str()],
                        _ => vec![
                            pool[a.index(pool.len())].as_str(),
                            pool[b.index(pool.len())].as_str(),
                        ],
                    };
                    n.gate(kind, &out, &ins);
                    pool.push(out);
                }
                for (i, (d, kind, init, _)) in regs.iter().enumerate() {
                    let q = format!("r{i}");
                    n.wire(&q, None);
                    let d = pool[d.index(pool.len())].clone();
                    let mut r = match kind {
                        0 => Register::rising(q.clone(), d, "clk"),
                        1 => Register {
                            kind: RegisterKind::Falling,
                            ..Register::rising(q.clone(), d, "clk")
                        },
                        _ => Register::switchable(q.clone(), d, "clk", "mode"),
                    };
                    r.init = *init;
                    n.register(r);
                    pool.push(q);
                }
                n
            })
    }

    proptest! {
        #[test]
        fn parse_inverts_render(n in arb_netlist()) {
            prop_assert_eq!(crate::netlist::validate(&n), vec![]);
            let text = render(&n);
            let back = parse_netlist(&text).unwrap();
            prop_assert_eq!(back, n);
        }
    }
}
