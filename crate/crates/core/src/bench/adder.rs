// SPDX-License-Identifier: Apache-2.0

use super::BenchError;
use crate::netlist::{bit_name, GateKind, Netlist, Register};

/// Two-stage pipelined ripple-carry adder.
///
/// ```text
///  A,B --[in regs]--> low half adder --> [mid regs: partial sum, carry,
///                                          high A/B bits] --> high half adder
///                                                            --> [out regs] --> SUM, COUT
/// ```
///
/// Input and output registers are always rising-edge. The mid registers are
/// rising-edge in the conventional build and switchable (sharing input `M`)
/// otherwise, so each in->mid->out chain is a register pair of either kind.
/// With `M = 1` the mid stage captures on the falling edge and a sum leaves
/// one period after it entered instead of two.
pub fn build_pipelined_adder(width: u32, switchable: bool) -> Result<Netlist, BenchError> {
    if width < 2 || !width.is_multiple_of(2) {
        return Err(BenchError::BadWidth(width));
    }
    let h = width / 2;
    let name = if switchable {
        format!("adder{width}_switchable")
    } else {
        format!("adder{width}_conventional")
    };
    let mut n = Netlist::new(name);
    n.input("clk", None);
    if switchable {
        n.input("M", None);
    }
    n.input("A", Some(width))
        .input("B", Some(width))
        .output("SUM", Some(width))
        .output("COUT", None);
    n.wire("ar", Some(width)).wire("br", Some(width));
    n.wire("p", Some(h)).wire("pc", None);
    n.wire("ah", Some(h)).wire("bh", Some(h));

    let mid = |q: String, d: String| {
        if switchable {
            Register::switchable(q, d, "clk", "M")
        } else {
            Register::rising(q, d, "clk")
        }
    };

    for i in 0..width {
        n.register(Register::rising(bit_name("ar", i), bit_name("A", i), "clk"));
        n.register(Register::rising(bit_name("br", i), bit_name("B", i), "clk"));
    }

    // low half: bit 0 is a half adder since there is no carry in
    let lo: Vec<(String, String)> = (0..h)
        .map(|i| (bit_name("ar", i), bit_name("br", i)))
        .collect();
    let (s1, c1) = ripple(&mut n, "1", &lo, None);

    for i in 0..h {
        n.register(mid(bit_name("p", i), s1[i as usize].clone()));
        n.register(mid(bit_name("ah", i), bit_name("ar", h + i)));
        n.register(mid(bit_name("bh", i), bit_name("br", h + i)));
    }
    n.register(mid("pc".into(), c1));

    let hi: Vec<(String, String)> = (0..h)
        .map(|i| (bit_name("ah", i), bit_name("bh", i)))
        .collect();
    let (s2, c2) = ripple(&mut n, "2", &hi, Some("pc".to_string()));

    for i in 0..h {
        n.register(Register::rising(
            bit_name("SUM", i),
            bit_name("p", i),
            "clk",
        ));
        n.register(Register::rising(
            bit_name("SUM", h + i),
            s2[i as usize].clone(),
            "clk",
        ));
    }
    n.register(Register::rising("COUT", c2, "clk"));
    Ok(n)
}

/// Ripple-carry chain over `bits`; returns the sum nets and the carry out.
fn ripple(
    n: &mut Netlist,
    stage: &str,
    bits: &[(String, String)],
    carry_in: Option<String>,
) -> (Vec<String>, String) {
    let mut sums = Vec::new();
    let mut carry = carry_in;
    for (i, (a, b)) in bits.iter().enumerate() {
        let x = format!("x{stage}_{i}");
        let s = format!("s{stage}_{i}");
        let g = format!("g{stage}_{i}");
        let c = format!("c{stage}_{i}");
        match carry {
            None => {
                n.wire(&s, None).wire(&c, None);
                n.gate(GateKind::Xor, &s, &[a.as_str(), b.as_str()]);
                n.gate(GateKind::And, &c, &[a.as_str(), b.as_str()]);
            }
            Some(cin) => {
                let t = format!("t{stage}_{i}");
                for w in [&x, &s, &g, &t, &c] {
                    n.wire(w, None);
                }
                n.gate(GateKind::Xor, &x, &[a.as_str(), b.as_str()]);
                n.gate(GateKind::Xor, &s, &[x.as_str(), cin.as_str()]);
                n.gate(GateKind::And, &g, &[a.as_str(), b.as_str()]);
                n.gate(GateKind::And, &t, &[x.as_str(), cin.as_str()]);
                n.gate(GateKind::Or, &c, &[g.as_str(), t.as_str()]);
            }
        }
        sums.push(s);
        carry = Some(c);
    }
    (sums, carry.expect("at least one bit"))
}
