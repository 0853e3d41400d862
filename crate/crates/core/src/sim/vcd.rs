// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};

use super::SimState;
use crate::netlist::ElaboratedCircuit;

/// Fixed header text. Nothing time- or host-dependent is written, so the same
/// run always produces the same bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcdHeader {
    pub version: String,
    pub comment: Option<String>,
}

impl Default for VcdHeader {
    fn default() -> Self {
        VcdHeader {
            version: format!("edgesim {}", env!("CARGO_PKG_VERSION")),
            comment: None,
        }
    }
}

/// Short printable identifier code: `!`, `"`, ... `~`, `!!`, `"!`, ...
pub fn id_code(mut i: usize) -> String {
    let mut s = String::new();
    loop {
        s.push((b'!' + (i % 94) as u8) as char);
        i /= 94;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    s
}

pub(super) fn write<W: Write>(
    out: &mut W,
    circuit: &ElaboratedCircuit,
    state: &SimState,
    header: &VcdHeader,
) -> io::Result<()> {
    writeln!(out, "$version {} $end", header.version)?;
    if let Some(c) = &header.comment {
        writeln!(out, "$comment {c} $end")?;
    }
    writeln!(out, "$timescale 1ps $end")?;
    writeln!(out, "$scope module {} $end", circuit.name)?;
    let mut code = vec![None; circuit.nets.len()];
    for (i, (net, _)) in state.initial.iter().enumerate() {
        let c = id_code(i);
        writeln!(out, "$var wire 1 {} {} $end", c, circuit.net_name(*net))?;
        code[net.idx()] = Some(c);
    }
    writeln!(out, "$upscope $end")?;
    writeln!(out, "$enddefinitions $end")?;
    if state.initial.is_empty() {
        return Ok(());
    }
    writeln!(out, "#0")?;
    writeln!(out, "$dumpvars")?;
    for (net, v) in &state.initial {
        writeln!(out, "{}{}", *v as u8, code[net.idx()].as_ref().unwrap())?;
    }
    writeln!(out, "$end")?;
    let mut last = None;
    for e in &state.trace {
        if last != Some(e.time) {
            writeln!(out, "#{}", e.time)?;
            last = Some(e.time);
        }
        writeln!(
            out,
            "{}{}",
            e.value as u8,
            code[e.net.idx()].as_ref().unwrap()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::id_code;

    #[test]
    fn id_codes_are_unique_and_printable() {
        assert_eq!(id_code(0), "!");
        assert_eq!(id_code(93), "~");
        assert_eq!(id_code(94), "!!");
        let all: std::collections::BTreeSet<_> = (0..20_000).map(id_code).collect();
        assert_eq!(all.len(), 20_000);
        assert!(all
            .iter()
            .all(|s| s.bytes().all(|b| (b'!'..=b'~').contains(&b))));
    }
}
