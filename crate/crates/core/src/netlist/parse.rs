// SPDX-License-Identifier: Apache-2.0

//! Parser for the line-oriented netlist format:
//!
//! ```text
//! module NAME
//! input  NAME [ "[" INT "]" ]
//! output NAME [ "[" INT "]" ]
//! wire   NAME [ "[" INT "]" ]
//! gate KIND OUT IN1 [IN2]
//! dff  Q D clock CLK edge (rising|falling) [init (0|1)]
//! sdff Q D clock CLK mode M [init (0|1)]
//! end
//! ```
//!
//! `#` starts a comment. Bus bits are referenced as `name[i]`.

use std::fmt;

use thiserror::Error;

use super::validate::{validate, Diagnostic, Location};
use super::{bit_name, Direction, Gate, GateKind, Netlist, Port, Register, RegisterKind, Wire};

/// A validation diagnostic tied to the source line of the offending
/// declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocatedDiagnostic {
    pub line: usize,
    pub diagnostic: Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown gate kind `{kind}`")]
    UnknownGateKind {
        line: usize,
        column: usize,
        kind: String,
    },
    #[error("{}", DisplayInvalid(.0))]
    Invalid(Vec<LocatedDiagnostic>),
}

struct DisplayInvalid<'a>(&'a [LocatedDiagnostic]);

impl fmt::Display for DisplayInvalid<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {} [{}]", d.line, d.diagnostic, d.diagnostic.code())?;
        }
        Ok(())
    }
}

impl ParseError {
    /// One `path:line[:col]: message` line per problem.
    pub fn report(&self, path: &str) -> Vec<String> {
        match self {
            ParseError::Invalid(diags) => diags
                .iter()
                .map(|d| {
                    format!(
                        "{path}:{}: {} [{}]",
                        d.line,
                        d.diagnostic,
                        d.diagnostic.code()
                    )
                })
                .collect(),
            other => vec![format!("{path}:{other}")],
        }
    }

    /// Whether any contained diagnostic (or the syntax error itself) has the
    /// given code.
    pub fn has_code(&self, code: &str) -> bool {
        match self {
            ParseError::Invalid(d) => d.iter().any(|d| d.diagnostic.code() == code),
            ParseError::Syntax { .. } => code == "syntax",
            ParseError::UnknownGateKind { .. } => code == "unknown-gate-kind",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok<'a> {
    Word(&'a str),
    Open,
    Close,
}

#[derive(Debug, Clone)]
struct Token<'a> {
    tok: Tok<'a>,
    col: usize,
}

fn tokenize<'a>(line: &'a str) -> Vec<Token<'a>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let flush = |start: &mut Option<usize>, end: usize, out: &mut Vec<Token<'a>>| {
        if let Some(s) = start.take() {
            out.push(Token {
                tok: Tok::Word(&line[s..end]),
                col: line[..s].chars().count() + 1,
            });
        }
    };
    for (i, c) in line.char_indices() {
        match c {
            '#' => {
                flush(&mut start, i, &mut out);
                return out;
            }
            '[' | ']' => {
                flush(&mut start, i, &mut out);
                out.push(Token {
                    tok: if c == '[' { Tok::Open } else { Tok::Close },
                    col: line[..i].chars().count() + 1,
                });
            }
            c if c.is_whitespace() => flush(&mut start, i, &mut out),
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    flush(&mut start, line.len(), &mut out);
    out
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '.'))
}

struct Cursor<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
    line: usize,
    line_len: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        let column = self
            .toks
            .get(self.pos)
            .map(|t| t.col)
            .unwrap_or(self.line_len + 1);
        ParseError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn word(&mut self, what: &str) -> Result<&'a str, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = *w;
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'a str, ParseError> {
        let w = self.word(what)?;
        if is_ident(w) {
            Ok(w)
        } else {
            self.pos -= 1;
            Err(self.err(format!("`{w}` is not a valid {what}")))
        }
    }

    fn int(&mut self) -> Result<u32, ParseError> {
        let w = self.word("integer")?;
        w.parse().map_err(|_| {
            self.pos -= 1;
            self.err(format!("`{w}` is not an integer"))
        })
    }

    /// `[ INT ]` if the next token opens a bracket.
    fn index(&mut self) -> Result<Option<u32>, ParseError> {
        if self.peek() != Some(&Tok::Open) {
            return Ok(None);
        }
        self.pos += 1;
        let i = self.int()?;
        if self.peek() != Some(&Tok::Close) {
            return Err(self.err("expected `]`"));
        }
        self.pos += 1;
        Ok(Some(i))
    }

    fn net(&mut self, what: &str) -> Result<String, ParseError> {
        let name = self.ident(what)?;
        Ok(match self.index()? {
            Some(i) => bit_name(name, i),
            None => name.to_string(),
        })
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing token"))
        }
    }
}

/// Parses and validates a netlist. Buses are expanded to scalar nets and
/// declaration order is preserved.
pub fn parse_netlist(text: &str) -> Result<Netlist, ParseError> {
    let mut netlist: Option<Netlist> = None;
    let mut ended = false;
    // Source line of every declaration, indexed like the netlist vectors.
    let mut port_lines = Vec::new();
    let mut wire_lines = Vec::new();
    let mut gate_lines = Vec::new();
    let mut reg_lines = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            toks,
            pos: 0,
            line,
            line_len: raw.chars().count(),
        };
        if ended {
            return Err(cur.err("statement after `end`"));
        }
        let keyword = cur.word("statement")?;
        let Some(n) = netlist.as_mut() else {
            if keyword != "module" {
                cur.pos = 0;
                return Err(cur.err("expected `module`"));
            }
            let name = cur.ident("module name")?;
            cur.finish()?;
            netlist = Some(Netlist::new(name));
            continue;
        };
        match keyword {
            "module" => {
                cur.pos = 0;
                return Err(cur.err("nested `module` is not supported"));
            }
            "input" | "output" | "wire" => {
                let name = cur.ident("net name")?.to_string();
                let width = cur.index()?;
                cur.finish()?;
                match keyword {
                    "wire" => {
                        n.wires.push(Wire { name, width });
                        wire_lines.push(line);
                    }
                    _ => {
                        let direction = if keyword == "input" {
                            Direction::Input
                        } else {
                            Direction::Output
                        };
                        n.ports.push(Port {
                            name,
                            direction,
                            width,
                        });
                        port_lines.push(line);
                    }
                }
            }
            "gate" => {
                let kind_col = cur.toks.get(cur.pos).map(|t| t.col);
                let kind_word = cur.word("gate kind")?;
                let kind: GateKind =
                    kind_word.parse().map_err(|_| ParseError::UnknownGateKind {
                        line,
                        column: kind_col.unwrap_or(1),
                        kind: kind_word.to_string(),
                    })?;
                let output = cur.net("output net")?;
                let mut inputs = Vec::new();
                while !cur.at_end() {
                    inputs.push(cur.net("input net")?);
                }
                n.gates.push(Gate {
                    kind,
                    output,
                    inputs,
                });
                gate_lines.push(line);
            }
            "dff" | "sdff" => {
                let q = cur.net("register output")?;
                let d = cur.net("register input")?;
                let mut clock = None;
                let mut edge = None;
                let mut mode = None;
                let mut init = None;
                while !cur.at_end() {
                    let clause_pos = cur.pos;
                    let clause = cur.word("clause")?;
                    let dup = |cur: &mut Cursor, set: bool| {
                        if set {
                            cur.pos = clause_pos;
                            Err(cur.err(format!("duplicate `{clause}` clause")))
                        } else {
                            Ok(())
                        }
                    };
                    match clause {
                        "clock" => {
                            dup(&mut cur, clock.is_some())?;
                            clock = Some(cur.net("clock net")?);
                        }
                        "mode" => {
                            dup(&mut cur, mode.is_some())?;
                            mode = Some(cur.net("mode net")?);
                        }
                        "edge" if keyword == "dff" => {
                            dup(&mut cur, edge.is_some())?;
                            edge = Some(match cur.word("edge")? {
                                "rising" => RegisterKind::Rising,
                                "falling" => RegisterKind::Falling,
                                other => {
                                    cur.pos -= 1;
                                    return Err(cur.err(format!(
                                        "edge must be `rising` or `falling`, found `{other}`"
                                    )));
                                }
                            });
                        }
                        "init" => {
                            dup(&mut cur, init.is_some())?;
                            init = Some(match cur.word("init value")? {
                                "0" => false,
                                "1" => true,
                                other => {
                                    cur.pos -= 1;
                                    return Err(
                                        cur.err(format!("init must be 0 or 1, found `{other}`"))
                                    );
                                }
                            });
                        }
                        other => {
                            cur.pos = clause_pos;
                            return Err(cur.err(format!("unexpected `{other}` in {keyword}")));
                        }
                    }
                }
                let Some(clock) = clock else {
                    return Err(cur.err(format!("{keyword} requires a `clock` clause")));
                };
                let kind = if keyword == "sdff" {
                    RegisterKind::Switchable
                } else {
                    match edge {
                        Some(e) => e,
                        None => return Err(cur.err("dff requires an `edge` clause")),
                    }
                };
                n.registers.push(Register {
                    q,
                    d,
                    clock,
                    kind,
                    mode,
                    init: init.unwrap_or(false),
                });
                reg_lines.push(line);
            }
            "end" => {
                cur.finish()?;
                ended = true;
            }
            other => {
                cur.pos = 0;
                return Err(cur.err(format!("unknown statement `{other}`")));
            }
        }
    }

    let eof = |message: &str| ParseError::Syntax {
        line: last_line.max(1),
        column: 1,
        message: message.to_string(),
    };
    let netlist = netlist.ok_or_else(|| eof("missing `module` declaration"))?;
    if !ended {
        return Err(eof("missing `end`"));
    }

    let diags = validate(&netlist);
    if diags.is_empty() {
        return Ok(netlist);
    }
    let line_of = |at: Location| match at {
        Location::Port(i) => port_lines[i],
        Location::Wire(i) => wire_lines[i],
        Location::Gate(i) => gate_lines[i],
        Location::Register(i) => reg_lines[i],
    };
    Err(ParseError::Invalid(
        diags
            .into_iter()
            .map(|diagnostic| LocatedDiagnostic {
                line: line_of(diagnostic.location()),
                diagnostic,
            })
            .collect(),
    ))
}
