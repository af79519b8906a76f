//! Text formats for circuits and permutation specifications.
//!
//! Circuits use a TFC-style netlist with apostrophes marking negative
//! controls:
//!
//! ```text
//! # comment
//! .v a,b,c
//! .i a,b,c
//! .o a,b,c
//! BEGIN
//! t3 a,b',c
//! t1 a
//! END
//! ```
//!
//! `t<k>` is followed by `k` operands; the last one is the target. `.i` and
//! `.o` are checked against `.v` and otherwise ignored. Specifications are
//! parenthesized lists such as `(1,0,3,2,5,7,4,6)`, where entry `i` is the
//! image of input state `i` with the first line as the most significant bit.

use std::collections::HashSet;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Control, Gate, Permutation, Polarity};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("missing .v header")]
    MissingHeader,
    #[error("duplicate .v header")]
    DuplicateHeader,
    #[error("missing BEGIN")]
    MissingBegin,
    #[error("missing END")]
    MissingEnd,
    #[error("unexpected content after END")]
    AfterEnd,
    #[error("unknown directive {0:?}")]
    UnknownDirective(String),
    #[error("unknown line name {0:?}")]
    UnknownLine(String),
    #[error("line {0:?} used more than once in a gate")]
    DuplicateOperand(String),
    #[error("target {0:?} cannot be negative")]
    NegativeTarget(String),
    #[error("gate t{expected} has {got} operands")]
    OperandCount { expected: usize, got: usize },
    #[error("malformed gate statement {0:?}")]
    BadGate(String),
    #[error("{0}")]
    Circuit(#[from] CircuitError),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("specification is empty")]
    Empty,
    #[error("invalid entry {0:?}")]
    BadEntry(String),
    #[error("length {0} is not a power of two of at least 2")]
    BadLength(usize),
    #[error("entry {0} is out of range")]
    OutOfRange(u64),
    #[error("entry {0} appears more than once")]
    Repeated(u64),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

fn err(line: usize, kind: impl Into<ParseErrorKind>) -> ParseError {
    ParseError {
        line,
        kind: kind.into(),
    }
}

fn name_list(rest: &str) -> Vec<String> {
    rest.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn parse_gate(stmt: &str, circuit: &Circuit, lineno: usize) -> Result<Gate, ParseError> {
    let (head, operands) = match stmt.find(char::is_whitespace) {
        Some(pos) => (&stmt[..pos], stmt[pos..].trim()),
        None => (stmt, ""),
    };
    let expected: usize = head
        .strip_prefix('t')
        .and_then(|k| k.parse().ok())
        .filter(|&k| k >= 1)
        .ok_or_else(|| err(lineno, ParseErrorKind::BadGate(stmt.to_string())))?;

    let mut ops = Vec::new();
    for raw in operands.split(',') {
        let raw = raw.trim();
        if raw.is_empty() {
            if operands.is_empty() {
                break;
            }
            return Err(err(lineno, ParseErrorKind::BadGate(stmt.to_string())));
        }
        let (name, negative) = match raw.strip_suffix('\'') {
            Some(n) => (n.trim(), true),
            None => (raw, false),
        };
        let line = circuit
            .line_index(name)
            .ok_or_else(|| err(lineno, ParseErrorKind::UnknownLine(name.to_string())))?;
        ops.push((name, line, negative));
    }
    if ops.len() != expected {
        return Err(err(
            lineno,
            ParseErrorKind::OperandCount {
                expected,
                got: ops.len(),
            },
        ));
    }
    let mut seen = HashSet::new();
    for &(name, line, _) in &ops {
        if !seen.insert(line) {
            return Err(err(lineno, ParseErrorKind::DuplicateOperand(name.to_string())));
        }
    }
    let (target_name, target, target_negative) = ops.pop().expect("k >= 1");
    if target_negative {
        return Err(err(lineno, ParseErrorKind::NegativeTarget(target_name.to_string())));
    }
    let controls = ops.into_iter().map(|(_, line, negative)| {
        Control::new(line, if negative { Polarity::Negative } else { Polarity::Positive })
    });
    Gate::new(controls, target).map_err(|e| err(lineno, e))
}

#[derive(PartialEq, Eq)]
enum Section {
    Header,
    Body,
    Done,
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;
    let mut section = Section::Header;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let stmt = raw.split('#').next().unwrap_or("").trim();
        if stmt.is_empty() {
            continue;
        }
        match section {
            Section::Done => return Err(err(lineno, ParseErrorKind::AfterEnd)),
            Section::Header => {
                if stmt == "BEGIN" {
                    if circuit.is_none() {
                        return Err(err(lineno, ParseErrorKind::MissingHeader));
                    }
                    section = Section::Body;
                } else if let Some(directive) = stmt.strip_prefix('.') {
                    let (name, rest) = directive.split_once(char::is_whitespace).unwrap_or((directive, ""));
                    match name {
                        "v" => {
                            if circuit.is_some() {
                                return Err(err(lineno, ParseErrorKind::DuplicateHeader));
                            }
                            circuit = Some(Circuit::new(name_list(rest)).map_err(|e| err(lineno, e))?);
                        }
                        "i" | "o" => {
                            let c = circuit
                                .as_ref()
                                .ok_or_else(|| err(lineno, ParseErrorKind::MissingHeader))?;
                            if let Some(unknown) = name_list(rest).into_iter().find(|n| c.line_index(n).is_none()) {
                                return Err(err(lineno, ParseErrorKind::UnknownLine(unknown)));
                            }
                        }
                        other => {
                            return Err(err(lineno, ParseErrorKind::UnknownDirective(format!(".{other}"))));
                        }
                    }
                } else if circuit.is_none() {
                    return Err(err(lineno, ParseErrorKind::MissingHeader));
                } else {
                    return Err(err(lineno, ParseErrorKind::MissingBegin));
                }
            }
            Section::Body => {
                if stmt == "END" {
                    section = Section::Done;
                    continue;
                }
                let c = circuit.as_mut().expect("header parsed before BEGIN");
                let gate = parse_gate(stmt, c, lineno)?;
                c.push(gate).map_err(|e| err(lineno, e))?;
            }
        }
    }

    let eof = last_line + 1;
    match section {
        Section::Done => Ok(circuit.expect("header parsed")),
        Section::Body => Err(err(eof, ParseErrorKind::MissingEnd)),
        Section::Header if circuit.is_none() => Err(err(eof, ParseErrorKind::MissingHeader)),
        Section::Header => Err(err(eof, ParseErrorKind::MissingBegin)),
    }
}

/// Canonical text form: controls in line order, negative controls marked
/// with `'`, LF line endings, no trailing newline.
pub fn write_circuit(c: &Circuit) -> String {
    let mut out = format!(".v {}\nBEGIN\n", c.names().join(","));
    for g in c.gates() {
        let mut ops: Vec<String> = g
            .controls()
            .iter()
            .map(|ctl| {
                let name = c.name(ctl.line);
                match ctl.polarity {
                    Polarity::Positive => name.to_string(),
                    Polarity::Negative => format!("{name}'"),
                }
            })
            .collect();
        ops.push(c.name(g.target()).to_string());
        out.push_str(&format!("t{} {}\n", ops.len(), ops.join(",")));
    }
    out.push_str("END");
    out
}

pub fn parse_spec(text: &str) -> Result<Permutation, SpecError> {
    let body = text.trim();
    let body = body
        .strip_prefix('(')
        .and_then(|b| b.strip_suffix(')'))
        .unwrap_or(body)
        .trim();
    if body.is_empty() {
        return Err(SpecError::Empty);
    }
    let entries = body
        .split(',')
        .map(|e| {
            let e = e.trim();
            e.parse::<u64>().map_err(|_| SpecError::BadEntry(e.to_string()))
        })
        .collect::<Result<Vec<u64>, _>>()?;
    let len = entries.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(SpecError::BadLength(len));
    }
    let mut seen = vec![false; len];
    for &v in &entries {
        let slot = seen.get_mut(v as usize).ok_or(SpecError::OutOfRange(v))?;
        if *slot {
            return Err(SpecError::Repeated(v));
        }
        *slot = true;
    }
    Ok(Permutation::from_mapping(entries)?)
}
