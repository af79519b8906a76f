//! Circuit intermediate representation for multiple-control Toffoli circuits.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over `n` named lines. Gates
//! are applied in list order, index 0 first.
//!
//! # Bit order
//!
//! States are encoded as integers in `[0, 2^n)`. The line with index 0 (the
//! first declared line) is the **most significant** bit. For a circuit over
//! lines `a,b,c`, the state `0b100` means `a=1, b=0, c=0`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest number of lines a circuit may declare.
pub const MAX_WIDTH: usize = 63;

/// Largest width [`simulate`] accepts; a permutation has `2^width` entries.
pub const MAX_SIM_WIDTH: usize = 16;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("circuit must have at least one line")]
    NoLines,
    #[error("circuit width {0} exceeds the maximum of {MAX_WIDTH} lines")]
    TooWide(usize),
    #[error("invalid line name {0:?}")]
    InvalidName(String),
    #[error("duplicate line name {0:?}")]
    DuplicateName(String),
    #[error("line {line} is out of range for a circuit of width {width}")]
    LineOutOfRange { line: usize, width: usize },
    #[error("line {0} appears more than once in a gate")]
    DuplicateOperand(usize),
    #[error("target line {0} is also a control")]
    TargetIsControl(usize),
    #[error("simulation of width {0} exceeds the limit of {MAX_SIM_WIDTH} lines")]
    SimulationLimit(usize),
    #[error("width mismatch: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("permutation length {got} does not match circuit width {width} (expected {expected})")]
    LengthMismatch {
        got: usize,
        expected: usize,
        width: usize,
    },
    #[error("mapping is not a bijection on [0, {0})")]
    NotBijection(usize),
}

/// Required value of a control line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    /// Satisfied when the line carries 1.
    Positive,
    /// Satisfied when the line carries 0.
    Negative,
}

impl Polarity {
    pub fn toggled(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Polarity::Positive
    }

    /// Bit value that satisfies a control of this polarity.
    pub fn required_bit(self) -> u64 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => 0,
        }
    }
}

/// A control line with its polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Control {
    pub line: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn new(line: usize, polarity: Polarity) -> Self {
        Self { line, polarity }
    }

    pub fn pos(line: usize) -> Self {
        Self::new(line, Polarity::Positive)
    }

    pub fn neg(line: usize) -> Self {
        Self::new(line, Polarity::Negative)
    }

    pub fn toggled(self) -> Self {
        Self::new(self.line, self.polarity.toggled())
    }
}

/// A multiple-control Toffoli gate `C^mNOT(C; t)`.
///
/// Controls are kept sorted by line index, so two gates with the same
/// polarity-tagged control set compare equal regardless of construction
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gate {
    controls: Vec<Control>,
    target: usize,
}

impl Gate {
    pub fn new(controls: impl IntoIterator<Item = Control>, target: usize) -> Result<Self, CircuitError> {
        let mut controls: Vec<Control> = controls.into_iter().collect();
        controls.sort_by_key(|c| c.line);
        for pair in controls.windows(2) {
            if pair[0].line == pair[1].line {
                return Err(CircuitError::DuplicateOperand(pair[0].line));
            }
        }
        if controls.iter().any(|c| c.line == target) {
            return Err(CircuitError::TargetIsControl(target));
        }
        Ok(Self { controls, target })
    }

    pub fn not(target: usize) -> Self {
        Self {
            controls: Vec::new(),
            target,
        }
    }

    pub fn cnot(control: Control, target: usize) -> Result<Self, CircuitError> {
        Self::new([control], target)
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Controls sorted by line index.
    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn is_not(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn control_on(&self, line: usize) -> Option<Control> {
        self.controls.iter().copied().find(|c| c.line == line)
    }

    pub fn has_control_line(&self, line: usize) -> bool {
        self.control_on(line).is_some()
    }

    pub fn has_positive_control(&self) -> bool {
        self.controls.iter().any(|c| c.polarity.is_positive())
    }

    /// Returns a copy with the polarity of the control on `line` toggled.
    /// Gates without a control on `line` are returned unchanged.
    pub fn with_toggled_control(&self, line: usize) -> Self {
        let controls = self
            .controls
            .iter()
            .map(|&c| if c.line == line { c.toggled() } else { c })
            .collect();
        Self {
            controls,
            target: self.target,
        }
    }

    /// Highest line index referenced by the gate.
    pub fn max_line(&self) -> usize {
        self.controls
            .iter()
            .map(|c| c.line)
            .chain(std::iter::once(self.target))
            .max()
            .unwrap_or(self.target)
    }

    /// `(mask, value)` such that the gate fires on `state` iff
    /// `state & mask == value`.
    pub fn fire_pattern(&self, width: usize) -> (u64, u64) {
        let mut mask = 0u64;
        let mut value = 0u64;
        for c in &self.controls {
            let bit = line_bit(c.line, width);
            mask |= bit;
            if c.polarity.is_positive() {
                value |= bit;
            }
        }
        (mask, value)
    }
}

/// Bit of the state integer carrying `line` (line 0 is the MSB).
#[inline]
pub fn line_bit(line: usize, width: usize) -> u64 {
    1u64 << (width - 1 - line)
}

/// True iff every positive control reads 1 and every negative control reads 0.
pub fn gate_fires(gate: &Gate, width: usize, state: u64) -> bool {
    let (mask, value) = gate.fire_pattern(width);
    state & mask == value
}

/// Applies one gate to a basis state.
pub fn apply_gate(gate: &Gate, width: usize, state: u64) -> u64 {
    if gate_fires(gate, width, state) {
        state ^ line_bit(gate.target, width)
    } else {
        state
    }
}

/// An ordered gate list over `n` named lines.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit {
    names: Vec<String>,
    gates: Vec<Gate>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name
            .chars()
            .any(|ch| ch.is_whitespace() || matches!(ch, ',' | '\'' | '#' | '(' | ')'))
}

impl Circuit {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, CircuitError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(CircuitError::NoLines);
        }
        if names.len() > MAX_WIDTH {
            return Err(CircuitError::TooWide(names.len()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !valid_name(name) {
                return Err(CircuitError::InvalidName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(CircuitError::DuplicateName(name.clone()));
            }
        }
        Ok(Self {
            names,
            gates: Vec::new(),
        })
    }

    /// Circuit over `width` lines named `a`, `b`, ..., `z`, `x26`, `x27`, ...
    pub fn with_width(width: usize) -> Result<Self, CircuitError> {
        Self::new((0..width).map(default_line_name))
    }

    pub fn from_gates(
        names: impl IntoIterator<Item = impl Into<String>>,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Self::new(names)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, line: usize) -> &str {
        &self.names[line]
    }

    pub fn line_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        let line = gate.max_line();
        if line >= self.width() {
            return Err(CircuitError::LineOutOfRange {
                line,
                width: self.width(),
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Same lines, different gates. Gates must already be valid for this width.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Self {
        debug_assert!(gates.iter().all(|g| g.max_line() < self.width()));
        Self {
            names: self.names.clone(),
            gates,
        }
    }

    /// Replaces `gates[range]` with `replacement`.
    pub fn splice(&self, range: std::ops::Range<usize>, replacement: &[Gate]) -> Self {
        let mut gates = Vec::with_capacity(self.gates.len() + replacement.len());
        gates.extend_from_slice(&self.gates[..range.start]);
        gates.extend_from_slice(replacement);
        gates.extend_from_slice(&self.gates[range.end..]);
        self.with_gates(gates)
    }

    /// The same gates in reverse order; this realizes the inverse permutation.
    pub fn reversed(&self) -> Self {
        let mut gates = self.gates.clone();
        gates.reverse();
        self.with_gates(gates)
    }

    /// Applies the whole circuit to a single basis state.
    pub fn apply(&self, state: u64) -> u64 {
        let width = self.width();
        self.gates.iter().fold(state, |s, g| apply_gate(g, width, s))
    }
}

pub fn default_line_name(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("x{i}")
    }
}

/// A bijection on `[0, 2^n)`; entry `i` is the image of input state `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    width: usize,
    mapping: Vec<u64>,
}

impl Permutation {
    pub fn identity(width: usize) -> Result<Self, CircuitError> {
        if width > MAX_SIM_WIDTH {
            return Err(CircuitError::SimulationLimit(width));
        }
        Ok(Self {
            width,
            mapping: (0..1u64 << width).collect(),
        })
    }

    /// Validates that `mapping` is a bijection whose length is a power of two.
    pub fn from_mapping(mapping: Vec<u64>) -> Result<Self, CircuitError> {
        let len = mapping.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(CircuitError::NotBijection(len));
        }
        let width = len.trailing_zeros() as usize;
        if width > MAX_SIM_WIDTH {
            return Err(CircuitError::SimulationLimit(width));
        }
        let mut seen = vec![false; len];
        for &v in &mapping {
            let slot = seen.get_mut(v as usize).ok_or(CircuitError::NotBijection(len))?;
            if *slot {
                return Err(CircuitError::NotBijection(len));
            }
            *slot = true;
        }
        Ok(Self { width, mapping })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn mapping(&self) -> &[u64] {
        &self.mapping
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn get(&self, state: u64) -> u64 {
        self.mapping[state as usize]
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.mapping.len()];
        self.mapping.iter().all(|&v| match seen.get_mut(v as usize) {
            Some(slot) if !*slot => {
                *slot = true;
                true
            }
            _ => false,
        })
    }

    /// `other ∘ self`: apply `self` first, then `other`.
    pub fn then(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.width, other.width);
        Permutation {
            width: self.width,
            mapping: self.mapping.iter().map(|&s| other.get(s)).collect(),
        }
    }

    /// First input state where the two permutations disagree.
    pub fn first_difference(&self, other: &Permutation) -> Option<u64> {
        self.mapping
            .iter()
            .zip(&other.mapping)
            .position(|(a, b)| a != b)
            .map(|i| i as u64)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.mapping.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// Formats `state` as an MSB-first bit string of `width` characters.
pub fn state_bits(state: u64, width: usize) -> String {
    (0..width)
        .map(|line| if state & line_bit(line, width) != 0 { '1' } else { '0' })
        .collect()
}

/// The permutation realized by `circuit`, for widths up to [`MAX_SIM_WIDTH`].
pub fn simulate(circuit: &Circuit) -> Result<Permutation, CircuitError> {
    let width = circuit.width();
    let mut perm = Permutation::identity(width)?;
    for gate in circuit.gates() {
        let (mask, value) = gate.fire_pattern(width);
        let flip = line_bit(gate.target(), width);
        for s in perm.mapping.iter_mut() {
            if *s & mask == value {
                *s ^= flip;
            }
        }
    }
    Ok(perm)
}

pub fn equivalent(a: &Circuit, b: &Circuit) -> Result<bool, CircuitError> {
    if a.width() != b.width() {
        return Err(CircuitError::WidthMismatch(a.width(), b.width()));
    }
    Ok(simulate(a)? == simulate(b)?)
}

pub fn matches_spec(circuit: &Circuit, spec: &Permutation) -> Result<bool, CircuitError> {
    let expected = 1usize.checked_shl(circuit.width() as u32).unwrap_or(0);
    if spec.len() != expected {
        return Err(CircuitError::LengthMismatch {
            got: spec.len(),
            expected,
            width: circuit.width(),
        });
    }
    Ok(simulate(circuit)? == *spec)
}

/// Moving rule: adjacent gates may be interchanged when neither target is a
/// control line of the other. Purely syntactic.
pub fn commutes(g1: &Gate, g2: &Gate) -> bool {
    !g2.has_control_line(g1.target()) && !g1.has_control_line(g2.target())
}

/// Deletion rule predicate: same target and the same polarity-tagged controls.
pub fn same_function(g1: &Gate, g2: &Gate) -> bool {
    g1 == g2
}
