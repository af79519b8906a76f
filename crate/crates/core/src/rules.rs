//! Local rewrite rules on adjacent gates.
//!
//! Every rule is a partial rewrite: given a circuit and a position it either
//! produces a [`RewriteResult`] describing a replacement for a small window of
//! gates, or reports that it does not apply. All produced rewrites preserve
//! the circuit's permutation.

use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{commutes, same_function, simulate, Circuit, Control, Gate, Polarity};
use crate::cost::{circuit_cost, gate_cost};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("gate index {index} out of range for a circuit of {len} gates")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("rule not applicable: {0}")]
    NotApplicable(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Delete,
    Move,
    PassRule,
    GeneralizedPassRule,
    RestrictedCtr,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Delete => "delete",
            RuleKind::Move => "move",
            RuleKind::PassRule => "pr",
            RuleKind::GeneralizedPassRule => "gpr",
            RuleKind::RestrictedCtr => "rctr",
        })
    }
}

/// Replacement of `window` in the original circuit by `new_gates`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteResult {
    pub window: Range<usize>,
    pub new_gates: Vec<Gate>,
    pub rule: RuleKind,
}

impl RewriteResult {
    pub fn apply(&self, circuit: &Circuit) -> Circuit {
        circuit.splice(self.window.clone(), &self.new_gates)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    #[default]
    Right,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

fn check_pair(c: &Circuit, i: usize) -> Result<(), RuleError> {
    if i + 1 >= c.len() {
        return Err(RuleError::IndexOutOfRange {
            index: i + 1,
            len: c.len(),
        });
    }
    Ok(())
}

/// Deletion rule on gates `i` and `i + 1`.
pub fn try_delete(c: &Circuit, i: usize) -> Result<Option<RewriteResult>, RuleError> {
    check_pair(c, i)?;
    let gates = c.gates();
    Ok(same_function(&gates[i], &gates[i + 1]).then(|| RewriteResult {
        window: i..i + 2,
        new_gates: Vec::new(),
        rule: RuleKind::Delete,
    }))
}

/// Moving rule on gates `i` and `i + 1`.
pub fn try_move(c: &Circuit, i: usize) -> Result<Option<RewriteResult>, RuleError> {
    check_pair(c, i)?;
    let gates = c.gates();
    Ok(commutes(&gates[i], &gates[i + 1]).then(|| RewriteResult {
        window: i..i + 2,
        new_gates: vec![gates[i + 1].clone(), gates[i].clone()],
        rule: RuleKind::Move,
    }))
}

/// Pass rule: moves the NOT at `i` one position in `direction`.
///
/// The neighbour keeps its shape; if the NOT's line is one of its controls,
/// that control's polarity is toggled.
pub fn pass_not(c: &Circuit, i: usize, direction: Direction) -> Result<RewriteResult, RuleError> {
    let len = c.len();
    if i >= len {
        return Err(RuleError::IndexOutOfRange { index: i, len });
    }
    let not = &c.gates()[i];
    if !not.is_not() {
        return Err(RuleError::NotApplicable("gate is not a NOT"));
    }
    let neighbour_index = match direction {
        Direction::Right => i + 1,
        Direction::Left => i.checked_sub(1).ok_or(RuleError::IndexOutOfRange { index: 0, len })?,
    };
    if neighbour_index >= len {
        return Err(RuleError::IndexOutOfRange {
            index: neighbour_index,
            len,
        });
    }
    let neighbour = c.gates()[neighbour_index].with_toggled_control(not.target());
    let (window, new_gates) = match direction {
        Direction::Right => (i..i + 2, vec![neighbour, not.clone()]),
        Direction::Left => (i - 1..i + 1, vec![not.clone(), neighbour]),
    };
    Ok(RewriteResult {
        window,
        new_gates,
        rule: RuleKind::PassRule,
    })
}

/// Moves the NOT at `from` rightward with the pass rule until it sits
/// directly before `to`, then deletes it together with the NOT at `to`.
fn merge_not_pair(c: &Circuit, from: usize, to: usize) -> Circuit {
    let mut cur = c.clone();
    for pos in from..to - 1 {
        let step = pass_not(&cur, pos, Direction::Right).expect("NOT routed inside the circuit");
        cur = step.apply(&cur);
    }
    let del = try_delete(&cur, to - 1)
        .expect("pair is in range")
        .expect("routed NOT meets its partner");
    del.apply(&cur)
}

fn cost_of(c: &Circuit) -> u64 {
    circuit_cost(c).expect("circuit gates are valid for their width")
}

/// Cancels pairs of NOT gates on the same line by routing one onto the other
/// with the pass rule, then slides each leftover NOT in `direction` to the
/// cheapest reachable position. Never increases quantum cost.
pub fn cancel_not_pairs(c: &Circuit, direction: Direction) -> Circuit {
    let mut cur = c.clone();
    let mut cur_cost = cost_of(&cur);

    'pairs: loop {
        for line in 0..cur.width() {
            let positions: Vec<usize> = cur
                .gates()
                .iter()
                .enumerate()
                .filter(|(_, g)| g.is_not() && g.target() == line)
                .map(|(i, _)| i)
                .collect();
            for pair in positions.windows(2) {
                let candidate = merge_not_pair(&cur, pair[0], pair[1]);
                let cost = cost_of(&candidate);
                if cost <= cur_cost {
                    cur = candidate;
                    cur_cost = cost;
                    continue 'pairs;
                }
            }
        }
        break;
    }

    let mut i = 0;
    while i < cur.len() {
        if cur.gates()[i].is_not() {
            let (slid, landed) = slide_not(&cur, i, direction);
            let cost = cost_of(&slid);
            if cost < cur_cost {
                cur = slid;
                cur_cost = cost;
                // the NOT now sits further along; resume after it
                if direction == Direction::Right {
                    i = landed;
                }
            }
        }
        i += 1;
    }

    debug_assert!(cur_cost <= cost_of(c));
    cur
}

/// Slides the NOT at `i` step by step in `direction`, returning the cheapest
/// circuit seen and the NOT's index in it. Stops at another NOT on the same
/// line (pairs are handled separately).
fn slide_not(c: &Circuit, i: usize, direction: Direction) -> (Circuit, usize) {
    let line = c.gates()[i].target();
    let mut best = (c.clone(), i);
    let mut best_cost = cost_of(c);
    let mut cur = c.clone();
    let mut pos = i;
    loop {
        let next = match direction {
            Direction::Right if pos + 1 < cur.len() => pos + 1,
            Direction::Left if pos > 0 => pos - 1,
            _ => break,
        };
        let neighbour = &cur.gates()[next];
        if neighbour.is_not() && neighbour.target() == line {
            break;
        }
        cur = pass_not(&cur, pos, direction).expect("NOT at pos").apply(&cur);
        pos = next;
        let cost = cost_of(&cur);
        if cost < best_cost {
            best_cost = cost;
            best = (cur.clone(), pos);
        }
    }
    best
}

/// Deletes identical gate pairs that can be made adjacent by moving-rule
/// swaps, looking at most `lookahead` positions ahead.
pub fn move_assisted_delete(c: &Circuit, lookahead: usize) -> Circuit {
    let mut cur = c.clone();
    'restart: loop {
        let gates = cur.gates();
        for i in 0..gates.len() {
            let end = gates.len().min(i + 1 + lookahead.max(1));
            for j in i + 1..end {
                if !same_function(&gates[i], &gates[j]) {
                    continue;
                }
                let between = &gates[i + 1..j];
                if between.iter().all(|g| commutes(&gates[i], g)) {
                    let mut moved = cur.clone();
                    for pos in i..j - 1 {
                        let step = try_move(&moved, pos)
                            .expect("in range")
                            .expect("checked commuting");
                        moved = step.apply(&moved);
                    }
                    cur = try_delete(&moved, j - 1).expect("in range").expect("identical").apply(&moved);
                    continue 'restart;
                }
                if between.iter().all(|g| commutes(g, &gates[j])) {
                    let mut moved = cur.clone();
                    for pos in (i + 1..j).rev() {
                        let step = try_move(&moved, pos)
                            .expect("in range")
                            .expect("checked commuting");
                        moved = step.apply(&moved);
                    }
                    cur = try_delete(&moved, i).expect("in range").expect("identical").apply(&moved);
                    continue 'restart;
                }
            }
        }
        return cur;
    }
}

/// Parameters of a generalized-pass-rule instance, up to renaming lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct GprShape {
    /// Shared controls carry identical polarities in both gates.
    shared_agree: bool,
    /// Polarity of the larger gate's control on the smaller gate's target.
    hinge: Polarity,
    /// The larger gate comes first.
    big_first: bool,
}

/// Checks a rewrite shape by exhaustive simulation on the smallest circuits
/// that exhibit it. A shape is enabled only if every instance passes.
fn gpr_shape_valid(shape: GprShape) -> bool {
    // lines: 0 = shared control (n = 3 only), width-2 = hinge / small target, width-1 = big target
    let mut instances = Vec::new();
    for big_pol in [Polarity::Positive, Polarity::Negative] {
        let small_pol = if shape.shared_agree { big_pol } else { big_pol.toggled() };
        let big = Gate::new([Control::new(0, big_pol), Control::new(1, shape.hinge)], 2).unwrap();
        let small = Gate::new([Control::new(0, small_pol)], 1).unwrap();
        instances.push((3, big, small));
    }
    if shape.shared_agree {
        let big = Gate::new([Control::new(0, shape.hinge)], 1).unwrap();
        instances.push((2, big, Gate::not(0)));
    }
    instances.into_iter().all(|(width, big, small)| {
        let hinge_line = small.target();
        let swapped_big = big.with_toggled_control(hinge_line);
        let (before, after) = if shape.big_first {
            (vec![big, small.clone()], vec![small, swapped_big])
        } else {
            (vec![small.clone(), big], vec![swapped_big, small])
        };
        let before = Circuit::with_width(width).unwrap().with_gates(before);
        let after = Circuit::with_width(width).unwrap().with_gates(after);
        simulate(&before).unwrap() == simulate(&after).unwrap()
    })
}

fn gpr_shape_enabled(shape: GprShape) -> bool {
    static TABLE: OnceLock<Vec<(GprShape, bool)>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut table = Vec::new();
        for shared_agree in [true, false] {
            for hinge in [Polarity::Positive, Polarity::Negative] {
                for big_first in [true, false] {
                    let shape = GprShape {
                        shared_agree,
                        hinge,
                        big_first,
                    };
                    table.push((shape, gpr_shape_valid(shape)));
                }
            }
        }
        table
    });
    table.iter().any(|&(s, ok)| s == shape && ok)
}

/// Classifies `(big, small)` as a generalized-pass-rule pair: the larger
/// gate's control lines are exactly the smaller gate's controls plus the
/// smaller gate's target.
fn gpr_shape(big: &Gate, small: &Gate, big_first: bool) -> Option<GprShape> {
    if big.num_controls() != small.num_controls() + 1 {
        return None;
    }
    let hinge = big.control_on(small.target())?;
    let mut shared_agree = true;
    for c in small.controls() {
        let other = big.control_on(c.line)?;
        shared_agree &= other.polarity == c.polarity;
    }
    Some(GprShape {
        shared_agree,
        hinge: hinge.polarity,
        big_first,
    })
}

/// Generalized pass rule on gates `i` and `i + 1`.
///
/// Swaps a gate with controls `C2 ∪ {t2}` past an adjacent gate with controls
/// `C2` and target `t2`, toggling the larger gate's control on `t2`. Only
/// polarity shapes that pass the simulation check are enabled; in practice
/// that requires the shared controls to agree in polarity.
pub fn apply_gpr(c: &Circuit, i: usize) -> Result<Option<RewriteResult>, RuleError> {
    check_pair(c, i)?;
    let (g, h) = (&c.gates()[i], &c.gates()[i + 1]);
    let candidates = [(g, h, true), (h, g, false)];
    for (big, small, big_first) in candidates {
        let Some(shape) = gpr_shape(big, small, big_first) else {
            continue;
        };
        if !gpr_shape_enabled(shape) {
            continue;
        }
        let toggled = big.with_toggled_control(small.target());
        let new_gates = if big_first {
            vec![small.clone(), toggled]
        } else {
            vec![toggled, small.clone()]
        };
        return Ok(Some(RewriteResult {
            window: i..i + 2,
            new_gates,
            rule: RuleKind::GeneralizedPassRule,
        }));
    }
    Ok(None)
}

fn single_control(g: &Gate) -> Option<Control> {
    match g.controls() {
        [c] => Some(*c),
        _ => None,
    }
}

/// Restricted common-target rule at `i`.
///
/// Tried in order:
/// 1. `CNOT(x+;t)` next to `CNOT(x−;t)` becomes `NOT(t)`;
/// 2. `CNOT(x−;t)` next to `NOT(t)` becomes `CNOT(x+;t)`;
/// 3. a lone `CNOT(x−;t)` becomes `CNOT(x+;t), NOT(t)`.
pub fn apply_rctr(c: &Circuit, i: usize) -> Result<Option<RewriteResult>, RuleError> {
    let len = c.len();
    if i >= len {
        return Err(RuleError::IndexOutOfRange { index: i, len });
    }
    let g = &c.gates()[i];
    if let Some(h) = c.gates().get(i + 1) {
        if g.target() == h.target() {
            let t = g.target();
            match (single_control(g), single_control(h)) {
                (Some(x), Some(y)) if x.line == y.line && x.polarity != y.polarity => {
                    return Ok(Some(RewriteResult {
                        window: i..i + 2,
                        new_gates: vec![Gate::not(t)],
                        rule: RuleKind::RestrictedCtr,
                    }));
                }
                (Some(x), None) | (None, Some(x)) if !x.polarity.is_positive() && (g.is_not() || h.is_not()) => {
                    return Ok(Some(RewriteResult {
                        window: i..i + 2,
                        new_gates: vec![Gate::cnot(x.toggled(), t).expect("valid CNOT")],
                        rule: RuleKind::RestrictedCtr,
                    }));
                }
                _ => {}
            }
        }
    }
    match single_control(g) {
        Some(x) if !x.polarity.is_positive() => Ok(Some(RewriteResult {
            window: i..i + 1,
            new_gates: vec![Gate::cnot(x.toggled(), g.target()).expect("valid CNOT"), Gate::not(g.target())],
            rule: RuleKind::RestrictedCtr,
        })),
        _ => Ok(None),
    }
}

/// Applies restricted-CTR rewrites left to right wherever they lower cost.
pub fn rctr_sweep(c: &Circuit) -> Circuit {
    let width = c.width();
    let mut cur = c.clone();
    let mut i = 0;
    while i < cur.len() {
        if let Some(rw) = apply_rctr(&cur, i).expect("index in range") {
            let old: u64 = cur.gates()[rw.window.clone()]
                .iter()
                .map(|g| gate_cost(g, width).expect("valid gate"))
                .sum();
            let new: u64 = rw
                .new_gates
                .iter()
                .map(|g| gate_cost(g, width).expect("valid gate"))
                .sum();
            if new < old {
                cur = rw.apply(&cur);
                // a fresh NOT may pair with the previous gate
                i = i.saturating_sub(1);
                continue;
            }
        }
        i += 1;
    }
    cur
}
