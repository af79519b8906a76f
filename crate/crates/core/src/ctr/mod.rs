//! Common-target rule: resynthesis of same-target gate runs.
//!
//! Gates sharing a target commute with each other, and together they flip
//! the target on the XOR of their control cubes. A run of such gates is
//! therefore described by a Kmap over the remaining lines, and any exclusive
//! cover of that map is an equivalent gate run. [`ctr_optimize`] gathers the
//! runs, finds a cheaper cover where one exists and swaps it in.

pub mod cover;
pub mod kmap;

use std::ops::Range;

use thiserror::Error;

pub use cover::{all_cubes, minimize_cover, minimize_cover_with, CoverOptions, EXACT_LIMIT};
pub use kmap::{Cover, Cube, Kmap, MAX_KMAP_VARS};

use crate::circuit::{Circuit, Gate};
use crate::cost::gates_cost;
use crate::rules::try_move;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CtrError {
    #[error("Kmap with {0} variables is not supported")]
    TooManyVars(usize),
    #[error("Kmap over {vars} variables needs {} cells, got {got}", 1usize << vars)]
    CellCount { got: usize, vars: usize },
    #[error("control line {0} is not a Kmap variable")]
    ControlOutsideVars(usize),
}

/// A contiguous run of gates sharing `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Window {
    pub width: usize,
    pub target: usize,
    /// All lines except the target, in index order.
    pub var_order: Vec<usize>,
    /// Position of the run in the rearranged circuit.
    pub gate_indices: Range<usize>,
    pub gates: Vec<Gate>,
}

impl Window {
    /// Control lines actually used by the window's gates, in index order.
    pub fn support_lines(&self) -> Vec<usize> {
        let mut lines: Vec<usize> = self
            .gates
            .iter()
            .flat_map(|g| g.controls().iter().map(|c| c.line))
            .collect();
        lines.sort_unstable();
        lines.dedup();
        lines
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtrOptions {
    pub cover: CoverOptions,
    /// How far past a window's end to look for gates to pull in.
    pub lookahead: usize,
}

impl Default for CtrOptions {
    fn default() -> Self {
        Self {
            cover: CoverOptions::default(),
            lookahead: 16,
        }
    }
}

/// Moves the gate at `from` to `to` (either direction) with moving-rule
/// swaps. Returns `None` if some swap is not allowed.
fn move_gate(c: &Circuit, from: usize, to: usize) -> Option<Circuit> {
    let mut cur = c.clone();
    if from > to {
        for pos in (to..from).rev() {
            cur = try_move(&cur, pos).ok()??.apply(&cur);
        }
    } else {
        for pos in from..to {
            cur = try_move(&cur, pos).ok()??.apply(&cur);
        }
    }
    Some(cur)
}

/// Partitions the circuit into maximal same-target runs.
///
/// Each run starts at the first gate not yet assigned. Later gates with the
/// same target are pulled back to the end of the run, and unrelated gates in
/// the way are hoisted in front of it, whenever the moving rule allows every
/// swap involved. Returns the rearranged circuit (equivalent to the input)
/// and its windows, which cover every gate in order.
pub fn extract_windows(c: &Circuit, lookahead: usize) -> (Circuit, Vec<Window>) {
    let width = c.width();
    let mut cur = c.clone();
    let mut windows = Vec::new();
    let mut start = 0;
    while start < cur.len() {
        let target = cur.gates()[start].target();
        let mut end = start + 1;
        let mut q = end;
        while q < cur.len() && q <= end + lookahead {
            let g = &cur.gates()[q];
            if g.target() == target {
                if let Some(moved) = move_gate(&cur, q, end) {
                    cur = moved;
                    end += 1;
                }
                q += 1;
                continue;
            }
            if lookahead == 0 {
                break;
            }
            if let Some(moved) = move_gate(&cur, q, start) {
                cur = moved;
                start += 1;
                end += 1;
                q += 1;
                continue;
            }
            if g.has_control_line(target) {
                break;
            }
            q += 1;
        }
        windows.push(Window {
            width,
            target,
            var_order: (0..width).filter(|&l| l != target).collect(),
            gate_indices: start..end,
            gates: cur.gates()[start..end].to_vec(),
        });
        start = end;
    }
    // hoisted gates became single-gate windows of their own; index them too
    let windows = fill_gaps(&cur, windows);
    (cur, windows)
}

fn single_window(c: &Circuit, i: usize) -> Window {
    let g = &c.gates()[i];
    Window {
        width: c.width(),
        target: g.target(),
        var_order: (0..c.width()).filter(|&l| l != g.target()).collect(),
        gate_indices: i..i + 1,
        gates: vec![g.clone()],
    }
}

fn fill_gaps(c: &Circuit, windows: Vec<Window>) -> Vec<Window> {
    let mut out = Vec::with_capacity(windows.len());
    let mut pos = 0;
    for w in windows {
        while pos < w.gate_indices.start {
            out.push(single_window(c, pos));
            pos += 1;
        }
        pos = w.gate_indices.end;
        out.push(w);
    }
    while pos < c.len() {
        out.push(single_window(c, pos));
        pos += 1;
    }
    out
}

/// Kmap of a window over all non-target lines.
pub fn build_kmap(w: &Window) -> Result<Kmap, CtrError> {
    Kmap::from_gates(w.width, w.var_order.clone(), &w.gates)
}

/// Kmap of a window over only the lines its gates use as controls.
pub fn build_support_kmap(w: &Window) -> Result<Kmap, CtrError> {
    Kmap::from_gates(w.width, w.support_lines(), &w.gates)
}

/// One gate per cube (controls = the cube's fixed literals), then a NOT on
/// the target if the cover is inverted.
pub fn cover_to_gates(cover: &Cover, vars: &[usize], target: usize) -> Vec<Gate> {
    let mut gates: Vec<Gate> = cover
        .cubes
        .iter()
        .map(|c| c.to_gate(vars.len(), vars, target))
        .collect();
    if cover.inverted {
        gates.push(Gate::not(target));
    }
    gates
}

/// Cheapest realization of a window's function, or `None` if it does not
/// beat the window's own cost.
pub fn optimize_window(w: &Window, opts: &CoverOptions) -> Option<Vec<Gate>> {
    let kmap = build_support_kmap(w).ok()?;
    let seeds: Vec<Cube> = w
        .gates
        .iter()
        .map(|g| {
            let lits: Vec<_> = g
                .controls()
                .iter()
                .map(|c| {
                    let j = kmap.vars().iter().position(|&l| l == c.line).expect("support line");
                    (j, c.polarity)
                })
                .collect();
            Cube::from_literals(kmap.num_vars(), &lits)
        })
        .collect();
    let cover = minimize_cover_with(&kmap, &seeds, opts);
    let gates = cover_to_gates(&cover, kmap.vars(), w.target);
    let old = gates_cost(&w.gates, w.width).expect("window gates are valid");
    let new = gates_cost(&gates, w.width).expect("cover gates are valid");
    (new < old).then_some(gates)
}

/// Replaces every common-target window whose cost strictly drops.
pub fn ctr_optimize(c: &Circuit, opts: &CtrOptions) -> Circuit {
    let (arranged, windows) = extract_windows(c, opts.lookahead);
    let mut gates = Vec::with_capacity(arranged.len());
    let mut changed = false;
    for w in &windows {
        match optimize_window(w, &opts.cover) {
            Some(better) => {
                gates.extend(better);
                changed = true;
            }
            None => gates.extend(w.gates.iter().cloned()),
        }
    }
    if changed {
        arranged.with_gates(gates)
    } else {
        c.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{equivalent, Control};
    use crate::cost::circuit_cost;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;

    fn circ(width: usize, gates: Vec<Gate>) -> Circuit {
        Circuit::with_width(width).unwrap().with_gates(gates)
    }

    fn g(controls: &[Control], t: usize) -> Gate {
        Gate::new(controls.iter().copied(), t).unwrap()
    }

    #[test]
    fn windows_gather_common_targets() {
        let c = circ(3, vec![g(&[Control::pos(A)], C), g(&[Control::pos(B)], C)]);
        let (_, ws) = extract_windows(&c, 16);
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].target, C);
        assert_eq!(ws[0].gates.len(), 2);
    }

    #[test]
    fn windows_respect_blocking_gates() {
        let c = circ(3, vec![g(&[Control::pos(C)], B), g(&[Control::pos(A)], C), g(&[Control::pos(B)], C)]);
        let (arranged, ws) = extract_windows(&c, 16);
        assert_eq!(ws.iter().map(|w| w.gates.len()).collect::<Vec<_>>(), vec![1, 2]);
        assert!(equivalent(&c, &arranged).unwrap());

        let c = circ(3, vec![g(&[Control::pos(A), Control::pos(B)], C), g(&[Control::pos(C)], B)]);
        let (_, ws) = extract_windows(&c, 16);
        assert_eq!(ws.iter().map(|w| w.target).collect::<Vec<_>>(), vec![C, B]);
    }

    #[test]
    fn windows_hoist_commuting_gates() {
        // NOT(b) cannot be passed by CNOT(b-; c), but it can be moved in front
        let c = circ(3, vec![g(&[Control::pos(A)], C), Gate::not(B), g(&[Control::neg(B)], C)]);
        let (arranged, ws) = extract_windows(&c, 16);
        assert!(equivalent(&c, &arranged).unwrap());
        assert_eq!(arranged.gates()[0], Gate::not(B));
        let targets: Vec<_> = ws.iter().map(|w| (w.target, w.gates.len())).collect();
        assert_eq!(targets, vec![(B, 1), (C, 2)]);
        let covered: usize = ws.iter().map(|w| w.gate_indices.len()).sum();
        assert_eq!(covered, arranged.len());
    }

    #[test]
    fn kmap_examples() {
        let w = Window {
            width: 3,
            target: C,
            var_order: vec![A, B],
            gate_indices: 0..2,
            gates: vec![
                g(&[Control::pos(A), Control::neg(B)], C),
                g(&[Control::neg(A), Control::pos(B)], C),
            ],
        };
        assert_eq!(build_kmap(&w).unwrap().cells(), &[false, true, true, false]);

        let w = Window {
            gates: vec![Gate::not(C)],
            ..w.clone()
        };
        assert_eq!(build_kmap(&w).unwrap().cells(), &[true; 4]);

        let w = Window {
            gates: vec![g(&[Control::pos(A)], C), g(&[Control::pos(A)], C)],
            ..w
        };
        assert!(build_kmap(&w).unwrap().is_zero());
    }

    #[test]
    fn cover_gate_emission() {
        let a = Cube::from_literals(2, &[(0, crate::circuit::Polarity::Positive)]);
        let b = Cube::from_literals(2, &[(1, crate::circuit::Polarity::Positive)]);
        let cover = Cover {
            cubes: vec![a, b],
            inverted: false,
        };
        assert_eq!(
            cover_to_gates(&cover, &[A, B], C),
            vec![g(&[Control::pos(A)], C), g(&[Control::pos(B)], C)]
        );
        let full = Cover {
            cubes: vec![Cube::FULL],
            inverted: false,
        };
        assert_eq!(cover_to_gates(&full, &[A, B], C), vec![Gate::not(C)]);

        let abc = Cube::from_literals(3, &[
            (0, crate::circuit::Polarity::Positive),
            (1, crate::circuit::Polarity::Positive),
            (2, crate::circuit::Polarity::Positive),
        ]);
        let inv = Cover {
            cubes: vec![abc],
            inverted: true,
        };
        assert_eq!(
            cover_to_gates(&inv, &[A, B, C], D),
            vec![g(&[Control::pos(A), Control::pos(B), Control::pos(C)], D), Gate::not(D)]
        );
    }

    #[test]
    fn example_one_collapses_to_two_cnots() {
        let c = circ(3, vec![
            g(&[Control::pos(A), Control::neg(B)], C),
            g(&[Control::neg(A), Control::pos(B)], C),
        ]);
        let out = ctr_optimize(&c, &CtrOptions::default());
        assert_eq!(circuit_cost(&c).unwrap(), 10);
        assert_eq!(circuit_cost(&out).unwrap(), 2);
        let mut gates = out.gates().to_vec();
        gates.sort();
        assert_eq!(gates, vec![g(&[Control::pos(A)], C), g(&[Control::pos(B)], C)]);
        assert!(equivalent(&c, &out).unwrap());
    }

    #[test]
    fn repeated_term_cancels() {
        let abc = g(&[Control::pos(A), Control::pos(B), Control::pos(C)], D);
        let c = circ(4, vec![abc.clone(), g(&[Control::pos(A), Control::pos(B)], D), abc]);
        let out = ctr_optimize(&c, &CtrOptions::default());
        assert_eq!(out.gates(), &[g(&[Control::pos(A), Control::pos(B)], D)]);
        assert_eq!((circuit_cost(&c).unwrap(), circuit_cost(&out).unwrap()), (31, 5));
    }

    #[test]
    fn minimal_window_is_unchanged() {
        let c = circ(3, vec![g(&[Control::pos(A)], C), g(&[Control::pos(B)], C)]);
        assert_eq!(ctr_optimize(&c, &CtrOptions::default()), c);
    }

    #[test]
    fn inverted_map_example() {
        // seven of eight cells set: realized as C3NOT followed by NOT
        let mut gates = Vec::new();
        for x in 0..7usize {
            let lits: Vec<Control> = (0..3)
                .map(|j| if x & (4 >> j) != 0 { Control::pos(j) } else { Control::neg(j) })
                .collect();
            gates.push(Gate::new(lits, D).unwrap());
        }
        let c = circ(4, gates);
        let out = ctr_optimize(&c, &CtrOptions::default());
        assert_eq!(
            out.gates(),
            &[g(&[Control::pos(A), Control::pos(B), Control::pos(C)], D), Gate::not(D)]
        );
        assert!(equivalent(&c, &out).unwrap());
    }
}
