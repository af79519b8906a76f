//! Quantum cost of multiple-control Toffoli gates.
//!
//! The cost of a gate is the number of elementary gates (NOT, CNOT,
//! controlled-V, controlled-V⁺) needed to realize it without auxiliary
//! lines. It depends on the number of controls `m`, whether any control is
//! positive, and the circuit width `n`. Rows are tried top to bottom:
//!
//! | controls                    | ≥ 1 positive   | all negative |
//! |-----------------------------|----------------|--------------|
//! | `m = 0`                     | 1              | –            |
//! | `m = 1`                     | 1              | 3            |
//! | `m = 2`                     | 5              | 6            |
//! | `m = n − 1`                 | `2^n − 3`      | `2^n − 1`    |
//! | `3 ≤ m ≤ ⌈n/2⌉`             | `12m − 22`     | `12m − 20`   |
//! | `⌈n/2⌉ < m ≤ n − 2`         | `24m − 40`     | `24m − 36`   |
//!
//! At `m = n − 2` the last row equals the published `24n − 88`; the same
//! expression is used for the whole band above `⌈n/2⌉`.

use thiserror::Error;

use crate::circuit::{Circuit, Gate, MAX_WIDTH};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("gate with {controls} controls does not fit a circuit of width {width}")]
    TooManyControls { controls: usize, width: usize },
    #[error("gate target {0} is one of its controls")]
    TargetIsControl(usize),
    #[error("width {0} is outside the supported range")]
    BadWidth(usize),
}

/// Published per-band constants.
pub struct CostModelParams;

impl CostModelParams {
    pub const NOT: u64 = 1;
    pub const CNOT: u64 = 1;
    pub const CNOT_NEGATIVE: u64 = 3;
    pub const TOFFOLI: u64 = 5;
    pub const TOFFOLI_ALL_NEGATIVE: u64 = 6;
    /// Extra cost for an all-negative `C^{n−1}NOT`.
    pub const FULL_NEGATIVE_SURCHARGE: u64 = 2;
    /// Extra cost for an all-negative gate in the `12m − 22` band.
    pub const LINEAR_NEGATIVE_SURCHARGE: u64 = 2;
    /// Extra cost for an all-negative gate in the `24m − 40` band.
    pub const LARGE_NEGATIVE_SURCHARGE: u64 = 4;
}

/// Cost of a gate with `controls` controls in a circuit of `width` lines.
/// `has_positive` is ignored for `controls == 0`.
pub fn control_cost(controls: usize, has_positive: bool, width: usize) -> Result<u64, CostError> {
    if width == 0 || width > MAX_WIDTH {
        return Err(CostError::BadWidth(width));
    }
    if controls >= width {
        return Err(CostError::TooManyControls { controls, width });
    }
    let m = controls as u64;
    let n = width as u64;
    let cost = match controls {
        0 => CostModelParams::NOT,
        1 if has_positive => CostModelParams::CNOT,
        1 => CostModelParams::CNOT_NEGATIVE,
        2 if has_positive => CostModelParams::TOFFOLI,
        2 => CostModelParams::TOFFOLI_ALL_NEGATIVE,
        _ if controls == width - 1 => {
            let base = (1u64 << n) - 3;
            if has_positive {
                base
            } else {
                base + CostModelParams::FULL_NEGATIVE_SURCHARGE
            }
        }
        _ if m <= n.div_ceil(2) => {
            let base = 12 * m - 22;
            if has_positive {
                base
            } else {
                base + CostModelParams::LINEAR_NEGATIVE_SURCHARGE
            }
        }
        _ => {
            let base = 24 * m - 40;
            if has_positive {
                base
            } else {
                base + CostModelParams::LARGE_NEGATIVE_SURCHARGE
            }
        }
    };
    Ok(cost)
}

pub fn gate_cost(gate: &Gate, width: usize) -> Result<u64, CostError> {
    if gate.has_control_line(gate.target()) {
        return Err(CostError::TargetIsControl(gate.target()));
    }
    control_cost(gate.num_controls(), gate.has_positive_control(), width)
}

/// Sum of gate costs over a gate list in a circuit of `width` lines.
pub fn gates_cost(gates: &[Gate], width: usize) -> Result<u64, CostError> {
    gates.iter().map(|g| gate_cost(g, width)).sum()
}

pub fn circuit_cost(circuit: &Circuit) -> Result<u64, CostError> {
    gates_cost(circuit.gates(), circuit.width())
}
