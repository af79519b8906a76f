//! Quantum-cost optimization of reversible circuits built from
//! multiple-control Toffoli gates with positive and negative controls.
//!
//! The crate provides:
//!
//! - [`circuit`]: the gate/circuit IR, simulation to permutations and the
//!   moving/deletion predicates;
//! - [`cost`]: the elementary-gate cost model;
//! - [`rules`]: local rewrites (deletion, moving, NOT passing, the
//!   generalized pass rule, restricted common-target identities);
//! - [`ctr`]: Kmap-based exclusive-cover resynthesis of same-target runs;
//! - [`pipeline`]: the cost-guarded optimization driver;
//! - [`io`]: the netlist and permutation text formats.
//!
//! States are integers whose most significant bit is line 0.

pub mod circuit;
pub mod cost;
pub mod ctr;
pub mod io;
pub mod pipeline;
pub mod rules;

pub use circuit::{
    apply_gate, commutes, equivalent, gate_fires, matches_spec, same_function, simulate, Circuit, CircuitError,
    Control, Gate, Permutation, Polarity,
};
pub use cost::{circuit_cost, gate_cost, CostError};
pub use io::{parse_circuit, parse_spec, write_circuit, ParseError, SpecError};
pub use pipeline::{improvement_percent, optimize, OptimizeConfig, OptimizeError, OptimizeReport, Rule};
