//! Optimization driver: runs the rule passes to a cost-guarded fixpoint.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{equivalent, Circuit, CircuitError, MAX_SIM_WIDTH};
use crate::cost::{circuit_cost, CostError};
use crate::ctr::{ctr_optimize, CoverOptions, CtrOptions, EXACT_LIMIT};
use crate::rules::{apply_gpr, cancel_not_pairs, move_assisted_delete, rctr_sweep, Direction};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OptimizeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("optimized circuit is not equivalent to its input (first difference at state {0})")]
    EquivalenceViolation(u64),
    #[error("improvement is undefined for a zero-cost baseline")]
    ZeroBaseline,
}

/// Rule families that can be switched on and off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Pr,
    Gpr,
    Rctr,
    Ctr,
    Delete,
    Move,
}

impl Rule {
    pub const ALL: [Rule; 6] = [Rule::Pr, Rule::Gpr, Rule::Rctr, Rule::Ctr, Rule::Delete, Rule::Move];
}

impl FromStr for Rule {
    type Err = OptimizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pr" => Ok(Rule::Pr),
            "gpr" => Ok(Rule::Gpr),
            "rctr" => Ok(Rule::Rctr),
            "ctr" => Ok(Rule::Ctr),
            "delete" => Ok(Rule::Delete),
            "move" => Ok(Rule::Move),
            other => Err(OptimizeError::Config(format!("unknown rule {other:?}"))),
        }
    }
}

/// Parses a comma-separated rule list; `all` enables every rule.
pub fn parse_rules(list: &str) -> Result<BTreeSet<Rule>, OptimizeError> {
    let mut rules = BTreeSet::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.eq_ignore_ascii_case("all") {
            rules.extend(Rule::ALL);
        } else {
            rules.insert(item.parse()?);
        }
    }
    if rules.is_empty() {
        return Err(OptimizeError::Config("empty rule list".into()));
    }
    Ok(rules)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimizeConfig {
    pub rules: BTreeSet<Rule>,
    pub max_iterations: usize,
    /// Kmaps with at most this many support variables are covered exactly.
    pub exact_cover_threshold: usize,
    pub move_lookahead: usize,
    /// Seeds the randomized restarts of the heuristic cover search.
    pub seed: u64,
    /// Direction in which leftover NOT gates are pushed first.
    pub not_direction: Direction,
    /// Check the result against the input by simulation (widths up to 16).
    pub verify: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            rules: Rule::ALL.into_iter().collect(),
            max_iterations: 32,
            exact_cover_threshold: EXACT_LIMIT,
            move_lookahead: 16,
            seed: 0,
            not_direction: Direction::Right,
            verify: true,
        }
    }
}

impl OptimizeConfig {
    pub fn with_rules(rules: impl IntoIterator<Item = Rule>) -> Self {
        Self {
            rules: rules.into_iter().collect(),
            ..Self::default()
        }
    }

    fn enabled(&self, rule: Rule) -> bool {
        self.rules.contains(&rule)
    }

    fn lookahead(&self) -> usize {
        if self.enabled(Rule::Move) {
            self.move_lookahead
        } else {
            0
        }
    }

    fn ctr_options(&self) -> CtrOptions {
        CtrOptions {
            cover: CoverOptions {
                exact_threshold: self.exact_cover_threshold,
                seed: self.seed,
                ..CoverOptions::default()
            },
            lookahead: self.lookahead(),
        }
    }
}

/// One step of the per-iteration pass sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pass {
    NotCancel,
    Gpr,
    Ctr,
    Rctr,
    Delete,
}

impl Pass {
    pub const ORDER: [Pass; 5] = [Pass::NotCancel, Pass::Gpr, Pass::Ctr, Pass::Rctr, Pass::Delete];

    fn rule(self) -> Rule {
        match self {
            Pass::NotCancel => Rule::Pr,
            Pass::Gpr => Rule::Gpr,
            Pass::Ctr => Rule::Ctr,
            Pass::Rctr => Rule::Rctr,
            Pass::Delete => Rule::Delete,
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pass::NotCancel => "not-cancel",
            Pass::Gpr => "gpr",
            Pass::Ctr => "ctr",
            Pass::Rctr => "rctr",
            Pass::Delete => "delete",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassReport {
    pub iteration: usize,
    pub pass: Pass,
    pub cost_before: u64,
    pub cost_after: u64,
    pub gates_before: usize,
    pub gates_after: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimizeReport {
    pub cost_before: u64,
    pub cost_after: u64,
    pub gates_before: usize,
    pub gates_after: usize,
    pub iterations_run: usize,
    pub passes: Vec<PassReport>,
    pub equivalence_checked: bool,
}

impl OptimizeReport {
    /// Improvement in percent, or `None` for a zero-cost input.
    pub fn improvement_percent(&self) -> Option<f64> {
        improvement_percent(self.cost_before, self.cost_after).ok()
    }
}

/// `100 · (before − after) / before`.
pub fn improvement_percent(before: u64, after: u64) -> Result<f64, OptimizeError> {
    if before == 0 {
        return Err(OptimizeError::ZeroBaseline);
    }
    Ok(100.0 * (before as f64 - after as f64) / before as f64)
}

/// [`improvement_percent`] rounded to the nearest integer (halves away from zero).
pub fn improvement_percent_rounded(before: u64, after: u64) -> Result<i64, OptimizeError> {
    improvement_percent(before, after).map(|p| p.round() as i64)
}

type Key = (u64, usize);

fn key(c: &Circuit) -> Result<Key, OptimizeError> {
    Ok((circuit_cost(c)?, c.len()))
}

fn not_cancel_pass(c: &Circuit, cfg: &OptimizeConfig) -> Result<Circuit, OptimizeError> {
    let first = cancel_not_pairs(c, cfg.not_direction);
    let second = cancel_not_pairs(c, cfg.not_direction.reverse());
    Ok(if key(&second)? < key(&first)? { second } else { first })
}

/// Applies a generalized-pass-rule swap wherever the swap, followed by the
/// enabled common-target and deletion passes, lowers the cost.
fn gpr_pass(c: &Circuit, cfg: &OptimizeConfig) -> Result<Circuit, OptimizeError> {
    let mut cur = c.clone();
    let mut cur_key = key(&cur)?;
    'restart: loop {
        for i in 0..cur.len().saturating_sub(1) {
            let Some(rw) = apply_gpr(&cur, i).expect("pair in range") else {
                continue;
            };
            let mut trial = rw.apply(&cur);
            if cfg.enabled(Rule::Ctr) {
                trial = ctr_optimize(&trial, &cfg.ctr_options());
            }
            if cfg.enabled(Rule::Delete) {
                trial = move_assisted_delete(&trial, cfg.lookahead());
            }
            let trial_key = key(&trial)?;
            if trial_key < cur_key {
                cur = trial;
                cur_key = trial_key;
                continue 'restart;
            }
        }
        return Ok(cur);
    }
}

fn run_pass(pass: Pass, c: &Circuit, cfg: &OptimizeConfig) -> Result<Circuit, OptimizeError> {
    match pass {
        Pass::NotCancel => not_cancel_pass(c, cfg),
        Pass::Gpr => gpr_pass(c, cfg),
        Pass::Ctr => Ok(ctr_optimize(c, &cfg.ctr_options())),
        Pass::Rctr => Ok(rctr_sweep(c)),
        Pass::Delete => Ok(move_assisted_delete(c, cfg.lookahead())),
    }
}

/// Repeats the pass sequence until an iteration changes nothing or
/// `max_iterations` is reached.
///
/// A pass result is kept only if it lowers the cost, or keeps the cost and
/// removes gates. When `verify` is set and the width allows simulation, the
/// output is checked against the input.
pub fn optimize(c: &Circuit, cfg: &OptimizeConfig) -> Result<(Circuit, OptimizeReport), OptimizeError> {
    if cfg.max_iterations == 0 {
        return Err(OptimizeError::Config("max_iterations must be at least 1".into()));
    }
    let (cost_before, gates_before) = key(c)?;
    let mut cur = c.clone();
    let mut cur_key = (cost_before, gates_before);
    let mut passes = Vec::new();
    let mut iterations_run = 0;

    for iteration in 1..=cfg.max_iterations {
        iterations_run = iteration;
        let start_key = cur_key;
        for pass in Pass::ORDER {
            if !cfg.enabled(pass.rule()) {
                continue;
            }
            let candidate = run_pass(pass, &cur, cfg)?;
            let cand_key = key(&candidate)?;
            let accepted = cand_key < cur_key;
            passes.push(PassReport {
                iteration,
                pass,
                cost_before: cur_key.0,
                cost_after: cand_key.0,
                gates_before: cur_key.1,
                gates_after: cand_key.1,
                accepted,
            });
            if accepted {
                cur = candidate;
                cur_key = cand_key;
            }
        }
        if cur_key == start_key {
            break;
        }
    }

    let mut equivalence_checked = false;
    if cfg.verify && c.width() <= MAX_SIM_WIDTH {
        if !equivalent(c, &cur)? {
            let a = crate::circuit::simulate(c)?;
            let b = crate::circuit::simulate(&cur)?;
            return Err(OptimizeError::EquivalenceViolation(a.first_difference(&b).unwrap_or(0)));
        }
        equivalence_checked = true;
    }

    let report = OptimizeReport {
        cost_before,
        cost_after: cur_key.0,
        gates_before,
        gates_after: cur_key.1,
        iterations_run,
        passes,
        equivalence_checked,
    };
    Ok((cur, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Control, Gate};

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;

    fn circ(width: usize, gates: Vec<Gate>) -> Circuit {
        Circuit::with_width(width).unwrap().with_gates(gates)
    }

    fn tof(c1: Control, c2: Control, t: usize) -> Gate {
        Gate::new([c1, c2], t).unwrap()
    }

    #[test]
    fn not_cancellation_then_ctr() {
        let c = circ(3, vec![
            Gate::not(A),
            tof(Control::pos(A), Control::pos(B), C),
            Gate::not(A),
            tof(Control::pos(A), Control::pos(B), C),
        ]);
        let (out, report) = optimize(&c, &OptimizeConfig::default()).unwrap();
        assert_eq!((report.cost_before, report.cost_after), (12, 1));
        assert_eq!(out.gates(), &[Gate::cnot(Control::pos(B), C).unwrap()]);
        assert!(report.equivalence_checked);
    }

    #[test]
    fn single_not_is_a_fixpoint() {
        let c = circ(1, vec![Gate::not(A)]);
        let (out, report) = optimize(&c, &OptimizeConfig::default()).unwrap();
        assert_eq!(out, c);
        assert_eq!(report.iterations_run, 1);
        assert!(report.passes.iter().all(|p| !p.accepted));
    }

    #[test]
    fn example_one_via_ctr_only() {
        let c = circ(3, vec![
            tof(Control::pos(A), Control::neg(B), C),
            tof(Control::neg(A), Control::pos(B), C),
        ]);
        let (_, report) = optimize(&c, &OptimizeConfig::with_rules([Rule::Ctr])).unwrap();
        assert_eq!((report.cost_before, report.cost_after), (10, 2));
        assert!(report.passes.iter().all(|p| p.pass == Pass::Ctr));
    }

    #[test]
    fn max_iterations_is_respected() {
        let c = circ(3, vec![Gate::not(A), Gate::not(A)]);
        let cfg = OptimizeConfig {
            max_iterations: 1,
            ..OptimizeConfig::default()
        };
        let (_, report) = optimize(&c, &cfg).unwrap();
        assert_eq!(report.iterations_run, 1);
        let bad = OptimizeConfig {
            max_iterations: 0,
            ..OptimizeConfig::default()
        };
        assert!(matches!(optimize(&c, &bad), Err(OptimizeError::Config(_))));
    }

    #[test]
    fn improvement_examples() {
        assert_eq!(improvement_percent_rounded(214, 136).unwrap(), 36);
        assert_eq!(improvement_percent_rounded(7, 7).unwrap(), 0);
        assert_eq!(improvement_percent_rounded(10, 7).unwrap(), 30);
        assert!((improvement_percent(214, 136).unwrap() - 36.448).abs() < 1e-3);
        assert_eq!(improvement_percent(0, 0), Err(OptimizeError::ZeroBaseline));
    }

    #[test]
    fn rule_lists() {
        assert_eq!(parse_rules("all").unwrap().len(), 6);
        assert_eq!(
            parse_rules("pr, ctr").unwrap().into_iter().collect::<Vec<_>>(),
            vec![Rule::Pr, Rule::Ctr]
        );
        assert!(parse_rules("pr,bogus").is_err());
        assert!(parse_rules("").is_err());
    }
}
