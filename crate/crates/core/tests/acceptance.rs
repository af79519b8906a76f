mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;
use revopt::cost::{control_cost, gates_cost};
use revopt::ctr::cover::minimize_cover;
use revopt::ctr::kmap::Kmap;
use revopt::ctr::{cover_to_gates, ctr_optimize, CtrOptions};
use revopt::pipeline::{improvement_percent_rounded, Rule};
use revopt::rules::{apply_gpr, apply_rctr, pass_not, try_delete, try_move, Direction, RewriteResult};
use revopt::{
    circuit_cost, equivalent, optimize, parse_circuit, write_circuit, Circuit, Control, Gate, OptimizeConfig,
};

use common::{all_gates, random_circuit};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn g(controls: &[Control], target: usize) -> Gate {
    Gate::new(controls.iter().copied(), target).unwrap()
}

fn circ(width: usize, gates: Vec<Gate>) -> Circuit {
    Circuit::with_width(width).unwrap().with_gates(gates)
}

fn cost_table() -> Outcome {
    let mut checked = 0;
    let mut check = |m: usize, pos: bool, n: usize, want: u64| -> Result<(), String> {
        let got = control_cost(m, pos, n).map_err(|e| e.to_string())?;
        checked += 1;
        ensure(got == want, || format!("m={m} positive={pos} n={n}: got {got}, want {want}"))
    };
    check(0, false, 1, 1)?;
    check(1, true, 2, 1)?;
    check(1, false, 2, 3)?;
    check(2, true, 3, 5)?;
    check(2, false, 3, 6)?;
    check(2, true, 8, 5)?;
    check(2, false, 8, 6)?;
    for n in 4..=16usize {
        // m = n - 1
        check(n - 1, true, n, (1u64 << n) - 3)?;
        check(n - 1, false, n, (1u64 << n) - 1)?;
        for m in 3..=n.div_ceil(2) {
            if m == n - 1 {
                continue;
            }
            let base = 12 * m as u64 - 22;
            check(m, true, n, base)?;
            check(m, false, n, base + 2)?;
        }
        if n >= 7 {
            let base = 24 * n as u64 - 88;
            check(n - 2, true, n, base)?;
            check(n - 2, false, n, base + 4)?;
        }
    }
    Ok(format!("{checked} table entries"))
}

fn example_one() -> Outcome {
    let (a, b, c) = (0, 1, 2);
    let input = circ(3, vec![
        g(&[Control::pos(a), Control::neg(b)], c),
        g(&[Control::neg(a), Control::pos(b)], c),
    ]);
    let out = ctr_optimize(&input, &CtrOptions::default());
    let before = circuit_cost(&input).unwrap();
    let after = circuit_cost(&out).unwrap();
    ensure(before == 10 && after == 2, || format!("cost {before} -> {after}, want 10 -> 2"))?;
    ensure(equivalent(&input, &out).unwrap(), || "output not equivalent".into())?;
    Ok("cost 10 -> 2, equivalent".into())
}

fn fig_four() -> Outcome {
    let (a, b, c) = (0, 1, 2);
    let input = circ(3, vec![Gate::not(a), g(&[Control::pos(a), Control::pos(b)], c), Gate::not(a)]);
    let cfg = OptimizeConfig::with_rules([Rule::Pr, Rule::Delete]);
    let (out, report) = optimize(&input, &cfg).map_err(|e| e.to_string())?;
    ensure(report.cost_before == 7 && report.cost_after == 5, || {
        format!("cost {} -> {}, want 7 -> 5", report.cost_before, report.cost_after)
    })?;
    ensure(out.gates() == [g(&[Control::neg(a), Control::pos(b)], c)], || format!("unexpected output {:?}", out.gates()))?;
    ensure(equivalent(&input, &out).unwrap(), || "output not equivalent".into())?;
    Ok("cost 7 -> 5, equivalent".into())
}

fn check_rewrite(c: &Circuit, rw: Option<RewriteResult>, applied: &mut usize) -> Result<(), String> {
    if let Some(rw) = rw {
        *applied += 1;
        let out = rw.apply(c);
        ensure(equivalent(c, &out).unwrap(), || format!("{} broke {:?}", rw.rule, c.gates()))?;
    }
    Ok(())
}

fn rule_soundness() -> Outcome {
    let mut applied = 0;
    let mut pairs = 0;
    for width in 1..=4 {
        let gates = all_gates(width);
        for x in &gates {
            let single = circ(width, vec![x.clone()]);
            check_rewrite(&single, apply_rctr(&single, 0).unwrap(), &mut applied)?;
            for y in &gates {
                pairs += 1;
                let c = circ(width, vec![x.clone(), y.clone()]);
                check_rewrite(&c, try_delete(&c, 0).unwrap(), &mut applied)?;
                check_rewrite(&c, try_move(&c, 0).unwrap(), &mut applied)?;
                check_rewrite(&c, apply_gpr(&c, 0).unwrap(), &mut applied)?;
                for i in 0..2 {
                    check_rewrite(&c, apply_rctr(&c, i).unwrap(), &mut applied)?;
                }
                check_rewrite(&c, pass_not(&c, 0, Direction::Right).ok(), &mut applied)?;
                check_rewrite(&c, pass_not(&c, 1, Direction::Left).ok(), &mut applied)?;
            }
        }
    }
    Ok(format!("{pairs} gate pairs on n <= 4, {applied} rewrites preserved the permutation"))
}

/// Minimum cost, per function, over every set of at most `bound` distinct
/// cubes whose XOR is the function. Cells are indexed like [`Kmap`] cells.
fn brute_force_min_costs(v: usize, width: usize, bound: usize) -> Vec<u64> {
    let cells = 1usize << v;
    let mut cubes = Vec::new();
    for care in 0..cells {
        for value in 0..cells {
            if value & !care != 0 {
                continue;
            }
            let mut mask = 0u64;
            for x in 0..cells {
                if x & care == value {
                    mask |= 1 << x;
                }
            }
            let m = care.count_ones() as usize;
            let positive = value != 0;
            cubes.push((mask, control_cost(m, positive, width).unwrap()));
        }
    }
    let mut best = vec![u64::MAX; 1 << cells];
    fn dfs(cubes: &[(u64, u64)], start: usize, left: usize, f: u64, cost: u64, best: &mut [u64]) {
        if cost < best[f as usize] {
            best[f as usize] = cost;
        }
        if left == 0 {
            return;
        }
        for i in start..cubes.len() {
            let (mask, c) = cubes[i];
            dfs(cubes, i + 1, left - 1, f ^ mask, cost + c, best);
        }
    }
    dfs(&cubes, 0, bound, 0, 0, &mut best);
    best
}

fn ctr_exactness() -> Outcome {
    let mut tested = 0;
    for v in [2usize, 3] {
        let width = v + 1;
        let cells = 1usize << v;
        let oracle = brute_force_min_costs(v, width, cells);
        let vars: Vec<usize> = (0..v).collect();
        for f in 0..(1u64 << cells) {
            let table: Vec<bool> = (0..cells).map(|x| f >> x & 1 == 1).collect();
            let kmap = Kmap::new(width, vars.clone(), table).map_err(|e| e.to_string())?;
            let cover = minimize_cover(&kmap);
            let gates = cover_to_gates(&cover, &vars, v);
            let got = gates_cost(&gates, width).unwrap();
            let want = oracle[f as usize];
            ensure(got == want, || format!("v={v} f={f:#x}: emitted cost {got}, oracle {want}"))?;
            let realized = Kmap::from_gates(width, vars.clone(), &gates).map_err(|e| e.to_string())?;
            ensure(realized == kmap, || format!("v={v} f={f:#x}: cover does not realize the map"))?;
            tested += 1;
        }
    }
    Ok(format!("{tested} functions (all of v=2 and v=3) match the oracle"))
}

fn fuzz_end_to_end() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let cfg = OptimizeConfig::default();
    let mut improved = 0;
    for case in 0..1000 {
        let c = random_circuit(&mut rng, 8, 40);
        let (out, report) = optimize(&c, &cfg).map_err(|e| format!("case {case}: {e}"))?;
        ensure(equivalent(&c, &out).unwrap(), || format!("case {case}: not equivalent\n{}", write_circuit(&c)))?;
        let before = circuit_cost(&c).unwrap();
        let after = circuit_cost(&out).unwrap();
        ensure(after <= before && report.cost_after == after, || {
            format!("case {case}: cost {before} -> {after}\n{}", write_circuit(&c))
        })?;
        if after < before {
            improved += 1;
        }
    }
    Ok(format!("1000/1000 equivalent and not costlier ({improved} improved)"))
}

fn table_percentages() -> Outcome {
    // (row, before, after, printed)
    let rows = [(1, 18, 17, 6), (5, 195, 131, 33), (6, 10, 7, 30), (7, 25, 20, 20), (13, 214, 136, 36)];
    for (row, before, after, want) in rows {
        let got = improvement_percent_rounded(before, after).map_err(|e| e.to_string())?;
        ensure(got == want, || format!("row {row}: {before} -> {after} gives {got}, want {want}"))?;
    }
    Ok("rows 1, 5, 6, 7, 13 give 6, 33, 30, 20, 36 (row 1 is 5.56 rounded; printed 5.5)".into())
}

fn round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xc0ffee);
    for case in 0..1000 {
        let c = random_circuit(&mut rng, 12, 40);
        let text = write_circuit(&c);
        let back = parse_circuit(&text).map_err(|e| format!("case {case}: {e}\n{text}"))?;
        ensure(back == c, || format!("case {case}: round trip changed the circuit\n{text}"))?;
        ensure(write_circuit(&back) == text, || format!("case {case}: text changed"))?;
    }
    // names other than the defaults survive too
    let named = parse_circuit(".v x0,carry,out\nBEGIN\nt3 x0',carry,out\nt1 carry\nEND").unwrap();
    ensure(parse_circuit(&write_circuit(&named)).unwrap() == named, || "named circuit changed".into())?;
    Ok("1000/1000 random circuits identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 cost-model table", cost_table, Duration::from_secs(1)),
        ("2 example 1 common-target", example_one, Duration::from_secs(1)),
        ("3 NOT sandwich 7 -> 5", fig_four, Duration::from_secs(1)),
        ("4 exhaustive rule soundness", rule_soundness, Duration::from_secs(30)),
        ("5 cover exactness vs oracle", ctr_exactness, Duration::from_secs(120)),
        ("6 fuzzed end-to-end", fuzz_end_to_end, Duration::from_secs(120)),
        ("7 table improvement percentages", table_percentages, Duration::from_secs(1)),
        ("8 parse/write round trip", round_trip, Duration::from_secs(10)),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => Err(format!("{msg}, but took {elapsed:.2?} (budget {budget:?})")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS  criterion {name}: {msg} [{elapsed:.2?}]"),
            Err(msg) => {
                failures += 1;
                println!("FAIL  criterion {name}: {msg} [{elapsed:.2?}]");
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
