#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use revopt::{Circuit, Control, Gate, Polarity};

pub fn random_gate(rng: &mut StdRng, width: usize) -> Gate {
    let target = rng.gen_range(0..width);
    let mut others: Vec<usize> = (0..width).filter(|&l| l != target).collect();
    others.shuffle(rng);
    let m = rng.gen_range(0..width);
    let controls = others[..m].iter().map(|&line| {
        let pol = if rng.gen_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
        Control::new(line, pol)
    });
    Gate::new(controls, target).unwrap()
}

pub fn random_circuit(rng: &mut StdRng, max_width: usize, max_gates: usize) -> Circuit {
    let width = rng.gen_range(1..=max_width);
    let len = rng.gen_range(0..=max_gates);
    let mut c = Circuit::with_width(width).unwrap();
    for _ in 0..len {
        c.push(random_gate(rng, width)).unwrap();
    }
    c
}

/// Every gate on `width` lines: each target, each subset of other lines,
/// each polarity assignment.
pub fn all_gates(width: usize) -> Vec<Gate> {
    let mut out = Vec::new();
    for target in 0..width {
        let others: Vec<usize> = (0..width).filter(|&l| l != target).collect();
        // base 3 per other line: absent, positive, negative
        let combos = 3usize.pow(others.len() as u32);
        for code in 0..combos {
            let mut k = code;
            let mut controls = Vec::new();
            for &line in &others {
                match k % 3 {
                    1 => controls.push(Control::pos(line)),
                    2 => controls.push(Control::neg(line)),
                    _ => {}
                }
                k /= 3;
            }
            out.push(Gate::new(controls, target).unwrap());
        }
    }
    out
}
