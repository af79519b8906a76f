//! Exclusive-cover minimization of a Kmap.
//!
//! A cover is a list of cubes whose XOR equals the map. The search minimizes
//! the quantum cost of the gates the cubes turn into, then the number of
//! gates, then the number of control literals. The full-map cube plays the
//! role of the trailing NOT of an inverted cover, so realizing the complement
//! map is always part of the search.
//!
//! Maps that depend on at most [`EXACT_LIMIT`] variables are solved exactly
//! by a uniform-cost search over residual maps (one search per variable
//! count and circuit width, cached). Larger maps use local search seeded with
//! the input cubes, the positive-polarity Reed–Muller form and a greedy
//! peeling, improved by exclusive-link rewrites of cube pairs.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::kmap::{Cover, Cube, Kmap};

/// Largest support size solved exactly (16-cell maps).
pub const EXACT_LIMIT: usize = 4;

/// Largest support size for which greedy peeling enumerates every cube.
const GREEDY_LIMIT: usize = 6;

/// Seeds with more cubes than this skip pairwise improvement.
const LOCAL_SEARCH_LIMIT: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverOptions {
    /// Support sizes up to this value (capped at [`EXACT_LIMIT`]) are solved exactly.
    pub exact_threshold: usize,
    /// Seed for the randomized restarts of the local search.
    pub seed: u64,
    /// Randomized restarts per starting cover, in addition to the ordered pass.
    pub restarts: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            exact_threshold: EXACT_LIMIT,
            seed: 0,
            restarts: 3,
        }
    }
}

type Rank = (u64, usize, usize);

fn rank(cubes: &[Cube], width: usize) -> Rank {
    (
        cubes.iter().map(|c| c.cost(width)).sum(),
        cubes.len(),
        cubes.iter().map(|c| c.num_literals()).sum(),
    )
}

/// Minimum-cost exclusive cover of `kmap` with default options.
pub fn minimize_cover(kmap: &Kmap) -> Cover {
    minimize_cover_with(kmap, &[], &CoverOptions::default())
}

/// Minimum-cost exclusive cover of `kmap`. `seeds`, when they XOR to the map,
/// give the heuristic search a known-good starting point.
pub fn minimize_cover_with(kmap: &Kmap, seeds: &[Cube], opts: &CoverOptions) -> Cover {
    let v = kmap.num_vars();
    let support = kmap.support();
    let reduced = kmap.restrict(&support);
    let seeds: Vec<Cube> = seeds
        .iter()
        .filter_map(|&c| project_cube(c, v, &support))
        .collect();

    let vr = support.len();
    let cubes = if vr <= opts.exact_threshold.min(EXACT_LIMIT) {
        exact_cover(&reduced)
    } else {
        heuristic_cover(&reduced, &seeds, opts)
    };

    let mut cubes: Vec<Cube> = cubes.into_iter().map(|c| lift_cube(c, vr, &support, v)).collect();
    let inverted = match cubes.iter().position(|&c| c == Cube::FULL) {
        Some(i) => {
            cubes.remove(i);
            true
        }
        None => false,
    };
    cubes.sort_by_key(|c| (c.num_literals(), Reverse(c.care()), Reverse(c.value())));
    let cover = Cover { cubes, inverted };
    debug_assert!(cover.realizes(kmap));
    cover
}

/// Restricts a cube of a `v`-variable map to the variables at `keep`, with
/// dropped variables fixed to 0. Returns `None` if the cube vanishes.
fn project_cube(cube: Cube, v: usize, keep: &[usize]) -> Option<Cube> {
    let k = keep.len();
    let mut care = 0u32;
    let mut value = 0u32;
    for j in 0..v {
        let bit = 1u32 << (v - 1 - j);
        if cube.care() & bit == 0 {
            continue;
        }
        let positive = cube.value() & bit != 0;
        match keep.iter().position(|&kj| kj == j) {
            Some(i) => {
                let nb = 1u32 << (k - 1 - i);
                care |= nb;
                if positive {
                    value |= nb;
                }
            }
            None if positive => return None,
            None => {}
        }
    }
    Some(Cube::new(care, value))
}

fn lift_cube(cube: Cube, k: usize, keep: &[usize], v: usize) -> Cube {
    let mut care = 0u32;
    let mut value = 0u32;
    for (i, &j) in keep.iter().enumerate() {
        let from = 1u32 << (k - 1 - i);
        let to = 1u32 << (v - 1 - j);
        if cube.care() & from != 0 {
            care |= to;
            if cube.value() & from != 0 {
                value |= to;
            }
        }
    }
    Cube::new(care, value)
}

/// Every cube over `v` variables.
pub fn all_cubes(v: usize) -> Vec<Cube> {
    let mut out = Vec::new();
    for care in 0u32..(1 << v) {
        // subsets of care as values
        let mut value = 0u32;
        loop {
            out.push(Cube::new(care, value));
            if value == care {
                break;
            }
            value = value.wrapping_sub(care) & care;
        }
    }
    out
}

fn cube_mask(cube: Cube, v: usize) -> u32 {
    (0..1usize << v)
        .filter(|&x| cube.contains(x))
        .fold(0u32, |m, x| m | (1 << x))
}

fn pack(cells: &[bool]) -> u32 {
    cells
        .iter()
        .enumerate()
        .fold(0u32, |m, (x, &b)| if b { m | (1 << x) } else { m })
}

/// Shortest-path table over all `2^(2^v)` functions of `v` variables.
struct ExactTable {
    cubes: Vec<Cube>,
    masks: Vec<u32>,
    /// Cube used on the last step into each function; `u16::MAX` at the root.
    via: Vec<u16>,
}

fn exact_table(v: usize, width: usize) -> Arc<ExactTable> {
    type Cache = Mutex<HashMap<(usize, usize), Arc<ExactTable>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("cache lock").get(&(v, width)) {
        return Arc::clone(t);
    }
    let table = Arc::new(build_exact_table(v, width));
    cache
        .lock()
        .expect("cache lock")
        .entry((v, width))
        .or_insert(table)
        .clone()
}

fn build_exact_table(v: usize, width: usize) -> ExactTable {
    assert!(v <= EXACT_LIMIT);
    let cubes = all_cubes(v);
    let masks: Vec<u32> = cubes.iter().map(|&c| cube_mask(c, v)).collect();
    let weights: Vec<Rank> = cubes.iter().map(|&c| (c.cost(width), 1, c.num_literals())).collect();
    let states = 1usize << (1usize << v);

    let mut best: Vec<Option<Rank>> = vec![None; states];
    let mut via = vec![u16::MAX; states];
    let mut done = vec![false; states];
    let mut heap = BinaryHeap::new();
    best[0] = Some((0, 0, 0));
    heap.push(Reverse(((0u64, 0usize, 0usize), 0u32)));
    while let Some(Reverse((d, node))) = heap.pop() {
        let node = node as usize;
        if done[node] {
            continue;
        }
        done[node] = true;
        for (ci, (&mask, w)) in masks.iter().zip(&weights).enumerate() {
            let next = node ^ mask as usize;
            if done[next] {
                continue;
            }
            let nd = (d.0 + w.0, d.1 + w.1, d.2 + w.2);
            if best[next].is_none_or(|b| nd < b) {
                best[next] = Some(nd);
                via[next] = ci as u16;
                heap.push(Reverse((nd, next as u32)));
            }
        }
    }
    ExactTable { cubes, masks, via }
}

fn exact_cover(kmap: &Kmap) -> Vec<Cube> {
    let v = kmap.num_vars();
    let table = exact_table(v, kmap.width());
    let mut node = pack(kmap.cells()) as usize;
    let mut cubes = Vec::new();
    while node != 0 {
        let ci = table.via[node] as usize;
        cubes.push(table.cubes[ci]);
        node ^= table.masks[ci] as usize;
    }
    cubes
}

fn xor_cells(cubes: &[Cube], v: usize) -> Vec<bool> {
    let mut cells = vec![false; 1 << v];
    for c in cubes {
        c.toggle_into(&mut cells);
    }
    cells
}

/// Positive-polarity Reed–Muller expansion (Möbius transform).
fn reed_muller(cells: &[bool], v: usize) -> Vec<Cube> {
    let mut coeff = cells.to_vec();
    for i in 0..v {
        let bit = 1usize << i;
        for x in 0..coeff.len() {
            if x & bit != 0 {
                coeff[x] ^= coeff[x ^ bit];
            }
        }
    }
    coeff
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(x, _)| Cube::new(x as u32, x as u32))
        .collect()
}

/// Repeatedly XORs in the cube that clears the most residual ones.
fn greedy_peel(cells: &[bool], v: usize, width: usize) -> Vec<Cube> {
    let candidates = all_cubes(v);
    let members: Vec<Vec<usize>> = candidates
        .iter()
        .map(|c| (0..cells.len()).filter(|&x| c.contains(x)).collect())
        .collect();
    let mut residual = cells.to_vec();
    let mut out = Vec::new();
    while residual.iter().any(|&b| b) {
        type Key = (i64, Reverse<usize>, Reverse<u64>);
        let mut best: Option<(Key, usize)> = None;
        for (i, cells_in) in members.iter().enumerate() {
            let gain: i64 = cells_in.iter().map(|&x| if residual[x] { 1 } else { -1 }).sum();
            if gain <= 0 {
                continue;
            }
            let key = (
                gain,
                Reverse(candidates[i].num_literals()),
                Reverse(candidates[i].cost(width)),
            );
            if best.as_ref().is_none_or(|(b, _)| key > *b) {
                best = Some((key, i));
            }
        }
        let (_, i) = best.expect("a residual one-cell always has a positive-gain minterm");
        for &x in &members[i] {
            residual[x] ^= true;
        }
        out.push(candidates[i]);
    }
    out
}

/// Removes pairs of identical cubes.
fn cancel_duplicates(cubes: &mut Vec<Cube>) {
    cubes.sort();
    let mut out: Vec<Cube> = Vec::with_capacity(cubes.len());
    for &c in cubes.iter() {
        if out.last() == Some(&c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    *cubes = out;
}

/// Bits where two cubes carry different ternary values.
fn diff_bits(a: Cube, b: Cube) -> u32 {
    (a.care() ^ b.care()) | (a.care() & b.care() & (a.value() ^ b.value()))
}

/// Replaces the ternary value at `bit` of `target` by the symmetric
/// difference of the values of `a` and `b` there.
fn with_xor_literal(target: Cube, a: Cube, b: Cube, bit: u32) -> Cube {
    let (care, value) = match (a.care() & bit != 0, b.care() & bit != 0) {
        // {0} Δ {1} = don't care
        (true, true) => (target.care() & !bit, target.value() & !bit),
        // {x} Δ {0,1} = {¬x}
        (true, false) => (target.care() | bit, (target.value() & !bit) | (!a.value() & bit)),
        (false, true) => (target.care() | bit, (target.value() & !bit) | (!b.value() & bit)),
        (false, false) => unreachable!("bit differs between cubes"),
    };
    Cube::new(care, value)
}

/// Pairwise exclusive-link rewrites that replace `a, b` by an equivalent
/// shorter or equally long list.
fn pair_rewrites(a: Cube, b: Cube) -> Vec<Vec<Cube>> {
    let diff = diff_bits(a, b);
    match diff.count_ones() {
        0 => vec![vec![]],
        1 => vec![vec![with_xor_literal(a, a, b, diff)]],
        2 => {
            let p = diff & diff.wrapping_neg();
            let q = diff ^ p;
            vec![
                vec![with_xor_literal(a, a, b, p), with_xor_literal(b, a, b, q)],
                vec![with_xor_literal(a, a, b, q), with_xor_literal(b, a, b, p)],
            ]
        }
        _ => Vec::new(),
    }
}

/// `c·x̄ = c ⊕ c·x`: trades a negative literal for two cubes.
fn split_rewrites(c: Cube) -> Vec<Vec<Cube>> {
    let mut out = Vec::new();
    let mut negatives = c.care() & !c.value();
    while negatives != 0 {
        let bit = negatives & negatives.wrapping_neg();
        negatives ^= bit;
        out.push(vec![
            Cube::new(c.care() & !bit, c.value()),
            Cube::new(c.care(), c.value() | bit),
        ]);
    }
    out
}

fn improve(mut cubes: Vec<Cube>, width: usize, mut rng: Option<&mut StdRng>) -> Vec<Cube> {
    cancel_duplicates(&mut cubes);
    if cubes.len() > LOCAL_SEARCH_LIMIT {
        return cubes;
    }
    'search: loop {
        let mut pairs: Vec<(usize, usize)> = (0..cubes.len())
            .flat_map(|i| (i + 1..cubes.len()).map(move |j| (i, j)))
            .collect();
        if let Some(rng) = rng.as_deref_mut() {
            pairs.shuffle(rng);
        }
        for (i, j) in pairs {
            let (a, b) = (cubes[i], cubes[j]);
            let old = rank(&[a, b], width);
            for replacement in pair_rewrites(a, b) {
                if rank(&replacement, width) < old {
                    cubes.swap_remove(j);
                    cubes.swap_remove(i);
                    cubes.extend(replacement);
                    cancel_duplicates(&mut cubes);
                    continue 'search;
                }
            }
        }
        for i in 0..cubes.len() {
            let old = rank(&[cubes[i]], width);
            for replacement in split_rewrites(cubes[i]) {
                if rank(&replacement, width) < old {
                    cubes.swap_remove(i);
                    cubes.extend(replacement);
                    cancel_duplicates(&mut cubes);
                    continue 'search;
                }
            }
        }
        return cubes;
    }
}

fn heuristic_cover(kmap: &Kmap, seeds: &[Cube], opts: &CoverOptions) -> Vec<Cube> {
    let v = kmap.num_vars();
    let width = kmap.width();
    let cells = kmap.cells();
    let complement: Vec<bool> = cells.iter().map(|&b| !b).collect();

    let with_not = |mut cubes: Vec<Cube>| {
        cubes.push(Cube::FULL);
        cubes
    };
    let mut starts: Vec<Vec<Cube>> = Vec::new();
    if !seeds.is_empty() && xor_cells(seeds, v) == cells {
        starts.push(seeds.to_vec());
    }
    starts.push(reed_muller(cells, v));
    starts.push(with_not(reed_muller(&complement, v)));
    if v <= GREEDY_LIMIT {
        starts.push(greedy_peel(cells, v, width));
        starts.push(with_not(greedy_peel(&complement, v, width)));
    }

    let mut rng = StdRng::seed_from_u64(opts.seed);
    let mut best: Option<(Rank, Vec<Cube>)> = None;
    for start in starts {
        let mut candidates = vec![improve(start.clone(), width, None)];
        for _ in 0..opts.restarts {
            candidates.push(improve(start.clone(), width, Some(&mut rng)));
        }
        for mut cand in candidates {
            cancel_duplicates(&mut cand);
            let r = rank(&cand, width);
            if best.as_ref().is_none_or(|(br, _)| r < *br) {
                best = Some((r, cand));
            }
        }
    }
    let (_, cubes) = best.expect("at least one start");
    debug_assert_eq!(xor_cells(&cubes, v), cells);
    cubes
}
