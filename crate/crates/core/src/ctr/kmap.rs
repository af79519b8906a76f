use std::fmt;

use crate::circuit::{Control, Gate, Polarity};
use crate::cost::control_cost;

use super::CtrError;

/// Largest number of Kmap variables handled (`2^16` cells).
pub const MAX_KMAP_VARS: usize = 16;

/// Parity function of a common-target window over its control lines.
///
/// `vars[0]` is the most significant bit of the cell index. `width` is the
/// width of the enclosing circuit and fixes the cost of realized gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kmap {
    width: usize,
    vars: Vec<usize>,
    cells: Vec<bool>,
}

impl Kmap {
    pub fn new(width: usize, vars: Vec<usize>, cells: Vec<bool>) -> Result<Self, CtrError> {
        if vars.len() > MAX_KMAP_VARS {
            return Err(CtrError::TooManyVars(vars.len()));
        }
        if cells.len() != 1 << vars.len() {
            return Err(CtrError::CellCount {
                got: cells.len(),
                vars: vars.len(),
            });
        }
        if width == 0 || vars.len() >= width {
            return Err(CtrError::TooManyVars(vars.len()));
        }
        Ok(Self { width, vars, cells })
    }

    /// XOR of the cubes of `gates`. Every control of every gate must be one
    /// of `vars`.
    pub fn from_gates(width: usize, vars: Vec<usize>, gates: &[Gate]) -> Result<Self, CtrError> {
        let v = vars.len();
        if v > MAX_KMAP_VARS {
            return Err(CtrError::TooManyVars(v));
        }
        let mut cells = vec![false; 1 << v];
        for gate in gates {
            let cube = Cube::from_controls(gate.controls(), &vars)?;
            cube.toggle_into(&mut cells);
        }
        Self::new(width, vars, cells)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Lines backing each variable, most significant first.
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, cell: usize) -> bool {
        self.cells[cell]
    }

    pub fn ones(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_zero(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            vars: self.vars.clone(),
            cells: self.cells.iter().map(|&b| !b).collect(),
        }
    }

    /// Variable positions (indices into `vars`) the function depends on.
    pub fn support(&self) -> Vec<usize> {
        let v = self.num_vars();
        (0..v)
            .filter(|&j| {
                let bit = 1usize << (v - 1 - j);
                (0..self.cells.len()).any(|x| x & bit == 0 && self.cells[x] != self.cells[x | bit])
            })
            .collect()
    }

    /// Restriction to the variables at `keep` (positions into `vars`, in
    /// increasing order); dropped variables are fixed to 0.
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let v = self.num_vars();
        let k = keep.len();
        let cells = (0..1usize << k)
            .map(|y| {
                let mut x = 0usize;
                for (i, &j) in keep.iter().enumerate() {
                    if y & (1 << (k - 1 - i)) != 0 {
                        x |= 1 << (v - 1 - j);
                    }
                }
                self.cells[x]
            })
            .collect();
        Self {
            width: self.width,
            vars: keep.iter().map(|&j| self.vars[j]).collect(),
            cells,
        }
    }
}

impl fmt::Display for Kmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.cells {
            f.write_str(if c { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A group of `2^p` cells: the assignments agreeing with the fixed literals.
///
/// Bits of `care` mark fixed variables in cell-index bit positions; `value`
/// holds the required bit for each (1 = positive literal).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    care: u32,
    value: u32,
}

impl Cube {
    /// The full-map cube (no fixed variables); realized as a NOT.
    pub const FULL: Cube = Cube { care: 0, value: 0 };

    pub fn new(care: u32, value: u32) -> Self {
        Self {
            care,
            value: value & care,
        }
    }

    /// Cube for `literals` given as `(var position, polarity)` in a map of
    /// `num_vars` variables.
    pub fn from_literals(num_vars: usize, literals: &[(usize, Polarity)]) -> Self {
        let mut care = 0;
        let mut value = 0;
        for &(j, p) in literals {
            let bit = 1u32 << (num_vars - 1 - j);
            care |= bit;
            if p.is_positive() {
                value |= bit;
            }
        }
        Self { care, value }
    }

    fn from_controls(controls: &[Control], vars: &[usize]) -> Result<Self, CtrError> {
        let literals = controls
            .iter()
            .map(|c| {
                vars.iter()
                    .position(|&l| l == c.line)
                    .map(|j| (j, c.polarity))
                    .ok_or(CtrError::ControlOutsideVars(c.line))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_literals(vars.len(), &literals))
    }

    pub fn care(self) -> u32 {
        self.care
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn num_literals(self) -> usize {
        self.care.count_ones() as usize
    }

    pub fn has_positive(self) -> bool {
        self.value != 0
    }

    /// Number of cells covered in a map of `num_vars` variables.
    pub fn size(self, num_vars: usize) -> usize {
        1 << (num_vars - self.num_literals())
    }

    pub fn contains(self, cell: usize) -> bool {
        (cell as u32) & self.care == self.value
    }

    /// Fixed literals as `(var position, polarity)`, most significant first.
    pub fn literals(self, num_vars: usize) -> Vec<(usize, Polarity)> {
        (0..num_vars)
            .filter_map(|j| {
                let bit = 1u32 << (num_vars - 1 - j);
                (self.care & bit != 0).then(|| {
                    let p = if self.value & bit != 0 {
                        Polarity::Positive
                    } else {
                        Polarity::Negative
                    };
                    (j, p)
                })
            })
            .collect()
    }

    pub fn cost(self, width: usize) -> u64 {
        control_cost(self.num_literals(), self.has_positive(), width).expect("cube fits its circuit")
    }

    /// Flips every cell of `cells` that this cube covers.
    pub fn toggle_into(self, cells: &mut [bool]) {
        let free = !self.care & (cells.len() as u32 - 1);
        // enumerate subsets of the free bits
        let mut sub = 0u32;
        loop {
            cells[(self.value | sub) as usize] ^= true;
            if sub == free {
                break;
            }
            sub = (sub.wrapping_sub(free)) & free;
        }
    }

    pub fn to_gate(self, num_vars: usize, vars: &[usize], target: usize) -> Gate {
        let controls = self
            .literals(num_vars)
            .into_iter()
            .map(|(j, p)| Control::new(vars[j], p));
        Gate::new(controls, target).expect("cube literals are distinct non-target lines")
    }
}

/// A set of cubes whose XOR, complemented when `inverted`, equals a Kmap.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cover {
    pub cubes: Vec<Cube>,
    pub inverted: bool,
}

impl Cover {
    /// Cells of the function this cover realizes over `num_vars` variables.
    pub fn evaluate(&self, num_vars: usize) -> Vec<bool> {
        let mut cells = vec![self.inverted; 1 << num_vars];
        for c in &self.cubes {
            c.toggle_into(&mut cells);
        }
        cells
    }

    /// How many cubes cover `cell`.
    pub fn coverage(&self, cell: usize) -> usize {
        self.cubes.iter().filter(|c| c.contains(cell)).count()
    }

    /// Checks the odd/even covering conditions against `kmap`.
    pub fn realizes(&self, kmap: &Kmap) -> bool {
        (0..kmap.cells().len()).all(|x| {
            let odd = self.coverage(x) % 2 == 1;
            (odd != self.inverted) == kmap.get(x)
        })
    }

    pub fn num_gates(&self) -> usize {
        self.cubes.len() + usize::from(self.inverted)
    }

    pub fn num_literals(&self) -> usize {
        self.cubes.iter().map(|c| c.num_literals()).sum()
    }

    /// Quantum cost of the emitted gates, including the trailing NOT.
    pub fn cost(&self, width: usize) -> u64 {
        self.cubes.iter().map(|c| c.cost(width)).sum::<u64>() + u64::from(self.inverted)
    }

    /// Ranking key: cost, then gate count, then literal count.
    pub fn rank(&self, width: usize) -> (u64, usize, usize) {
        (self.cost(width), self.num_gates(), self.num_literals())
    }
}
