//! Velocity and space discretizations, parity algebra and discrete moments.
//!
//! Velocity space uses a symmetric offset grid with nodes at half-integer
//! multiples of `dv` (Frensley layout), `v_j = ±(j + 1/2) dv`. The grid
//! excludes `v = 0`, so dividing by `v` is always well defined, and it is
//! exactly symmetric under `v -> -v`, which the parity projections rely on.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WignerError};

/// Parity of a velocity-space function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

/// Advisory parity metadata on a [`GridFunction`]; validated on demand,
/// never silently branched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityTag {
    Even,
    Odd,
    None,
}

/// Inflow side selector: `Plus` is the positive-velocity half, `Minus` the
/// negative half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Symmetric offset velocity grid with `2K` nodes `±(j + 1/2) dv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    half_count: usize,
    dv: f64,
}

impl VelocityGrid {
    pub fn new(half_count: usize, dv: f64) -> Result<Self> {
        if half_count == 0 {
            return Err(WignerError::validation("velocity.half_count", "must be >= 1"));
        }
        if !(dv > 0.0) || !dv.is_finite() {
            return Err(WignerError::validation("velocity.dv", "must be positive and finite"));
        }
        Ok(VelocityGrid { half_count, dv })
    }

    pub fn half_count(&self) -> usize {
        self.half_count
    }

    pub fn len(&self) -> usize {
        2 * self.half_count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    /// Signed node value for index `j` in `0..2K`, strictly increasing in `j`.
    pub fn node(&self, j: usize) -> f64 {
        (j as f64 - self.half_count as f64 + 0.5) * self.dv
    }

    /// Index of the node at `-v(j)`.
    pub fn mirror(&self, j: usize) -> usize {
        2 * self.half_count - 1 - j
    }

    /// Index of the `p`-th positive node `v_p = (p + 1/2) dv`, `p` in `0..K`.
    pub fn positive_index(&self, p: usize) -> usize {
        self.half_count + p
    }

    /// The `p`-th positive node value.
    pub fn positive_node(&self, p: usize) -> f64 {
        (p as f64 + 0.5) * self.dv
    }

    pub fn v_max(&self) -> f64 {
        (self.half_count as f64 - 0.5) * self.dv
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |j| self.node(j))
    }
}

/// Uniform space grid on `[-l/2, l/2]` with `M` steps and `M + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    length: f64,
    steps: usize,
}

impl SpaceGrid {
    pub fn new(length: f64, steps: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(WignerError::validation("domain.l", "must be positive and finite"));
        }
        if steps == 0 {
            return Err(WignerError::validation("domain.steps", "must be >= 1"));
        }
        Ok(SpaceGrid { length, steps })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dx(&self) -> f64 {
        self.length / self.steps as f64
    }

    pub fn left(&self) -> f64 {
        -0.5 * self.length
    }

    pub fn right(&self) -> f64 {
        0.5 * self.length
    }

    pub fn node(&self, i: usize) -> f64 {
        self.left() + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |i| self.node(i))
    }
}

/// A velocity-grid vector at one spatial location: the discrete `f(x, ·)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: VelocityGrid,
    values: DVector<f64>,
    parity: ParityTag,
}

impl GridFunction {
    pub fn new(grid: VelocityGrid, values: DVector<f64>, parity: ParityTag) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(WignerError::GridMismatch(format!(
                "value vector of length {} on a grid with {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(GridFunction { grid, values, parity })
    }

    pub fn zero(grid: VelocityGrid) -> Self {
        GridFunction {
            grid,
            values: DVector::zeros(grid.len()),
            parity: ParityTag::None,
        }
    }

    pub fn from_fn(grid: VelocityGrid, f: impl FnMut(f64) -> f64) -> Self {
        let values = DVector::from_iterator(grid.len(), grid.nodes().map(f));
        GridFunction {
            grid,
            values,
            parity: ParityTag::None,
        }
    }

    /// Extend a positive-node half vector to the full grid with the given
    /// parity: even mirrors values, odd negates them.
    pub fn from_parity_half(grid: VelocityGrid, parity: Parity, half: &DVector<f64>) -> Result<Self> {
        if half.len() != grid.half_count() {
            return Err(WignerError::GridMismatch(format!(
                "half vector of length {} on a grid with K = {}",
                half.len(),
                grid.half_count()
            )));
        }
        let mut values = DVector::zeros(grid.len());
        for p in 0..grid.half_count() {
            let j = grid.positive_index(p);
            values[j] = half[p];
            values[grid.mirror(j)] = match parity {
                Parity::Even => half[p],
                Parity::Odd => -half[p],
            };
        }
        Ok(GridFunction {
            grid,
            values,
            parity: match parity {
                Parity::Even => ParityTag::Even,
                Parity::Odd => ParityTag::Odd,
            },
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn parity_tag(&self) -> ParityTag {
        self.parity
    }

    pub fn with_tag(mut self, tag: ParityTag) -> Self {
        self.parity = tag;
        self
    }

    /// `P_e f` or `P_o f`: the even/odd projection `(f(v) ± f(-v)) / 2`.
    pub fn parity_project(&self, which: Parity) -> GridFunction {
        let n = self.grid.len();
        let mut values = DVector::zeros(n);
        for j in 0..n {
            let m = self.grid.mirror(j);
            values[j] = match which {
                Parity::Even => 0.5 * (self.values[j] + self.values[m]),
                Parity::Odd => 0.5 * (self.values[j] - self.values[m]),
            };
        }
        GridFunction {
            grid: self.grid,
            values,
            parity: match which {
                Parity::Even => ParityTag::Even,
                Parity::Odd => ParityTag::Odd,
            },
        }
    }

    /// `P±`: the K values at positive (`Plus`) or negative (`Minus`) nodes.
    ///
    /// Both halves are indexed by the positive node index `p`, i.e.
    /// `restrict(Minus)[p]` is the value at `-v_p`. This pairing is what the
    /// boundary assembly mirrors across `v -> -v`.
    pub fn inflow_restrict(&self, side: Side) -> DVector<f64> {
        let k = self.grid.half_count();
        DVector::from_iterator(
            k,
            (0..k).map(|p| {
                let j = self.grid.positive_index(p);
                match side {
                    Side::Plus => self.values[j],
                    Side::Minus => self.values[self.grid.mirror(j)],
                }
            }),
        )
    }

    /// Reassemble a function from its two inflow restrictions.
    pub fn from_halves(grid: VelocityGrid, plus: &DVector<f64>, minus: &DVector<f64>) -> Result<Self> {
        if plus.len() != grid.half_count() || minus.len() != grid.half_count() {
            return Err(WignerError::GridMismatch("half-vector length != K".into()));
        }
        let mut values = DVector::zeros(grid.len());
        for p in 0..grid.half_count() {
            let j = grid.positive_index(p);
            values[j] = plus[p];
            values[grid.mirror(j)] = minus[p];
        }
        Ok(GridFunction {
            grid,
            values,
            parity: ParityTag::None,
        })
    }

    /// `J_n = dv * sum_j v_j^n f(v_j)`: midpoint-rule velocity moment, which
    /// is the natural quadrature on the offset grid.
    pub fn velocity_moment(&self, n: u32) -> f64 {
        let mut acc = 0.0;
        for (j, v) in self.grid.nodes().enumerate() {
            acc += v.powi(n as i32) * self.values[j];
        }
        acc * self.grid.dv()
    }

    /// Discrete `L2` norm `sqrt(dv * sum f^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.dv() * self.values.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    /// Relative deviation from the tagged parity; 0 for untagged functions.
    pub fn parity_deviation(&self) -> f64 {
        let which = match self.parity {
            ParityTag::Even => Parity::Odd,
            ParityTag::Odd => Parity::Even,
            ParityTag::None => return 0.0,
        };
        let wrong = self.parity_project(which).l2_norm();
        let scale = self.l2_norm();
        if scale == 0.0 {
            wrong
        } else {
            wrong / scale
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    /// Write the slice as a two-column CSV `v,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "v,value")?;
        for (j, v) in self.grid.nodes().enumerate() {
            writeln!(out, "{},{}", v, self.values[j])?;
        }
        Ok(())
    }

    /// Read a slice from a `v,value` CSV written by [`GridFunction::write_csv`].
    /// Lines starting with `#` and the header row are skipped; node values
    /// must match the grid to 1e-9.
    pub fn read_csv(grid: VelocityGrid, path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut values = Vec::with_capacity(grid.len());
        let mut nodes = grid.nodes();
        for line in file.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with('v') {
                continue;
            }
            let mut parts = line.split(',');
            let v: f64 = parse_field(parts.next(), path, "v")?;
            let value: f64 = parse_field(parts.next(), path, "value")?;
            let expected = nodes.next().ok_or_else(|| {
                WignerError::Domain(format!("{}: more rows than grid nodes", path.display()))
            })?;
            if (v - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                return Err(WignerError::GridMismatch(format!(
                    "{}: node {} does not match grid node {}",
                    path.display(),
                    v,
                    expected
                )));
            }
            values.push(value);
        }
        if values.len() != grid.len() {
            return Err(WignerError::GridMismatch(format!(
                "{}: {} rows for a grid with {} nodes",
                path.display(),
                values.len(),
                grid.len()
            )));
        }
        GridFunction::new(grid, DVector::from_vec(values), ParityTag::None)
    }
}

fn parse_field(field: Option<&str>, path: &Path, name: &str) -> Result<f64> {
    field
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or_else(|| WignerError::Domain(format!("{}: bad `{}` field", path.display(), name)))
}
