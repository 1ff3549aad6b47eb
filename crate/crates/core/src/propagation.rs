//! Marching the parity initial value problems `df/dx = B(x) f` and building
//! the end-to-end propagator matrices `R` (even part) and `Q_grid` (odd
//! part, grid-regularized).
//!
//! The march is classical RK4 with the kernel evaluated at half-steps, which
//! is why [`KernelTable::for_marching`] builds the table on the doubled
//! space grid. Propagators act on parity-reduced coordinates (the K values
//! at positive nodes; parity determines the rest) and are obtained by
//! marching the K x K matrix ODE `dPhi/dx = B_red(x) Phi` with the same
//! scheme, which is arithmetic-identical to marching the K parity basis
//! vectors one by one.
//!
//! On the odd subspace the continuum operator is unbounded; the grid
//! operator is bounded (smallest node is dv/2), so the odd grid propagator
//! is a grid-regularized object and is labelled as such in exports. The
//! moment-space map in [`crate::odd_moments`] is the cross-check.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Result, WignerError};
use crate::grid::{GridFunction, Parity, SpaceGrid, VelocityGrid};
use crate::kernel::KernelTable;
use crate::wigner_op::apply_b;

/// Marching direction across `[-l/2, l/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

/// Sign of the governing equation: `Standard` is `df/dx = B(x) f`, `Flipped`
/// is `df/dx = -B(x) f`. Only the sign-convention diagnostic uses `Flipped`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorSign {
    Standard,
    Flipped,
}

impl OperatorSign {
    fn factor(self) -> f64 {
        match self {
            OperatorSign::Standard => 1.0,
            OperatorSign::Flipped => -1.0,
        }
    }
}

/// Dense linear map carrying one parity component across the domain, in
/// positive-node coordinates.
#[derive(Debug, Clone)]
pub struct PropagatorMatrix {
    parity: Parity,
    direction: Direction,
    matrix: DMatrix<f64>,
    vgrid: VelocityGrid,
    dx: f64,
}

impl PropagatorMatrix {
    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn vgrid(&self) -> &VelocityGrid {
        &self.vgrid
    }

    pub fn apply(&self, half: &DVector<f64>) -> DVector<f64> {
        &self.matrix * half
    }

    /// 2-norm condition number estimate via SVD.
    pub fn condition_estimate(&self) -> f64 {
        let sv = self.matrix.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Spectral-norm deviation from the identity.
    pub fn identity_deviation(&self) -> f64 {
        let k = self.matrix.nrows();
        (&self.matrix - DMatrix::<f64>::identity(k, k))
            .singular_values()
            .max()
    }

    /// Export the matrix row-major as CSV plus a JSON sidecar with the
    /// metadata (parity, direction, grids, scheme, condition estimate).
    pub fn export(&self, csv_path: &Path, sidecar_path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(csv_path)?);
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| self.matrix[(i, j)].to_string())
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        let sidecar = serde_json::json!({
            "parity": self.parity,
            "direction": self.direction,
            "regularization": match self.parity {
                Parity::Even => "none",
                Parity::Odd => "grid-regularized",
            },
            "velocity": { "half_count": self.vgrid.half_count(), "dv": self.vgrid.dv() },
            "step_scheme": { "method": "rk4", "dx": self.dx },
            "condition_estimate": self.condition_estimate(),
        });
        std::fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar).unwrap() + "\n")?;
        Ok(())
    }
}

fn require_marching_table(table: &KernelTable, sgrid: &SpaceGrid) -> Result<()> {
    if !table.covers_marching(sgrid) {
        return Err(WignerError::GridMismatch(
            "kernel table was not built with KernelTable::for_marching on this space grid".into(),
        ));
    }
    Ok(())
}

/// March the IVP `df/dx = B(x) f` across the domain with classical RK4.
///
/// Returns one slice per space node, always in ascending-x order; for
/// `RightToLeft` the initial value sits at the last slice.
pub fn march_ivp(
    table: &KernelTable,
    sgrid: &SpaceGrid,
    f0: &GridFunction,
    parity: Parity,
    direction: Direction,
) -> Result<Vec<GridFunction>> {
    march_ivp_with_sign(table, sgrid, f0, parity, direction, OperatorSign::Standard)
}

/// [`march_ivp`] with an explicit equation sign; used by the sign-convention
/// diagnostic.
pub fn march_ivp_with_sign(
    table: &KernelTable,
    sgrid: &SpaceGrid,
    f0: &GridFunction,
    parity: Parity,
    direction: Direction,
    sign: OperatorSign,
) -> Result<Vec<GridFunction>> {
    require_marching_table(table, sgrid)?;
    if f0.grid() != table.vgrid() {
        return Err(WignerError::GridMismatch(
            "initial value does not live on the table's velocity grid".into(),
        ));
    }
    let tagged = f0.clone().with_tag(match parity {
        Parity::Even => crate::grid::ParityTag::Even,
        Parity::Odd => crate::grid::ParityTag::Odd,
    });
    if tagged.parity_deviation() > 1e-10 {
        return Err(WignerError::validation(
            "f0",
            format!("declared parity {:?} but deviation is {:.3e}", parity, tagged.parity_deviation()),
        ));
    }

    let m = sgrid.steps();
    let s = sign.factor();
    let mut slices: Vec<Option<GridFunction>> = vec![None; m + 1];
    let (start, h) = match direction {
        Direction::LeftToRight => (0usize, sgrid.dx()),
        Direction::RightToLeft => (m, -sgrid.dx()),
    };
    let mut current = tagged.clone();
    slices[start] = Some(current.clone());
    for step in 0..m {
        let (i, next_i) = match direction {
            Direction::LeftToRight => (start + step, start + step + 1),
            Direction::RightToLeft => (start - step, start - step - 1),
        };
        let (xi, xh, xn) = match direction {
            Direction::LeftToRight => (
                KernelTable::base_index(i),
                KernelTable::half_index(i),
                KernelTable::base_index(next_i),
            ),
            Direction::RightToLeft => (
                KernelTable::base_index(i),
                KernelTable::half_index(next_i),
                KernelTable::base_index(next_i),
            ),
        };
        let rhs = |x_index: usize, f: &GridFunction| -> Result<DVector<f64>> {
            Ok(s * apply_b(table, x_index, f)?.values())
        };
        let grid = *current.grid();
        let tag = current.parity_tag();
        let k1 = rhs(xi, &current)?;
        let f2 = GridFunction::new(grid, current.values() + 0.5 * h * &k1, tag)?;
        let k2 = rhs(xh, &f2)?;
        let f3 = GridFunction::new(grid, current.values() + 0.5 * h * &k2, tag)?;
        let k3 = rhs(xh, &f3)?;
        let f4 = GridFunction::new(grid, current.values() + h * &k3, tag)?;
        let k4 = rhs(xn, &f4)?;
        let next = current.values() + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        current = GridFunction::new(grid, next, tag)?;
        if !current.is_finite() {
            return Err(WignerError::Divergence {
                x: sgrid.node(next_i),
            });
        }
        slices[next_i] = Some(current.clone());
    }
    Ok(slices.into_iter().map(|s| s.unwrap()).collect())
}

/// The K x K operator `B(x)` reduced to positive-node coordinates of one
/// parity subspace:
/// `B_red[j, p] = (dv / v_j) (Vw((j - p) dv) + s Vw((j + p + 1) dv))`,
/// `s = +1` even, `-1` odd.
pub fn reduced_operator(
    table: &KernelTable,
    x_index: usize,
    parity: Parity,
    sign: OperatorSign,
) -> DMatrix<f64> {
    let grid = table.vgrid();
    let k = grid.half_count();
    let dv = grid.dv();
    let s = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let factor = sign.factor();
    DMatrix::from_fn(k, k, |j, p| {
        let direct = table.offset_value(x_index, j as i64 - p as i64);
        let mirrored = table.offset_value(x_index, (j + p + 1) as i64);
        factor * dv * (direct + s * mirrored) / grid.positive_node(j)
    })
}

/// Build the dense end-to-end propagator of one parity subspace by marching
/// the matrix ODE `dPhi/dx = B_red(x) Phi` with the same RK4 scheme as
/// [`march_ivp`].
pub fn build_propagator(
    table: &KernelTable,
    sgrid: &SpaceGrid,
    parity: Parity,
    direction: Direction,
) -> Result<PropagatorMatrix> {
    build_propagator_with_sign(table, sgrid, parity, direction, OperatorSign::Standard)
}

pub fn build_propagator_with_sign(
    table: &KernelTable,
    sgrid: &SpaceGrid,
    parity: Parity,
    direction: Direction,
    sign: OperatorSign,
) -> Result<PropagatorMatrix> {
    require_marching_table(table, sgrid)?;
    let k = table.vgrid().half_count();
    let m = sgrid.steps();
    let (start, h) = match direction {
        Direction::LeftToRight => (0usize, sgrid.dx()),
        Direction::RightToLeft => (m, -sgrid.dx()),
    };
    let mut phi = DMatrix::<f64>::identity(k, k);
    for step in 0..m {
        let (i, next_i) = match direction {
            Direction::LeftToRight => (start + step, start + step + 1),
            Direction::RightToLeft => (start - step, start - step - 1),
        };
        let half = match direction {
            Direction::LeftToRight => KernelTable::half_index(i),
            Direction::RightToLeft => KernelTable::half_index(next_i),
        };
        let b0 = reduced_operator(table, KernelTable::base_index(i), parity, sign);
        let bh = reduced_operator(table, half, parity, sign);
        let b1 = reduced_operator(table, KernelTable::base_index(next_i), parity, sign);
        let k1 = &b0 * &phi;
        let k2 = &bh * (&phi + 0.5 * h * &k1);
        let k3 = &bh * (&phi + 0.5 * h * &k2);
        let k4 = &b1 * (&phi + h * &k3);
        phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !phi.iter().all(|x| x.is_finite()) {
            return Err(WignerError::Divergence {
                x: sgrid.node(next_i),
            });
        }
    }
    Ok(PropagatorMatrix {
        parity,
        direction,
        matrix: phi,
        vgrid: *table.vgrid(),
        dx: sgrid.dx(),
    })
}
