//! Precomputed Wigner-kernel samples on the discrete grids.
//!
//! `apply_theta` only ever needs the kernel at velocity *differences*
//! `v_j - v_k`, which on the offset grid are integer multiples of `dv`, plus
//! the node values `Vw(x, v_j)` for the regularized operator. The table
//! stores both, per space node, together with the odd kernel moments and the
//! discrete `H1` norm that feeds the operator bound check. After
//! construction the table is immutable.

use crate::error::{Result, WignerError};
use crate::grid::{SpaceGrid, VelocityGrid};
use crate::potential::PotentialSpec;

#[derive(Debug, Clone)]
struct XRecord {
    /// `Vw(x, m dv)` for `m = -(2K-1) ..= 2K-1`, indexed by `m + 2K - 1`.
    offsets: Vec<f64>,
    /// `Vw(x, v_j)` at the 2K grid nodes.
    nodes: Vec<f64>,
    /// `d/dv Vw(x, v_j)` at the nodes.
    nodes_dv: Vec<f64>,
    /// `[Vw_1, Vw_3, ...]` up to the configured order.
    moments: Vec<f64>,
    h1_norm: f64,
}

/// Kernel samples for a list of space nodes on one velocity grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    vgrid: VelocityGrid,
    xs: Vec<f64>,
    records: Vec<XRecord>,
    max_moment_order: usize,
    dv_stencil: &'static str,
}

impl KernelTable {
    /// Build the table at explicit space positions.
    pub fn build(
        spec: &PotentialSpec,
        vgrid: VelocityGrid,
        xs: &[f64],
        max_moment_order: usize,
    ) -> Result<Self> {
        if max_moment_order % 2 == 0 || max_moment_order == 0 {
            return Err(WignerError::validation(
                "max_moment_order",
                "must be an odd integer >= 1",
            ));
        }
        if max_moment_order > spec.max_derivative_order() {
            return Err(WignerError::Capability(format!(
                "moment order {} needs derivatives beyond the potential's smoothness",
                max_moment_order
            )));
        }
        let two_k = vgrid.len();
        let dv = vgrid.dv();
        let mut records = Vec::with_capacity(xs.len());
        for &x in xs {
            let mut offsets = Vec::with_capacity(2 * two_k - 1);
            for m in -(two_k as i64 - 1)..=(two_k as i64 - 1) {
                offsets.push(spec.kernel(x, m as f64 * dv)?);
            }
            let mut nodes = Vec::with_capacity(two_k);
            let mut nodes_dv = Vec::with_capacity(two_k);
            for j in 0..two_k {
                nodes.push(spec.kernel(x, vgrid.node(j))?);
                nodes_dv.push(spec.kernel_dv(x, vgrid.node(j))?);
            }
            let moments = spec.kernel_moments(x, max_moment_order)?;
            let h1_norm = discrete_h1(dv, &nodes, &nodes_dv);
            records.push(XRecord {
                offsets,
                nodes,
                nodes_dv,
                moments,
                h1_norm,
            });
        }
        let dv_stencil = match spec {
            PotentialSpec::Tabulated(_) => "central-4th-order",
            _ => "analytic",
        };
        Ok(KernelTable {
            vgrid,
            xs: xs.to_vec(),
            records,
            max_moment_order,
            dv_stencil,
        })
    }

    /// Build at the doubled resolution of `sgrid` (2M + 1 nodes), which is
    /// what the RK4 march needs: base nodes at even indices, half-steps at
    /// odd indices.
    pub fn for_marching(
        spec: &PotentialSpec,
        vgrid: VelocityGrid,
        sgrid: &SpaceGrid,
        max_moment_order: usize,
    ) -> Result<Self> {
        let half = 0.5 * sgrid.dx();
        let xs: Vec<f64> = (0..=2 * sgrid.steps())
            .map(|i| sgrid.left() + i as f64 * half)
            .collect();
        Self::build(spec, vgrid, &xs, max_moment_order)
    }

    /// Whether this table was built by [`KernelTable::for_marching`] on
    /// `sgrid` (same nodes including half-steps).
    pub fn covers_marching(&self, sgrid: &SpaceGrid) -> bool {
        self.xs.len() == 2 * sgrid.steps() + 1
            && (self.xs[0] - sgrid.left()).abs() <= 1e-12 * (1.0 + sgrid.length())
            && (self.xs[self.xs.len() - 1] - sgrid.right()).abs() <= 1e-12 * (1.0 + sgrid.length())
    }

    /// Table index of the i-th base node of the marching grid.
    pub fn base_index(i: usize) -> usize {
        2 * i
    }

    /// Table index of the half-step between base nodes `i` and `i + 1`.
    pub fn half_index(i: usize) -> usize {
        2 * i + 1
    }

    pub fn vgrid(&self) -> &VelocityGrid {
        &self.vgrid
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x(&self, x_index: usize) -> f64 {
        self.xs[x_index]
    }

    /// `Vw(x_i, m dv)` for integer offset `m`, `|m| <= 2K - 1`.
    pub fn offset_value(&self, x_index: usize, m: i64) -> f64 {
        let c = self.vgrid.len() as i64 - 1;
        debug_assert!(m.abs() <= c);
        self.records[x_index].offsets[(m + c) as usize]
    }

    /// `Vw(x_i, v_j)` at grid node `j`.
    pub fn node_value(&self, x_index: usize, j: usize) -> f64 {
        self.records[x_index].nodes[j]
    }

    pub fn node_dv_value(&self, x_index: usize, j: usize) -> f64 {
        self.records[x_index].nodes_dv[j]
    }

    /// Discrete `H1` norm `(||Vw||_{L2}^2 + ||d_v Vw||_{L2}^2)^{1/2}` of the
    /// kernel at `x_i`, by trapezoidal quadrature over the velocity grid.
    pub fn kernel_h1_norm(&self, x_index: usize) -> f64 {
        self.records[x_index].h1_norm
    }

    /// `[Vw_1(x_i), Vw_3(x_i), ...]`.
    pub fn moments(&self, x_index: usize) -> &[f64] {
        &self.records[x_index].moments
    }

    pub fn max_moment_order(&self) -> usize {
        self.max_moment_order
    }

    /// How `d_v Vw` samples were obtained (`analytic` or a finite-difference
    /// stencil).
    pub fn dv_stencil(&self) -> &'static str {
        self.dv_stencil
    }

    /// Kernel mass beyond the truncation boundary, `\int_{|v| > v_max} |Vw| dv`
    /// estimated at `x_i` by extending the closed form / quadrature a few
    /// `v_max` further out. Reported per run; the continuum problem lives on
    /// unbounded velocity space.
    pub fn truncation_residual(&self, spec: &PotentialSpec, x_index: usize) -> Result<f64> {
        let v_max = self.vgrid.v_max();
        let x = self.xs[x_index];
        let mut acc = 0.0;
        let samples = 64;
        let reach = 2.0 * v_max;
        let h = (reach - v_max) / samples as f64;
        for s in 0..samples {
            let v = v_max + (s as f64 + 0.5) * h;
            acc += spec.kernel(x, v)?.abs() * h;
        }
        Ok(2.0 * acc)
    }
}

fn discrete_h1(dv: f64, nodes: &[f64], nodes_dv: &[f64]) -> f64 {
    let n = nodes.len();
    let mut acc = 0.0;
    for j in 0..n {
        let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        acc += w * (nodes[j] * nodes[j] + nodes_dv[j] * nodes_dv[j]);
    }
    (dv * acc).sqrt()
}
