//! Independent direct discretization of the stationary BVP.
//!
//! First-order upwind finite differences in `x` (backward for `v > 0`
//! sweeping from the left, forward for `v < 0` from the right) with the
//! convolution term taken implicitly at each node. This is deliberately a
//! *different* discretization family from the RK4 parity pipeline;
//! agreement between the two is the cross-method acceptance check.
//!
//! The global system is block tridiagonal with `2K x 2K` blocks (one per
//! space node) and is solved by block LU elimination.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bvp::{make_provenance, BoundaryData, SolutionField, SolveMode};
use crate::error::{Result, WignerError};
use crate::grid::{GridFunction, Parity, ParityTag, SpaceGrid};
use crate::kernel::KernelTable;
use crate::odd_moments::orthogonality_residual;

/// Solve the inflow BVP with first-order upwinding and one dense block
/// solve. Inflow rows are fixed to `f_L`, `f_R` exactly.
pub fn solve_direct(
    table: &KernelTable,
    sgrid: &SpaceGrid,
    bd: &BoundaryData,
) -> Result<SolutionField> {
    if bd.vgrid() != table.vgrid() {
        return Err(WignerError::GridMismatch(
            "boundary data does not live on the table's velocity grid".into(),
        ));
    }
    if !table.covers_marching(sgrid) {
        return Err(WignerError::GridMismatch(
            "kernel table was not built with KernelTable::for_marching on this space grid".into(),
        ));
    }
    let vgrid = *bd.vgrid();
    let n = vgrid.len();
    let k = vgrid.half_count();
    let m = sgrid.steps();
    let dx = sgrid.dx();
    let dv = vgrid.dv();

    // theta matrix at base node i: Theta[j, l] = dv * Vw(x_i, (j - l) dv)
    let theta = |i: usize| -> DMatrix<f64> {
        let xi = KernelTable::base_index(i);
        DMatrix::from_fn(n, n, |j, l| dv * table.offset_value(xi, j as i64 - l as i64))
    };

    // Row for node j at slice i:
    //   v_j > 0, i >= 1: v_j (f_i - f_{i-1})/dx - (Theta f)_i = 0
    //   v_j < 0, i <= M-1: v_j (f_{i+1} - f_i)/dx - (Theta f)_i = 0
    //   inflow rows pinned at i = 0 (v > 0) and i = M (v < 0)
    let mut diag: Vec<DMatrix<f64>> = Vec::with_capacity(m + 1);
    let mut sub: Vec<DMatrix<f64>> = Vec::with_capacity(m); // couples to slice i-1
    let mut sup: Vec<DMatrix<f64>> = Vec::with_capacity(m); // couples to slice i+1
    let mut rhs: Vec<DVector<f64>> = Vec::with_capacity(m + 1);

    for i in 0..=m {
        let th = theta(i);
        let mut d = DMatrix::<f64>::zeros(n, n);
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut c = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for j in 0..n {
            let v = vgrid.node(j);
            let pinned_left = i == 0 && v > 0.0;
            let pinned_right = i == m && v < 0.0;
            if pinned_left {
                d[(j, j)] = 1.0;
                b[j] = bd.f_l()[j - k];
            } else if pinned_right {
                d[(j, j)] = 1.0;
                // f_r is indexed by the positive counterpart p = K - 1 - j
                b[j] = bd.f_r()[k - 1 - j];
            } else if v > 0.0 {
                d[(j, j)] += v / dx;
                a[(j, j)] = -v / dx;
                for l in 0..n {
                    d[(j, l)] -= th[(j, l)];
                }
            } else {
                d[(j, j)] += -v / dx;
                c[(j, j)] = v / dx;
                for l in 0..n {
                    d[(j, l)] -= th[(j, l)];
                }
            }
        }
        diag.push(d);
        rhs.push(b);
        if i > 0 {
            sub.push(a);
        }
        if i < m {
            sup.push(c);
        }
    }

    // Block Thomas elimination.
    let mut gain: Vec<DMatrix<f64>> = Vec::with_capacity(m); // D~^{-1} C at each slice
    let mut carry: Vec<DVector<f64>> = Vec::with_capacity(m + 1); // D~^{-1} (b - A carry)
    let mut d_tilde = diag[0].clone();
    for i in 0..=m {
        if i > 0 {
            let a = &sub[i - 1];
            d_tilde = &diag[i] - a * &gain[i - 1];
        }
        let lu = d_tilde.clone().lu();
        let b_eff = if i > 0 {
            &rhs[i] - &sub[i - 1] * &carry[i - 1]
        } else {
            rhs[i].clone()
        };
        let h = lu.solve(&b_eff).ok_or_else(|| WignerError::IllPosed {
            message: format!("upwind block at slice {i} is singular"),
            condition: f64::INFINITY,
        })?;
        carry.push(h);
        if i < m {
            let g = lu.solve_mut_matrix(&sup[i]).ok_or_else(|| WignerError::IllPosed {
                message: format!("upwind block at slice {i} is singular"),
                condition: f64::INFINITY,
            })?;
            gain.push(g);
        }
    }
    let mut values: Vec<DVector<f64>> = vec![DVector::zeros(n); m + 1];
    values[m] = carry[m].clone();
    for i in (0..m).rev() {
        values[i] = &carry[i] - &gain[i] * &values[i + 1];
    }

    let slices: Vec<GridFunction> = values
        .into_iter()
        .map(|v| GridFunction::new(vgrid, v, ParityTag::None).unwrap())
        .collect();
    let mut orth_max = 0.0f64;
    for (i, s) in slices.iter().enumerate() {
        let odd = s.parity_project(Parity::Odd);
        orth_max =
            orth_max.max(orthogonality_residual(table, KernelTable::base_index(i), &odd).abs());
    }
    let provenance = make_provenance(
        SolveMode::DirectUpwind,
        sgrid,
        bd,
        &slices,
        orth_max,
        None,
        f64::INFINITY, // upwind dissipation makes inflow-residual flags meaningless here
    );
    Ok(SolutionField { slices, provenance })
}

trait LuSolveMatrix {
    fn solve_mut_matrix(&self, m: &DMatrix<f64>) -> Option<DMatrix<f64>>;
}

impl LuSolveMatrix for nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn> {
    fn solve_mut_matrix(&self, m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
        let mut out = m.clone();
        if self.solve_mut(&mut out) {
            Some(out)
        } else {
            None
        }
    }
}

/// Slice-wise and global comparison of two fields on the same grids.
#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    /// `||a - b|| / max(||a||, ||b||)` in the global field norm.
    pub global_rel_l2: f64,
    pub slice_rel_l2: Vec<f64>,
    pub j0_max_diff: f64,
    pub j1_max_diff: f64,
}

pub fn compare_fields(a: &SolutionField, b: &SolutionField, dx: f64) -> Result<CompareReport> {
    if a.slices.len() != b.slices.len() || a.vgrid() != b.vgrid() {
        return Err(WignerError::GridMismatch(
            "fields to compare live on different grids".into(),
        ));
    }
    let norm_a = a.norm(dx);
    let norm_b = b.norm(dx);
    let scale = norm_a.max(norm_b);
    let mut global_sq = 0.0;
    let mut slice_rel = Vec::with_capacity(a.slices.len());
    let mut j0_max = 0.0f64;
    let mut j1_max = 0.0f64;
    for (sa, sb) in a.slices.iter().zip(&b.slices) {
        let dv = sa.grid().dv();
        let diff_sq = (sa.values() - sb.values()).norm_squared() * dv;
        global_sq += dx * diff_sq;
        let local_scale = sa.l2_norm().max(sb.l2_norm());
        slice_rel.push(if local_scale == 0.0 {
            0.0
        } else {
            diff_sq.sqrt() / local_scale
        });
        j0_max = j0_max.max((sa.velocity_moment(0) - sb.velocity_moment(0)).abs());
        j1_max = j1_max.max((sa.velocity_moment(1) - sb.velocity_moment(1)).abs());
    }
    Ok(CompareReport {
        global_rel_l2: if scale == 0.0 {
            0.0
        } else {
            global_sq.sqrt() / scale
        },
        slice_rel_l2: slice_rel,
        j0_max_diff: j0_max,
        j1_max_diff: j1_max,
    })
}
