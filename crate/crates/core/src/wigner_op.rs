//! Discrete action of the pseudo-differential operators.
//!
//! `Theta` is a velocity convolution with the odd kernel `Vw(x, ·)`; on the
//! offset grid it is a Toeplitz matrix-vector product with kernel values at
//! integer multiples of `dv`. `B(x) = Theta / v` preserves parity, while
//! `Theta` flips it. `A(x)` subtracts the rank-one term
//! `(1/v) \int Vw(x, -v') f(v') dv'`, which vanishes on even functions, so
//! `A = B` on the even subspace; `A` is the operator the boundedness
//! estimate `||A f|| <= sqrt(8) ||Vw||_{H1} ||f||` applies to.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, WignerError};
use crate::grid::{GridFunction, ParityTag, VelocityGrid};
use crate::kernel::KernelTable;

fn check_grid(table: &KernelTable, f: &GridFunction) -> Result<()> {
    if f.grid() != table.vgrid() {
        return Err(WignerError::GridMismatch(
            "grid function does not live on the kernel table's velocity grid".into(),
        ));
    }
    Ok(())
}

/// `(Theta f)(v_j) = dv * sum_k Vw(x_i, v_j - v_k) f(v_k)`.
pub fn apply_theta(table: &KernelTable, x_index: usize, f: &GridFunction) -> Result<GridFunction> {
    check_grid(table, f)?;
    let n = f.grid().len();
    let dv = f.grid().dv();
    let mut out = nalgebra::DVector::zeros(n);
    for j in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            acc += table.offset_value(x_index, j as i64 - k as i64) * f.values()[k];
        }
        out[j] = dv * acc;
    }
    let tag = match f.parity_tag() {
        ParityTag::Even => ParityTag::Odd,
        ParityTag::Odd => ParityTag::Even,
        ParityTag::None => ParityTag::None,
    };
    GridFunction::new(*f.grid(), out, tag)
}

/// `(B(x) f)(v_j) = (Theta f)(v_j) / v_j`. The offset grid excludes `v = 0`.
pub fn apply_b(table: &KernelTable, x_index: usize, f: &GridFunction) -> Result<GridFunction> {
    let theta = apply_theta(table, x_index, f)?;
    let grid = *f.grid();
    let mut out = theta.values().clone();
    for (j, v) in grid.nodes().enumerate() {
        out[j] /= v;
    }
    GridFunction::new(grid, out, f.parity_tag())
}

/// Regularized operator:
/// `(A(x) f)(v) = \int (Vw(x, v - v') - Vw(x, -v')) / v * f(v') dv'`.
/// Identical to `B` on even `f` because the subtracted term integrates the
/// odd kernel against an even function.
pub fn apply_a(table: &KernelTable, x_index: usize, f: &GridFunction) -> Result<GridFunction> {
    check_grid(table, f)?;
    let grid = *f.grid();
    let dv = grid.dv();
    // c = dv * sum_k Vw(x, -v_k) f(v_k)
    let mut c = 0.0;
    for k in 0..grid.len() {
        c += table.node_value(x_index, grid.mirror(k)) * f.values()[k];
    }
    c *= dv;
    let b = apply_b(table, x_index, f)?;
    let mut out = b.values().clone();
    for (j, v) in grid.nodes().enumerate() {
        out[j] -= c / v;
    }
    GridFunction::new(grid, out, f.parity_tag())
}

/// Report from the desk-scale check of the even-subspace operator bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub x: f64,
    pub bound: f64,
    pub max_ratio: f64,
    pub trials: usize,
    pub seed: u64,
    pub pass: bool,
}

/// Tolerance absorbing the discretization of the continuum inequality.
pub const BOUND_CHECK_SLACK: f64 = 0.05;

/// Check `||A f|| / ||f|| <= sqrt(8) ||Vw(x, ·)||_{H1}` on seeded random
/// even grid functions.
pub fn operator_bound_check(
    table: &KernelTable,
    x_index: usize,
    trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    if trials == 0 {
        return Err(WignerError::validation("trials", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = *table.vgrid();
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let f = random_even_function(grid, &mut rng);
        let norm = f.l2_norm();
        if norm == 0.0 {
            continue;
        }
        let ratio = apply_a(table, x_index, &f)?.l2_norm() / norm;
        max_ratio = max_ratio.max(ratio);
    }
    let bound = 8f64.sqrt() * table.kernel_h1_norm(x_index);
    Ok(BoundReport {
        x: table.x(x_index),
        bound,
        max_ratio,
        trials,
        seed,
        pass: max_ratio <= bound * (1.0 + BOUND_CHECK_SLACK) + 1e-14,
    })
}

/// Seeded random even test function: a random even polynomial (degree <= 6)
/// under a Gaussian envelope, so it decays well inside the velocity window.
pub fn random_even_function(grid: VelocityGrid, rng: &mut impl Rng) -> GridFunction {
    let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    GridFunction::from_fn(grid, |v| {
        let v2 = v * v;
        (c[0] + c[1] * v2 + c[2] * v2 * v2 + c[3] * v2 * v2 * v2) * (-0.5 * v2).exp()
    })
    .with_tag(ParityTag::Even)
}

/// Seeded random odd test function under the same envelope.
pub fn random_odd_function(grid: VelocityGrid, rng: &mut impl Rng) -> GridFunction {
    let c: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    GridFunction::from_fn(grid, |v| {
        let v2 = v * v;
        v * (c[0] + c[1] * v2 + c[2] * v2 * v2) * (-0.5 * v2).exp()
    })
    .with_tag(ParityTag::Odd)
}
