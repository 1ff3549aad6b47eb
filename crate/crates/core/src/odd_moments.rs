//! The closed odd-moment hierarchy and moment-space transfer maps.
//!
//! For an odd solution, the odd moments `J_n(x) = \int v^n f dv` obey the
//! lower-triangular ODE system
//!
//! ```text
//! dJ_n/dx = sum_{k = 1,3,...,n-2} binom(n-1, k) Vw_k(x) J_{n-1-k}(x),
//! n = 1, 3, 5, ...
//! ```
//!
//! `J_1` is constant and each `J_n` is driven only by strictly lower odd
//! moments, so the end-to-end map on a truncated moment vector is unit lower
//! triangular. The system is integrated with RK4 on internal substeps small
//! enough that the quadrature error is negligible next to every tolerance
//! the hierarchy is checked against.
//!
//! The truncated Hermite reconstruction turns a moment vector back into an
//! odd grid function. Finitely many moments never determine the function;
//! the reconstruction is an explicitly labelled representative (the minimal
//! odd-Hermite basis matching the given moments), not *the* solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, WignerError};
use crate::grid::{GridFunction, SpaceGrid, VelocityGrid};
use crate::potential::{hermite, PotentialSpec};
use crate::propagation::Direction;

/// Truncated odd moments `[J_1, J_3, ..., J_{2N-1}]` at one position.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub x: f64,
    pub values: Vec<f64>,
}

impl MomentVector {
    pub fn new(x: f64, values: Vec<f64>) -> Self {
        MomentVector { x, values }
    }

    pub fn zeros(x: f64, order: usize) -> Self {
        MomentVector {
            x,
            values: vec![0.0; order],
        }
    }

    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Moments of a grid function, `[J_1, J_3, ..., J_{2N-1}]`.
    pub fn of(f: &GridFunction, order: usize, x: f64) -> Self {
        MomentVector {
            x,
            values: (0..order)
                .map(|m| f.velocity_moment(2 * m as u32 + 1))
                .collect(),
        }
    }
}

/// Internal RK4 substep ceiling; small enough that the hierarchy integration
/// error sits well below 1e-10 on desk-scale domains.
const MAX_SUBSTEP: f64 = 2.5e-4;

fn binom(m: usize, n: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    let mut acc = 1.0;
    for i in 0..n {
        acc = acc * (m - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// RHS of the hierarchy at one x. `moments` holds `Vw_1, Vw_3, ...`.
fn hierarchy_rhs(kernel_moments: &[f64], j: &DVector<f64>, sign: f64) -> DVector<f64> {
    let n_count = j.len();
    let mut out = DVector::zeros(n_count);
    for idx in 0..n_count {
        let n = 2 * idx + 1;
        let mut acc = 0.0;
        let mut k = 1usize;
        while k + 2 <= n {
            // k = 1, 3, ..., n - 2; J index of order n-1-k is (n-1-k-1)/2
            let j_idx = (n - 2 - k) / 2;
            let vw_idx = (k - 1) / 2;
            acc += binom(n - 1, k) * kernel_moments[vw_idx] * j[j_idx];
            k += 2;
        }
        out[idx] = sign * acc;
    }
    out
}

fn required_kernel_order(n_moments: usize) -> usize {
    // highest coupling order is k = (2N - 1) - 2
    if n_moments >= 2 {
        2 * n_moments - 3
    } else {
        1
    }
}

/// Solve the moment hierarchy across the space grid.
///
/// Returns one [`MomentVector`] per space node in ascending-x order. For
/// `LeftToRight` the initial data is taken at `-l/2`, for `RightToLeft` at
/// `+l/2` (the reverse march integrates the sign-flipped system).
pub fn solve_hierarchy(
    spec: &PotentialSpec,
    sgrid: &SpaceGrid,
    initial: &MomentVector,
    direction: Direction,
) -> Result<Vec<MomentVector>> {
    let n = initial.order();
    if n == 0 {
        return Err(WignerError::validation("moments.order", "must be >= 1"));
    }
    let kernel_order = required_kernel_order(n);
    if kernel_order > spec.max_derivative_order() {
        return Err(WignerError::Capability(format!(
            "hierarchy order {n} needs kernel moments up to {kernel_order}, beyond this potential's smoothness"
        )));
    }
    let m = sgrid.steps();
    let substeps = (sgrid.dx() / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let h_abs = sgrid.dx() / substeps as f64;
    let (start, h) = match direction {
        Direction::LeftToRight => (0usize, h_abs),
        Direction::RightToLeft => (m, -h_abs),
    };
    let vw = |x: f64| spec.kernel_moments(x, kernel_order);

    let mut out: Vec<Option<MomentVector>> = vec![None; m + 1];
    let mut j = DVector::from_vec(initial.values.clone());
    out[start] = Some(MomentVector::new(sgrid.node(start), j.as_slice().to_vec()));
    for step in 0..m {
        let next_i = match direction {
            Direction::LeftToRight => start + step + 1,
            Direction::RightToLeft => start - step - 1,
        };
        let x0 = match direction {
            Direction::LeftToRight => sgrid.node(start + step),
            Direction::RightToLeft => sgrid.node(start - step),
        };
        for sub in 0..substeps {
            let xa = x0 + h * sub as f64;
            let vwa = vw(xa)?;
            let vwh = vw(xa + 0.5 * h)?;
            let vwb = vw(xa + h)?;
            let k1 = hierarchy_rhs(&vwa, &j, 1.0);
            let k2 = hierarchy_rhs(&vwh, &(&j + 0.5 * h * &k1), 1.0);
            let k3 = hierarchy_rhs(&vwh, &(&j + 0.5 * h * &k2), 1.0);
            let k4 = hierarchy_rhs(&vwb, &(&j + h * &k3), 1.0);
            j += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out[next_i] = Some(MomentVector::new(sgrid.node(next_i), j.as_slice().to_vec()));
    }
    Ok(out.into_iter().map(|v| v.unwrap()).collect())
}

/// End-to-end moment-space transfer map: column `m` is the hierarchy
/// solution started from the `m`-th unit moment vector. Unit lower
/// triangular by the structure of the hierarchy.
pub fn build_moment_q(
    spec: &PotentialSpec,
    sgrid: &SpaceGrid,
    order: usize,
    direction: Direction,
) -> Result<DMatrix<f64>> {
    let mut q = DMatrix::zeros(order, order);
    for col in 0..order {
        let mut init = MomentVector::zeros(0.0, order);
        init.values[col] = 1.0;
        let trajectory = solve_hierarchy(spec, sgrid, &init, direction)?;
        let end = match direction {
            Direction::LeftToRight => trajectory.last().unwrap(),
            Direction::RightToLeft => trajectory.first().unwrap(),
        };
        for row in 0..order {
            q[(row, col)] = end.values[row];
        }
    }
    Ok(q)
}

/// Reconstruct an odd grid function matching the given truncated moments:
/// `g(v) = sum_m c_m H_{2m-1}(v) exp(-v^2/2)` with the coefficients solving
/// the N x N moment-matching system. A non-unique finite-order
/// representative by construction.
pub fn reconstruct_odd(moments: &MomentVector, vgrid: VelocityGrid) -> Result<GridFunction> {
    let n = moments.order();
    if n == 0 {
        return Err(WignerError::validation("moments.order", "must be >= 1"));
    }
    let basis: Vec<GridFunction> = (1..=n)
        .map(|m| {
            GridFunction::from_fn(vgrid, |v| hermite(2 * m - 1, v) * (-0.5 * v * v).exp())
        })
        .collect();
    let a = DMatrix::from_fn(n, n, |row, col| {
        basis[col].velocity_moment(2 * row as u32 + 1)
    });
    let sv = a.clone().singular_values();
    let condition = if sv.min() == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / sv.min()
    };
    if condition > 1e12 {
        return Err(WignerError::IllPosed {
            message: format!(
                "moment-matching system for N = {n} is numerically singular; use a smaller moment order"
            ),
            condition,
        });
    }
    let rhs = DVector::from_vec(moments.values.clone());
    let c = a.lu().solve(&rhs).ok_or(WignerError::IllPosed {
        message: "moment-matching system did not factor".into(),
        condition,
    })?;
    let mut values = nalgebra::DVector::zeros(vgrid.len());
    for (m, phi) in basis.iter().enumerate() {
        values += c[m] * phi.values();
    }
    GridFunction::new(vgrid, values, crate::grid::ParityTag::Odd)
}

/// Per-x residual of the orthogonality condition
/// `\int Vw(x, v) f_o(x, v) dv = 0`, the necessary condition for the odd
/// part to stay square integrable. Reported as a diagnostic, never enforced.
pub fn orthogonality_residual(
    table: &crate::kernel::KernelTable,
    x_index: usize,
    f: &GridFunction,
) -> f64 {
    let dv = f.grid().dv();
    let mut acc = 0.0;
    for j in 0..f.grid().len() {
        acc += table.node_value(x_index, j) * f.values()[j];
    }
    dv * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Parity, ParityTag};
    use crate::kernel::KernelTable;
    use crate::propagation::march_ivp;

    fn gaussian() -> PotentialSpec {
        PotentialSpec::gaussian(1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let sgrid = SpaceGrid::new(10.0, 50).unwrap();
        let traj = solve_hierarchy(
            &gaussian(),
            &sgrid,
            &MomentVector::zeros(sgrid.left(), 4),
            Direction::LeftToRight,
        )
        .unwrap();
        assert!(traj.iter().all(|m| m.values.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn j1_is_exactly_constant() {
        let sgrid = SpaceGrid::new(10.0, 40).unwrap();
        let init = MomentVector::new(sgrid.left(), vec![1.7, 0.2, -0.4]);
        let traj = solve_hierarchy(&gaussian(), &sgrid, &init, Direction::LeftToRight).unwrap();
        for m in &traj {
            assert_eq!(m.values[0], 1.7);
        }
    }

    #[test]
    fn j3_closed_form() {
        // dJ_3/dx = 2 J_1 Vw_1 with Vw_1 = -V' gives
        // J_3(x) = J_3(-l/2) + 2 (V(-l/2) - V(x))
        let spec = gaussian();
        let sgrid = SpaceGrid::new(10.0, 200).unwrap();
        let init = MomentVector::new(sgrid.left(), vec![1.0, 0.0]);
        let traj = solve_hierarchy(&spec, &sgrid, &init, Direction::LeftToRight).unwrap();
        let v_left = spec.eval(sgrid.left(), 0).unwrap();
        for (i, m) in traj.iter().enumerate() {
            let expect = 2.0 * (v_left - spec.eval(sgrid.node(i), 0).unwrap());
            assert!(
                (m.values[1] - expect).abs() <= 1e-10,
                "node {i}: {} vs {}",
                m.values[1],
                expect
            );
        }
    }

    #[test]
    fn lower_triangular_structure() {
        // perturbing J_{n0} at the start must not change any lower moment
        let sgrid = SpaceGrid::new(10.0, 30).unwrap();
        let base = MomentVector::new(sgrid.left(), vec![0.3, -0.8, 0.5, 0.1]);
        let traj = solve_hierarchy(&gaussian(), &sgrid, &base, Direction::LeftToRight).unwrap();
        let mut perturbed = base.clone();
        perturbed.values[2] += 10.0;
        let traj_p =
            solve_hierarchy(&gaussian(), &sgrid, &perturbed, Direction::LeftToRight).unwrap();
        for (a, b) in traj.iter().zip(&traj_p) {
            assert_eq!(a.values[0], b.values[0]);
            assert_eq!(a.values[1], b.values[1]);
            assert!(a.values[3] != b.values[3] || a.x == sgrid.left());
        }
    }

    #[test]
    fn moment_q_shape_and_inverse() {
        let spec = PotentialSpec::tabulated(
            (0..=400)
                .map(|i| {
                    let x = -8.0 + 16.0 * i as f64 / 400.0;
                    (x, 0.5 * x + 0.1 * x * x) // not even in x
                })
                .collect(),
        )
        .unwrap();
        let sgrid = SpaceGrid::new(10.0, 20).unwrap();
        let n = 3; // capped by tabulated smoothness
        let q_lr = build_moment_q(&spec, &sgrid, n, Direction::LeftToRight).unwrap();
        let q_rl = build_moment_q(&spec, &sgrid, n, Direction::RightToLeft).unwrap();
        for row in 0..n {
            assert!((q_lr[(row, row)] - 1.0).abs() <= 1e-14);
            for col in row + 1..n {
                assert!(q_lr[(row, col)].abs() <= 1e-14);
            }
        }
        let prod = &q_lr * &q_rl;
        let dev = (&prod - DMatrix::<f64>::identity(n, n)).norm();
        assert!(dev <= 1e-10, "Q_lr Q_rl deviates from I by {dev}");
    }

    #[test]
    fn even_potential_gives_identity_q_and_even_moments() {
        let sgrid = SpaceGrid::new(10.0, 20).unwrap();
        let q = build_moment_q(&gaussian(), &sgrid, 5, Direction::LeftToRight).unwrap();
        let dev = (&q - DMatrix::<f64>::identity(5, 5)).norm();
        assert!(dev <= 1e-10, "Q deviates from identity by {dev}");
        // J_n(-x) = J_n(x) along the solution
        let sgrid = SpaceGrid::new(10.0, 40).unwrap();
        let init = MomentVector::new(sgrid.left(), vec![1.0, -0.3, 0.6]);
        let traj = solve_hierarchy(&gaussian(), &sgrid, &init, Direction::LeftToRight).unwrap();
        for i in 0..=sgrid.steps() {
            let mirror = sgrid.steps() - i;
            for (a, b) in traj[i].values.iter().zip(&traj[mirror].values) {
                assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
            }
        }
    }

    #[test]
    fn hierarchy_matches_grid_marched_moments() {
        let spec = gaussian();
        let vgrid = VelocityGrid::new(64, 0.15).unwrap();
        let sgrid = SpaceGrid::new(10.0, 200).unwrap();
        let table = KernelTable::for_marching(&spec, vgrid, &sgrid, 7).unwrap();
        let f0 = GridFunction::from_fn(vgrid, |v| v * (-0.5 * v * v).exp()).with_tag(ParityTag::Odd);
        let slices = march_ivp(&table, &sgrid, &f0, Parity::Odd, Direction::LeftToRight).unwrap();
        let init = MomentVector::of(&f0, 3, sgrid.left());
        let traj = solve_hierarchy(&spec, &sgrid, &init, Direction::LeftToRight).unwrap();
        for (slice, m) in slices.iter().zip(&traj) {
            for idx in 0..3 {
                let grid_moment = slice.velocity_moment(2 * idx as u32 + 1);
                let expect = m.values[idx];
                assert!(
                    (grid_moment - expect).abs() <= 1e-4 * (1.0 + expect.abs()),
                    "J_{} at x = {}: {} vs {}",
                    2 * idx + 1,
                    m.x,
                    grid_moment,
                    expect
                );
            }
        }
    }

    #[test]
    fn reconstruct_round_trips() {
        let vgrid = VelocityGrid::new(64, 0.15).unwrap();
        // all moments zero -> zero function
        let zero = reconstruct_odd(&MomentVector::zeros(0.0, 3), vgrid).unwrap();
        assert_eq!(zero.l2_norm(), 0.0);
        // f = v e^{-v^2/2} lies in the basis span
        let f = GridFunction::from_fn(vgrid, |v| v * (-0.5 * v * v).exp());
        for n in 1..=4 {
            let m = MomentVector::of(&f, n, 0.0);
            let rec = reconstruct_odd(&m, vgrid).unwrap();
            assert!(
                (rec.values() - f.values()).amax() <= 1e-8,
                "N = {n} reconstruction error"
            );
        }
        // moment round trip for v^3 e^{-v^2/2}
        let g = GridFunction::from_fn(vgrid, |v| v.powi(3) * (-0.5 * v * v).exp());
        let m = MomentVector::of(&g, 3, 0.0);
        let rec = reconstruct_odd(&m, vgrid).unwrap();
        for idx in 0..3 {
            let n = 2 * idx as u32 + 1;
            assert!((rec.velocity_moment(n) - m.values[idx]).abs() <= 1e-9);
        }
    }

    #[test]
    fn tabulated_order_cap_is_enforced() {
        let spec = PotentialSpec::tabulated(
            (0..=100).map(|i| (i as f64 * 0.2 - 10.0, 0.0)).collect(),
        )
        .unwrap();
        let sgrid = SpaceGrid::new(10.0, 10).unwrap();
        let init = MomentVector::zeros(sgrid.left(), 4); // needs Vw_5
        assert!(matches!(
            solve_hierarchy(&spec, &sgrid, &init, Direction::LeftToRight),
            Err(WignerError::Capability(_))
        ));
    }
}
