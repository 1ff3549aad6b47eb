//! Cross-validate the parity-decomposition pipeline against the
//! independent first-order upwind discretization.

use wigner_parity::bvp::{solve_bvp, BoundaryData, SolveMode};
use wigner_parity::grid::{SpaceGrid, VelocityGrid};
use wigner_parity::kernel::KernelTable;
use wigner_parity::oracle::{compare_fields, solve_direct};
use wigner_parity::potential::PotentialSpec;

fn main() {
    let spec = PotentialSpec::gaussian(1.0, 1.0).unwrap();
    let vgrid = VelocityGrid::new(64, 0.15).unwrap();
    let sgrid = SpaceGrid::new(10.0, 200).unwrap();
    let table = KernelTable::for_marching(&spec, vgrid, &sgrid, 3).unwrap();
    let bd = BoundaryData::from_fns(vgrid, |v| (-0.5 * v * v).exp(), |_| 0.0).unwrap();

    let pipeline = solve_bvp(&table, &sgrid, &bd, SolveMode::General, &spec).unwrap();
    let direct = solve_direct(&table, &sgrid, &bd).unwrap();
    let report = compare_fields(&pipeline, &direct, sgrid.dx()).unwrap();

    println!("global relative L2 difference: {:.4e}", report.global_rel_l2);
    println!("max |J_0 difference|: {:.4e}", report.j0_max_diff);
    println!("max |J_1 difference|: {:.4e}", report.j1_max_diff);
    println!(
        "oracle current drift (upwind dissipation): {:.3e}",
        direct.provenance.residuals.current_drift
    );
}
