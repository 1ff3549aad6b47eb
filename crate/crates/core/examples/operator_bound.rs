//! Probe the pseudo-differential operator bound ||A f|| <= sqrt(8) ||Vw||_{H1} ||f||
//! with seeded random even functions at several x-stations.

use wigner_parity::grid::{SpaceGrid, VelocityGrid};
use wigner_parity::kernel::KernelTable;
use wigner_parity::potential::PotentialSpec;
use wigner_parity::wigner_op::operator_bound_check;

fn main() {
    let spec = PotentialSpec::gaussian(1.0, 1.0).unwrap();
    let vgrid = VelocityGrid::new(64, 0.15).unwrap();
    let sgrid = SpaceGrid::new(10.0, 200).unwrap();
    let table = KernelTable::for_marching(&spec, vgrid, &sgrid, 3).unwrap();

    for q in 0..5 {
        let i = q * sgrid.steps() / 4;
        let report = operator_bound_check(&table, KernelTable::base_index(i), 100, 42).unwrap();
        println!("{}", serde_json::to_string(&report).unwrap());
    }
}
