//! Build the even propagator in both directions and verify that the
//! round trip is the identity; report condition estimates.

use wigner_parity::grid::{Parity, SpaceGrid, VelocityGrid};
use wigner_parity::kernel::KernelTable;
use wigner_parity::potential::PotentialSpec;
use wigner_parity::propagation::{build_propagator, Direction};

fn main() {
    let spec = PotentialSpec::gaussian(1.0, 1.0).unwrap();
    let vgrid = VelocityGrid::new(32, 0.25).unwrap();
    let sgrid = SpaceGrid::new(10.0, 200).unwrap();
    let table = KernelTable::for_marching(&spec, vgrid, &sgrid, 3).unwrap();

    for parity in [Parity::Even, Parity::Odd] {
        let fwd = build_propagator(&table, &sgrid, parity, Direction::LeftToRight).unwrap();
        let bwd = build_propagator(&table, &sgrid, parity, Direction::RightToLeft).unwrap();
        let k = vgrid.half_count();
        let round_trip = bwd.matrix() * fwd.matrix();
        let dev = (&round_trip - nalgebra::DMatrix::<f64>::identity(k, k))
            .singular_values()
            .max();
        println!(
            "{parity:?}: cond(fwd) = {:.3e}, cond(bwd) = {:.3e}, ||bwd*fwd - I|| = {:.3e}, ||fwd - I|| = {:.3e}",
            fwd.condition_estimate(),
            bwd.condition_estimate(),
            dev,
            fwd.identity_deviation(),
        );
    }
    println!("(even potential: both end-to-end maps should be close to the identity)");
}
