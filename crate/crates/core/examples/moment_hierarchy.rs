//! Integrate the closed odd-moment hierarchy and check its structural
//! identities: J_1 is constant and J_3 follows its closed form.

use wigner_parity::grid::SpaceGrid;
use wigner_parity::odd_moments::{build_moment_q, solve_hierarchy, MomentVector};
use wigner_parity::potential::PotentialSpec;
use wigner_parity::propagation::Direction;

fn main() {
    let spec = PotentialSpec::gaussian(1.0, 1.0).unwrap();
    let sgrid = SpaceGrid::new(10.0, 200).unwrap();
    let n = 8;

    let initial = MomentVector::new(sgrid.left(), (0..n).map(|m| 1.0 / (1.0 + m as f64)).collect());
    let trajectory = solve_hierarchy(&spec, &sgrid, &initial, Direction::LeftToRight).unwrap();

    let j1_drift = trajectory
        .iter()
        .map(|mv| (mv.values[0] - initial.values[0]).abs())
        .fold(0.0f64, f64::max);
    println!("max |J_1(x) - J_1(-l/2)| = {j1_drift:.3e}  (should be ~0)");

    let j3_err = trajectory
        .iter()
        .map(|mv| {
            let closed = initial.values[1]
                + 2.0 * (spec.eval(sgrid.left(), 0).unwrap() - spec.eval(mv.x, 0).unwrap());
            (mv.values[1] - closed).abs()
        })
        .fold(0.0f64, f64::max);
    println!("max |J_3(x) - closed form| = {j3_err:.3e}");

    let q = build_moment_q(&spec, &sgrid, n, Direction::LeftToRight).unwrap();
    let dev = (&q - nalgebra::DMatrix::<f64>::identity(n, n)).abs().max();
    println!("even potential: ||Q_lr - I||_max = {dev:.3e}  (end-to-end moment map)");
}
