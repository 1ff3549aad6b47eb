//! Solve the full inflow BVP for a unit Gaussian barrier with a one-sided
//! Maxwellian inflow and write all artifacts to ./out/gaussian-barrier.

use wigner_parity::cli::{preset_config, run};

fn main() {
    let config = preset_config("gaussian-barrier", "out/gaussian-barrier").unwrap();
    let artifacts = run(&config).unwrap();
    let p = &artifacts.field.provenance;
    println!("wrote artifacts to {}", artifacts.output_dir.display());
    println!("inflow residuals: left {:.3e}, right {:.3e}", p.residuals.inflow_left, p.residuals.inflow_right);
    println!("current drift:    {:.3e}", p.residuals.current_drift);
    println!("orthogonality:    {:.3e}", p.residuals.orthogonality_max);
    if let Some(c) = p.assembly_condition {
        println!("assembly condition estimate: {c:.3e}");
    }
}
