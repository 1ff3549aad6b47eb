//! Certify the closed-form Gaussian Wigner kernel against the
//! inverse-Fourier quadrature and check the moment identity Vw_1 = -V'.

use wigner_parity::potential::PotentialSpec;

fn main() {
    let spec = PotentialSpec::gaussian(1.0, 1.0).unwrap();

    let mut max_err: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let x = -4.0 + 8.0 * i as f64 / 19.0;
            let v = -4.0 + 8.0 * j as f64 / 19.0;
            let closed = spec.kernel(x, v).unwrap();
            let quad = spec.kernel_quadrature(x, v, 40.0, 1e-12).unwrap();
            max_err = max_err.max((closed - quad).abs());
        }
    }
    println!("closed form vs quadrature on 20x20 probe: max |diff| = {max_err:.3e}");

    let x = 1.0;
    let moments = spec.kernel_moments(x, 5).unwrap();
    let v1_expected = -spec.eval(x, 1).unwrap();
    println!(
        "moment identity at x = {x}: Vw_1 = {:.12}, -V'(x) = {v1_expected:.12}",
        moments[0]
    );
    println!("higher odd moments: Vw_3 = {:.6e}, Vw_5 = {:.6e}", moments[1], moments[2]);
}
