//! Adaptive Simpson quadrature.
//!
//! Used for the inverse-Fourier integral defining the Wigner kernel of
//! tabulated potentials, and as the independent oracle that certifies the
//! closed-form kernels and the moment identity in tests.

use crate::error::{Result, WignerError};

/// Integrate `f` over `[a, b]` with adaptive Simpson refinement until the
/// local error estimate is below `tol`.
const MAX_DEPTH: u32 = 40;
const MIN_SPLITS: u32 = 5;

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let (value, err) = step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH);
    if err > tol.max(1e-300) * 10.0 {
        return Err(WignerError::Numerical {
            message: format!("adaptive quadrature on [{a}, {b}] did not converge"),
            estimate: err,
        });
    }
    Ok(value)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    // Force the first few subdivisions: an integrand whose support misses
    // the initial sample points (e.g. a bump between coarse nodes) would
    // otherwise converge falsely to zero.
    let forced = depth > MAX_DEPTH - MIN_SPLITS;
    // Richardson: Simpson halving gains a factor 16.
    if depth == 0 || (!forced && delta.abs() <= 15.0 * tol) {
        (left + right + delta / 15.0, delta.abs() / 15.0)
    } else {
        let (lv, le) = step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
        let (rv, re) = step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        (lv + rv, le + re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let v = adaptive_simpson(&|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (4.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn integrates_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -10.0, 10.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn oscillatory_integrand() {
        // \int_0^pi sin(10 x) dx = (1 - cos(10 pi)) / 10 = 0
        let v = adaptive_simpson(&|x: f64| (10.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!(v.abs() < 1e-10);
    }
}
