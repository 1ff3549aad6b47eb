//! Potentials `V(x)`, the symbol difference `D_V`, the Wigner kernel
//! `Vw(x, v)` and its odd velocity moments.
//!
//! With the Fourier pair `F[f](y) = \int f(v) e^{-ivy} dv`,
//! `F^{-1}[g](v) = (1/2pi) \int g(y) e^{ivy} dy`, the kernel is
//!
//! ```text
//! Vw(x, v) = i F^{-1}_{y->v}[ V(x + y/2) - V(x - y/2) ]
//!          = -(1/pi) \int_0^inf D_V(x, y) sin(v y) dy
//! ```
//!
//! (the cosine part vanishes because `D_V` is odd in `y`). For the Gaussian
//! family `V(x) = A exp(-x^2/a)` this evaluates in closed form to
//! `A * 2 sqrt(a/pi) * exp(-a v^2) * sin(2 x v)`; the quadrature route stays
//! available as the independent oracle that certifies the closed form.
//!
//! The odd moments satisfy `Vw_n(x) = i^{n+1} V^(n)(x) / 2^{n-1}`, real for
//! odd `n`; even moments vanish because `Vw` is odd in `v`.

use crate::error::{Result, WignerError};
use crate::quad::adaptive_simpson;

/// Default relative tolerance for kernel quadrature.
pub const KERNEL_QUAD_TOL: f64 = 1e-11;

/// Analytic description of a potential with derivative access.
#[derive(Debug, Clone)]
pub enum PotentialSpec {
    Zero,
    Gaussian { amplitude: f64, width_a: f64 },
    Tabulated(CubicSpline),
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec::Zero
    }

    pub fn gaussian(amplitude: f64, width_a: f64) -> Result<Self> {
        if !(width_a > 0.0) || !width_a.is_finite() {
            return Err(WignerError::validation("potential.width_a", "must be positive"));
        }
        if !amplitude.is_finite() {
            return Err(WignerError::validation("potential.amplitude", "must be finite"));
        }
        Ok(PotentialSpec::Gaussian { amplitude, width_a })
    }

    /// Tabulated potential with cubic-spline interpolation. Sample abscissae
    /// must be strictly increasing; derivatives are available up to order 3.
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        Ok(PotentialSpec::Tabulated(CubicSpline::new(samples)?))
    }

    /// `V^(order)(x)`. Closed form for the zero and Gaussian families,
    /// spline derivatives (order <= 3) for tabulated potentials.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64> {
        match self {
            PotentialSpec::Zero => Ok(0.0),
            PotentialSpec::Gaussian { amplitude, width_a } => {
                Ok(gaussian_derivative(*amplitude, *width_a, x, order))
            }
            PotentialSpec::Tabulated(spline) => spline.eval(x, order),
        }
    }

    /// `D_V(x, y) = V(x + y/2) - V(x - y/2)`.
    pub fn difference(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.eval(x + 0.5 * y, 0)? - self.eval(x - 0.5 * y, 0)?)
    }

    /// The Wigner kernel `Vw(x, v)`: closed form for zero/Gaussian, numerical
    /// inverse-Fourier quadrature for tabulated potentials.
    pub fn kernel(&self, x: f64, v: f64) -> Result<f64> {
        match self {
            PotentialSpec::Zero => Ok(0.0),
            PotentialSpec::Gaussian { amplitude, width_a } => {
                let a = *width_a;
                Ok(amplitude * 2.0 * (a / std::f64::consts::PI).sqrt()
                    * (-a * v * v).exp()
                    * (2.0 * x * v).sin())
            }
            PotentialSpec::Tabulated(spline) => {
                let y_max = spline.symmetric_reach(x)?;
                self.kernel_quadrature(x, v, y_max, KERNEL_QUAD_TOL)
            }
        }
    }

    /// Quadrature evaluation of the kernel, `-(1/pi) \int_0^{y_max} D_V sin(vy) dy`.
    /// Works for every family; for zero/Gaussian it is the oracle the closed
    /// forms are checked against.
    pub fn kernel_quadrature(&self, x: f64, v: f64, y_max: f64, tol: f64) -> Result<f64> {
        if !(y_max > 0.0) {
            return Err(WignerError::Domain(format!(
                "kernel quadrature reach {y_max} at x = {x} is not positive"
            )));
        }
        let integrand = |y: f64| {
            let d = self.difference(x, y).unwrap_or(f64::NAN);
            d * (v * y).sin()
        };
        let integral = adaptive_simpson(&integrand, 0.0, y_max, tol)?;
        if !integral.is_finite() {
            return Err(WignerError::Numerical {
                message: format!("kernel quadrature hit an unevaluable point at x = {x}"),
                estimate: f64::INFINITY,
            });
        }
        Ok(-integral / std::f64::consts::PI)
    }

    /// `d/dv Vw(x, v)`: analytic for zero/Gaussian, 4th-order central
    /// differences (step 1e-3) for tabulated potentials.
    pub fn kernel_dv(&self, x: f64, v: f64) -> Result<f64> {
        match self {
            PotentialSpec::Zero => Ok(0.0),
            PotentialSpec::Gaussian { amplitude, width_a } => {
                let a = *width_a;
                let envelope = amplitude * 2.0 * (a / std::f64::consts::PI).sqrt() * (-a * v * v).exp();
                Ok(envelope * (2.0 * x * (2.0 * x * v).cos() - 2.0 * a * v * (2.0 * x * v).sin()))
            }
            PotentialSpec::Tabulated(_) => {
                let h = 1e-3;
                let f = |w: f64| self.kernel(x, w);
                Ok((-f(v + 2.0 * h)? + 8.0 * f(v + h)? - 8.0 * f(v - h)? + f(v - 2.0 * h)?)
                    / (12.0 * h))
            }
        }
    }

    /// Odd kernel moments `[Vw_1(x), Vw_3(x), ..., Vw_max(x)]` via the
    /// derivative identity `Vw_n = i^{n+1} V^(n)(x) / 2^{n-1}`
    /// (= `(-1)^{(n+1)/2} V^(n)(x) / 2^{n-1}` for odd `n`).
    pub fn kernel_moments(&self, x: f64, max_order: usize) -> Result<Vec<f64>> {
        if max_order % 2 == 0 || max_order == 0 {
            return Err(WignerError::validation(
                "max_order",
                "kernel moments are defined for odd orders >= 1",
            ));
        }
        let mut out = Vec::with_capacity(max_order.div_ceil(2));
        let mut n = 1usize;
        while n <= max_order {
            let sign = if ((n + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let value = sign * self.eval(x, n)? / 2f64.powi(n as i32 - 1);
            out.push(value);
            n += 2;
        }
        Ok(out)
    }

    /// Largest derivative order available.
    pub fn max_derivative_order(&self) -> usize {
        match self {
            PotentialSpec::Tabulated(_) => 3,
            _ => usize::MAX,
        }
    }

    /// Whether the potential is even in `x` (checked by sampling for the
    /// tabulated family).
    pub fn is_even(&self, half_length: f64) -> bool {
        match self {
            PotentialSpec::Zero | PotentialSpec::Gaussian { .. } => true,
            PotentialSpec::Tabulated(_) => {
                let samples = 33;
                (0..=samples).all(|i| {
                    let x = half_length * i as f64 / samples as f64;
                    match (self.eval(x, 0), self.eval(-x, 0)) {
                        (Ok(a), Ok(b)) => (a - b).abs() <= 1e-10 * (1.0 + a.abs()),
                        _ => false,
                    }
                })
            }
        }
    }
}

/// `V^(n)` of `A exp(-x^2/a)` via the Hermite recurrence:
/// `d^n/dx^n e^{-x^2/a} = (-1)^n a^{-n/2} H_n(x/sqrt(a)) e^{-x^2/a}`.
fn gaussian_derivative(amplitude: f64, a: f64, x: f64, order: usize) -> f64 {
    let xi = x / a.sqrt();
    let h = hermite(order, xi);
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    amplitude * sign * a.powf(-(order as f64) / 2.0) * h * (-x * x / a).exp()
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut h0 = 1.0;
    if n == 0 {
        return h0;
    }
    let mut h1 = 2.0 * x;
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Natural cubic spline through strictly increasing samples.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(WignerError::validation(
                "potential.samples",
                "need at least 4 samples for cubic interpolation",
            ));
        }
        if !samples.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(WignerError::validation(
                "potential.samples",
                "abscissae must be strictly increasing",
            ));
        }
        let n = samples.len();
        let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();

        // Tridiagonal solve for natural boundary conditions (m_0 = m_{n-1} = 0).
        let mut m = vec![0.0; n];
        let mut c_prime = vec![0.0; n];
        let mut d_prime = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let rhs = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c_prime[i - 1];
            c_prime[i] = h1 / diag;
            d_prime[i] = (rhs - h0 * d_prime[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d_prime[i] - c_prime[i] * m[i + 1];
        }
        Ok(CubicSpline { xs, ys, m })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// Maximum `y` such that `x ± y/2` stays inside the table.
    fn symmetric_reach(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        let reach = 2.0 * (x - lo).min(hi - x);
        if reach <= 0.0 {
            return Err(WignerError::Domain(format!(
                "x = {x} is outside the tabulated range [{lo}, {hi}]"
            )));
        }
        Ok(reach)
    }

    pub fn eval(&self, x: f64, order: usize) -> Result<f64> {
        let (lo, hi) = self.range();
        if x < lo || x > hi {
            return Err(WignerError::Domain(format!(
                "x = {x} is outside the tabulated range [{lo}, {hi}]"
            )));
        }
        if order > 3 {
            return Err(WignerError::Capability(format!(
                "tabulated potentials support derivatives up to order 3, requested {order}"
            )));
        }
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t0 = self.xs[i + 1] - x;
        let t1 = x - self.xs[i];
        let (ma, mb) = (self.m[i], self.m[i + 1]);
        let (ya, yb) = (self.ys[i], self.ys[i + 1]);
        Ok(match order {
            0 => {
                ma * t0.powi(3) / (6.0 * h)
                    + mb * t1.powi(3) / (6.0 * h)
                    + (ya / h - ma * h / 6.0) * t0
                    + (yb / h - mb * h / 6.0) * t1
            }
            1 => {
                -ma * t0.powi(2) / (2.0 * h) + mb * t1.powi(2) / (2.0 * h)
                    - (ya / h - ma * h / 6.0)
                    + (yb / h - mb * h / 6.0)
            }
            2 => (ma * t0 + mb * t1) / h,
            _ => (mb - ma) / h,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gaussian() -> PotentialSpec {
        PotentialSpec::gaussian(1.0, 1.0).unwrap()
    }

    #[test]
    fn gaussian_peak_and_derivatives() {
        let g = unit_gaussian();
        assert_eq!(g.eval(0.0, 0).unwrap(), 1.0);
        assert_eq!(g.eval(0.0, 1).unwrap(), 0.0);
        // V'(x) = -2x/a V
        let x = 0.7;
        let v = g.eval(x, 0).unwrap();
        assert!((g.eval(x, 1).unwrap() + 2.0 * x * v).abs() < 1e-14);
        // high-order derivative against central differences
        let h = 1e-3;
        let fd = (g.eval(x + h, 2).unwrap() - g.eval(x - h, 2).unwrap()) / (2.0 * h);
        // central-difference truncation error ~ V^(5) h^2 / 6 ~ 4e-6 here
        assert!((g.eval(x, 3).unwrap() - fd).abs() < 1e-5);
    }

    #[test]
    fn zero_family() {
        let z = PotentialSpec::zero();
        assert_eq!(z.eval(1.3, 0).unwrap(), 0.0);
        assert_eq!(z.kernel(0.4, 2.0).unwrap(), 0.0);
        assert!(z.kernel_moments(1.0, 7).unwrap().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn difference_examples() {
        let g = unit_gaussian();
        assert_eq!(g.difference(1.2, 0.0).unwrap(), 0.0);
        // even potential makes D_V(0, y) = 0
        assert_eq!(g.difference(0.0, 3.1).unwrap(), 0.0);
        let expect = (-4.0f64).exp() - 1.0;
        assert!((g.difference(1.0, 2.0).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn closed_form_kernel_matches_quadrature() {
        let g = unit_gaussian();
        // closed form evaluated by hand at (x, v) = (1, 1)
        let expect = 2.0 * (1.0 / std::f64::consts::PI).sqrt() * (-1.0f64).exp() * 2.0f64.sin();
        assert!((g.kernel(1.0, 1.0).unwrap() - expect).abs() < 1e-15);
        let quad = g.kernel_quadrature(1.0, 1.0, 40.0, 1e-12).unwrap();
        assert!((g.kernel(1.0, 1.0).unwrap() - quad).abs() < 1e-10);
        // x = 0 kills the kernel
        assert_eq!(g.kernel(0.0, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn kernel_odd_in_v_and_x() {
        let g = PotentialSpec::gaussian(0.7, 2.0).unwrap();
        for &(x, v) in &[(0.5, 0.3), (1.5, 2.0), (-0.8, 1.1)] {
            let k = g.kernel(x, v).unwrap();
            assert!((g.kernel(x, -v).unwrap() + k).abs() <= 1e-12 * (1.0 + k.abs()));
            assert!((g.kernel(-x, v).unwrap() + k).abs() <= 1e-12 * (1.0 + k.abs()));
        }
    }

    #[test]
    fn moment_identity_against_velocity_quadrature() {
        let g = unit_gaussian();
        let x = 1.0;
        let moments = g.kernel_moments(x, 3).unwrap();
        // Vw_1 = -V'(x) = (2x/a) e^{-x^2/a}
        assert!((moments[0] - 2.0 * x * (-x * x).exp()).abs() < 1e-14);
        for (i, &n) in [1u32, 3].iter().enumerate() {
            let quad = adaptive_simpson(
                &|v: f64| v.powi(n as i32) * g.kernel(x, v).unwrap(),
                -12.0,
                12.0,
                1e-12,
            )
            .unwrap();
            assert!(
                (moments[i] - quad).abs() < 1e-8,
                "moment {n}: identity {} vs quadrature {quad}",
                moments[i]
            );
        }
    }

    #[test]
    fn even_moments_vanish_by_quadrature() {
        let g = unit_gaussian();
        for n in [0i32, 2, 4] {
            let quad = adaptive_simpson(
                &|v: f64| v.powi(n) * g.kernel(1.0, v).unwrap(),
                -12.0,
                12.0,
                1e-12,
            )
            .unwrap();
            assert!(quad.abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_dv_matches_finite_difference() {
        let g = PotentialSpec::gaussian(1.3, 0.8).unwrap();
        let (x, v) = (0.9, 1.4);
        let h = 1e-5;
        let fd = (g.kernel(x, v + h).unwrap() - g.kernel(x, v - h).unwrap()) / (2.0 * h);
        assert!((g.kernel_dv(x, v).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn moment_order_contract() {
        let g = unit_gaussian();
        assert!(g.kernel_moments(1.0, 2).is_err());
        assert!(g.kernel_moments(1.0, 0).is_err());
        assert_eq!(g.kernel_moments(1.0, 7).unwrap().len(), 4);
    }

    #[test]
    fn tabulated_tracks_gaussian() {
        let g = unit_gaussian();
        let samples: Vec<(f64, f64)> = (0..=800)
            .map(|i| {
                let x = -20.0 + 40.0 * i as f64 / 800.0;
                (x, g.eval(x, 0).unwrap())
            })
            .collect();
        let t = PotentialSpec::tabulated(samples).unwrap();
        assert!((t.eval(0.9, 0).unwrap() - g.eval(0.9, 0).unwrap()).abs() < 1e-6);
        assert!((t.eval(0.9, 1).unwrap() - g.eval(0.9, 1).unwrap()).abs() < 1e-4);
        assert!(t.eval(25.0, 0).is_err());
        assert!(t.eval(0.9, 4).is_err());
        // quadrature kernel close to the closed form of the underlying gaussian
        let k = t.kernel(1.0, 1.0).unwrap();
        assert!((k - g.kernel(1.0, 1.0).unwrap()).abs() < 1e-5);
        assert!(t.is_even(5.0));
    }
}
