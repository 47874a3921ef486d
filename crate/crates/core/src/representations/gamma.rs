//! Gamma(α, 1) law as a Poisson integral: `Y = Σ_{s ∈ N} s` with
//! `n(dy) = α e^{-y} y^{-1} dy` on `(0, ∞)`.
//!
//! The sampling measure is `n⁽¹⁾(dy) = e^{-y} dy`, so `g(y) = y/α` and the
//! ladder keeps a point iff `y ≤ α/Γ`.

use num_complex::Complex64;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::prm::{LevyRepresentation, PointFn};
use crate::quadrature::{integrate_complex, QuadratureOptions};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaRep {
    pub alpha: f64,
}

impl GammaRep {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma shape {alpha}")));
        }
        Ok(Self { alpha })
    }
}

impl LevyRepresentation for GammaRep {
    type Point = f64;

    fn sample_point(&self, rng: &mut SimRng) -> f64 {
        Exp1.sample(rng)
    }

    fn density(&self, y: &f64) -> f64 {
        y / self.alpha
    }

    fn kernel(&self, _t: f64, y: &f64) -> f64 {
        *y
    }

    fn integrate(&self, h: &PointFn<'_, f64>) -> Result<Complex64> {
        let a = self.alpha;
        let f = |y: f64| h(&y) * (a * (-y).exp() / y);
        let opts = QuadratureOptions::default();
        Ok(integrate_complex(f, 0.0, 1.0, &opts)? + integrate_complex(f, 1.0, f64::INFINITY, &opts)?)
    }

    /// `τ(1 − e^{-α/τ}) + α E₁(α/τ)`.
    fn expected_retained(&self, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        let x = self.alpha / tau;
        let e1 =
            crate::quadrature::integrate(|y: f64| (-y).exp() / y, x, f64::INFINITY, &QuadratureOptions::default())?;
        Ok(tau * (1.0 - (-x).exp()) + self.alpha * e1)
    }

    /// The window near `y = 0` has infinite intensity.
    fn discarded_mass(&self, _tau: f64) -> f64 {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retained_count_matches_quadrature() {
        let rep = GammaRep::new(2.0).unwrap();
        for tau in [0.5, 3.0, 50.0] {
            let closed = rep.expected_retained(tau).unwrap();
            let quad = rep
                .integrate(&|y| Complex64::new((tau * y / 2.0).min(1.0), 0.0))
                .unwrap()
                .re;
            assert!((closed - quad).abs() < 1e-6 * closed, "{tau}: {closed} {quad}");
        }
    }

    #[test]
    fn mean_of_measure() {
        // ∫ y n(dy) = α
        let rep = GammaRep::new(1.5).unwrap();
        let m = rep.integrate(&|y| Complex64::new(*y, 0.0)).unwrap();
        assert!((m.re - 1.5).abs() < 1e-8);
    }
}
