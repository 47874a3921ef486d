//! Excursion local-time representations of the Feller diffusion
//! `dZ = σ√Z dW, Z₀ = a` and of the squared Bessel process
//! `dY = 2√Y dW + β dt, Y₀ = 0`.

use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::prm::LevyRepresentation;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::representations::excursion::{sample_excursion_lazy, ExcursionPoint, GridRule, LengthSampler};
use crate::representations::local_time::LocalTimeEstimator;
use crate::rng::SimRng;

/// Excursion sampling and local-time settings shared by both models.
#[derive(Debug, Clone)]
pub struct ExcursionSettings {
    pub lengths: LengthSampler,
    pub grid: GridRule,
    pub estimator: LocalTimeEstimator,
}

impl Default for ExcursionSettings {
    fn default() -> Self {
        Self {
            lengths: LengthSampler::canonical(),
            grid: GridRule::Adaptive {
                per_unit: 512.0,
                min: 64,
                max: 4096,
            },
            estimator: LocalTimeEstimator::Refined { min_step: 1e-5 },
        }
    }
}

/// `V_t(u) = L^{σ²t/4}_∞(u)` on `(U₊, a·n₊)`, with `g(u) = f(R(u))/a`.
#[derive(Debug, Clone)]
pub struct FellerRep {
    pub a: f64,
    pub sigma: f64,
    pub settings: ExcursionSettings,
}

impl FellerRep {
    pub fn new(a: f64, sigma: f64, settings: ExcursionSettings) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "initial value a = {a} must be positive"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
        }
        settings.grid.validate()?;
        Ok(Self { a, sigma, settings })
    }

    /// Local-time level read at time `t`.
    pub fn level(&self, t: f64) -> f64 {
        0.25 * self.sigma * self.sigma * t
    }
}

/// `L^{σ²t/4}_∞(u)`.
pub fn feller_kernel(t: f64, exc: &ExcursionPoint, sigma: f64, estimator: &LocalTimeEstimator) -> f64 {
    exc.local_time(0.25 * sigma * sigma * t, estimator)
}

impl LevyRepresentation for FellerRep {
    type Point = ExcursionPoint;

    fn sample_point(&self, rng: &mut SimRng) -> ExcursionPoint {
        sample_excursion_lazy(&self.settings.lengths, &self.settings.grid, rng)
    }

    fn density(&self, u: &ExcursionPoint) -> f64 {
        self.settings.lengths.tilt(u.length()) / self.a
    }

    fn kernel(&self, t: f64, u: &ExcursionPoint) -> f64 {
        feller_kernel(t, u, self.sigma, &self.settings.estimator)
    }

    fn expected_retained(&self, tau: f64) -> Result<f64> {
        Ok(self.a * self.settings.lengths.retained_integral(tau / self.a)?)
    }

    /// `n₊` has infinite mass near `R = 0`.
    fn discarded_mass(&self, _tau: f64) -> f64 {
        f64::INFINITY
    }
}

/// Start time `η` and excursion `u` of a squared Bessel series term.
#[derive(Debug, Clone)]
pub struct BesqPoint {
    pub start: f64,
    pub excursion: ExcursionPoint,
}

/// `V_t(r, u) = L^{t−r}_∞(u)` on `(ℝ₊ × U₊, β dr ⊗ n₊)`, with
/// `g(r, u) = e^{−βr} f(R(u))`.
#[derive(Debug, Clone)]
pub struct BesqRep {
    pub beta: f64,
    pub settings: ExcursionSettings,
}

impl BesqRep {
    pub fn new(beta: f64, settings: ExcursionSettings) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta = {beta} must be positive")));
        }
        settings.grid.validate()?;
        Ok(Self { beta, settings })
    }
}

/// `L^{t−r}_∞(u)`; zero when `r ≥ t`.
pub fn besq_kernel(t: f64, p: &BesqPoint, estimator: &LocalTimeEstimator) -> f64 {
    p.excursion.local_time(t - p.start, estimator)
}

impl LevyRepresentation for BesqRep {
    type Point = BesqPoint;

    fn sample_point(&self, rng: &mut SimRng) -> BesqPoint {
        let start = Exp::new(self.beta).expect("beta checked").sample(rng);
        BesqPoint {
            start,
            excursion: sample_excursion_lazy(&self.settings.lengths, &self.settings.grid, rng),
        }
    }

    fn density(&self, p: &BesqPoint) -> f64 {
        (-self.beta * p.start).exp() * self.settings.lengths.tilt(p.excursion.length())
    }

    fn kernel(&self, t: f64, p: &BesqPoint) -> f64 {
        besq_kernel(t, p, &self.settings.estimator)
    }

    /// `β ∫₀^∞ ∫ (τ e^{−βr} f(R) ∧ 1) n₊(dR) dr`.
    fn expected_retained(&self, tau: f64) -> Result<f64> {
        let lengths = &self.settings.lengths;
        let beta = self.beta;
        let failure = std::cell::Cell::new(None);
        let inner = |r: f64| match lengths.retained_integral(tau * (-beta * r).exp()) {
            Ok(v) => v,
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        };
        let v = integrate(inner, 0.0, f64::INFINITY, &QuadratureOptions::default())?;
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(beta * v)
    }

    fn discarded_mass(&self, _tau: f64) -> f64 {
        f64::INFINITY
    }
}
