//! Lévy processes with finite jump intensity, represented on
//! `([0, H] × ℝ, λ dr ⊗ μ)` by `V_t(r, v) = 1{r ≤ t} v`.

use num_complex::Complex64;
use rand_distr::{Distribution, Exp, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prm::{open_unit, LevyRepresentation, PointFn};
use crate::quadrature::{integrate_complex, QuadratureOptions};
use crate::rng::SimRng;

/// Probability law of the jump sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "law")]
pub enum JumpLaw {
    /// Finitely many jump sizes; `weights` are normalized on construction.
    Atoms {
        points: Vec<f64>,
        weights: Vec<f64>,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
    Exponential {
        rate: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
}

impl JumpLaw {
    pub fn point(v: f64) -> Self {
        Self::Atoms {
            points: vec![v],
            weights: vec![1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self {
            Self::Atoms { points, weights } => {
                if points.is_empty() || points.len() != weights.len() {
                    return bad("atom law needs matching nonempty points and weights");
                }
                if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
                    return bad("atom weights must be nonnegative with positive sum");
                }
            }
            Self::Normal { sd, .. } if !(*sd > 0.0) => return bad("normal sd must be positive"),
            Self::Exponential { rate } if !(*rate > 0.0) => return bad("exponential rate must be positive"),
            Self::Uniform { low, high } if !(high > low) => return bad("uniform needs low < high"),
            _ => {}
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        match self {
            Self::Atoms { points, weights } => {
                let total: f64 = weights.iter().sum();
                let mut u = open_unit(rng) * total;
                for (p, w) in points.iter().zip(weights) {
                    if u < *w {
                        return *p;
                    }
                    u -= w;
                }
                *points.last().expect("nonempty")
            }
            Self::Normal { mean, sd } => Normal::new(*mean, *sd).expect("validated").sample(rng),
            Self::Exponential { rate } => Exp::new(*rate).expect("validated").sample(rng),
            Self::Uniform { low, high } => Uniform::new(*low, *high).expect("validated").sample(rng),
        }
    }

    /// `E h(v)` under the law.
    pub fn expect(&self, h: &dyn Fn(f64) -> Complex64) -> Result<Complex64> {
        let opts = QuadratureOptions::default();
        match self {
            Self::Atoms { points, weights } => {
                let total: f64 = weights.iter().sum();
                Ok(points.iter().zip(weights).map(|(&p, &w)| h(p) * (w / total)).sum())
            }
            Self::Normal { mean, sd } => {
                let c = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
                let f = |x: f64| {
                    let z = (x - mean) / sd;
                    h(x) * (c * (-0.5 * z * z).exp())
                };
                // split at the mean so each half-line sees one tail
                Ok(integrate_complex(f, f64::NEG_INFINITY, *mean, &opts)?
                    + integrate_complex(f, *mean, f64::INFINITY, &opts)?)
            }
            Self::Exponential { rate } => {
                integrate_complex(|x| h(x) * (rate * (-rate * x).exp()), 0.0, f64::INFINITY, &opts)
            }
            Self::Uniform { low, high } => {
                let d = 1.0 / (high - low);
                integrate_complex(|x| h(x) * d, *low, *high, &opts)
            }
        }
    }

    pub fn mass_at_zero(&self) -> f64 {
        match self {
            Self::Atoms { points, weights } => {
                let total: f64 = weights.iter().sum();
                points
                    .iter()
                    .zip(weights)
                    .filter(|(p, _)| **p == 0.0)
                    .map(|(_, w)| w / total)
                    .sum()
            }
            _ => 0.0,
        }
    }
}

/// Jump time and jump size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyPoint {
    pub time: f64,
    pub jump: f64,
}

/// `V_t(r, v) = 1{r ≤ t} v`.
#[inline]
pub fn levy_kernel(t: f64, p: &LevyPoint) -> f64 {
    if p.time <= t {
        p.jump
    } else {
        0.0
    }
}

/// Compound Poisson process with jump rate `λ` and jump law `μ`, represented
/// on `[0, H] × ℝ` with intensity `λ dr ⊗ μ(dv)`; `n⁽¹⁾` is uniform on the
/// strip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyProcessRep {
    pub rate: f64,
    pub jumps: JumpLaw,
    pub horizon: f64,
}

impl LevyProcessRep {
    pub fn new(rate: f64, jumps: JumpLaw, horizon: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("jump rate {rate}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon {horizon}")));
        }
        jumps.validate()?;
        Ok(Self { rate, jumps, horizon })
    }

    /// Poisson process of rate `λ` with unit jumps.
    pub fn poisson(rate: f64, horizon: f64) -> Result<Self> {
        Self::new(rate, JumpLaw::point(1.0), horizon)
    }

    fn mass(&self) -> f64 {
        self.rate * self.horizon
    }
}

impl LevyRepresentation for LevyProcessRep {
    type Point = LevyPoint;

    fn sample_point(&self, rng: &mut SimRng) -> LevyPoint {
        let time = open_unit(rng) * self.horizon;
        LevyPoint {
            time,
            jump: self.jumps.sample(rng),
        }
    }

    fn density(&self, _s: &LevyPoint) -> f64 {
        1.0 / self.mass()
    }

    fn kernel(&self, t: f64, s: &LevyPoint) -> f64 {
        levy_kernel(t, s)
    }

    fn finite_mass(&self) -> Option<f64> {
        Some(self.mass())
    }

    fn integrate(&self, h: &PointFn<'_, LevyPoint>) -> Result<Complex64> {
        let failure = std::sync::Mutex::new(None);
        let inner = |r: f64| match self.jumps.expect(&|v| h(&LevyPoint { time: r, jump: v })) {
            Ok(c) => c,
            Err(e) => {
                *failure.lock().expect("no poisoning") = Some(e);
                Complex64::new(0.0, 0.0)
            }
        };
        let outer = integrate_complex(inner, 0.0, self.horizon, &QuadratureOptions::default())?;
        if let Some(e) = failure.into_inner().expect("no poisoning") {
            return Err(e);
        }
        Ok(outer * self.rate)
    }

    fn expected_retained(&self, tau: f64) -> Result<f64> {
        Ok(tau.max(0.0).min(self.mass()))
    }

    fn discarded_mass(&self, tau: f64) -> f64 {
        (self.mass() - tau.max(0.0)).max(0.0)
    }
}

/// One-dimensional Lévy process `drift·t + σB_t + compound Poisson(λ, μ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    #[serde(default)]
    pub drift: f64,
    #[serde(default)]
    pub sigma: f64,
    pub rate: f64,
    pub jumps: JumpLaw,
    pub horizon: f64,
}

impl LevyModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || !self.drift.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drift {} and sigma {} must be finite, sigma nonnegative",
                self.drift, self.sigma
            )));
        }
        LevyProcessRep::new(self.rate, self.jumps.clone(), self.horizon).map(|_| ())
    }

    /// Representation of the jump part.
    pub fn rep(&self) -> Result<LevyProcessRep> {
        LevyProcessRep::new(self.rate, self.jumps.clone(), self.horizon)
    }

    /// Exact draw of `X_h`.
    pub fn sample_marginal(&self, h: f64, rng: &mut SimRng) -> f64 {
        let mut x = self.drift * h;
        if self.sigma > 0.0 {
            let g: f64 = rand_distr::StandardNormal.sample(rng);
            x += self.sigma * h.sqrt() * g;
        }
        let count = crate::prm::poisson_count(self.rate * h, rng);
        for _ in 0..count {
            x += self.jumps.sample(rng);
        }
        x
    }

    /// `∫ f dρ = λ E_μ f`.
    pub fn levy_measure_integral(&self, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        Ok(self.rate * self.jumps.expect(&|v| Complex64::new(f(v), 0.0))?.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFamily;

    #[test]
    fn kernel_examples() {
        assert_eq!(levy_kernel(1.0, &LevyPoint { time: 0.5, jump: 2.0 }), 2.0);
        assert_eq!(levy_kernel(1.0, &LevyPoint { time: 1.5, jump: 2.0 }), 0.0);
        assert_eq!(levy_kernel(1.5, &LevyPoint { time: 1.5, jump: 2.0 }), 2.0);
    }

    #[test]
    fn law_expectations() {
        let one = |_: f64| Complex64::new(1.0, 0.0);
        let id = |x: f64| Complex64::new(x, 0.0);
        let sq = |x: f64| Complex64::new(x * x, 0.0);
        let n = JumpLaw::Normal { mean: 0.5, sd: 2.0 };
        assert!((n.expect(&one).unwrap().re - 1.0).abs() < 1e-9);
        assert!((n.expect(&id).unwrap().re - 0.5).abs() < 1e-9);
        assert!((n.expect(&sq).unwrap().re - 4.25).abs() < 1e-8);
        let e = JumpLaw::Exponential { rate: 2.0 };
        assert!((e.expect(&id).unwrap().re - 0.5).abs() < 1e-9);
        let a = JumpLaw::Atoms {
            points: vec![-1.0, 1.0],
            weights: vec![1.0, 3.0],
        };
        assert!((a.expect(&id).unwrap().re - 0.5).abs() < 1e-15);
        assert!(JumpLaw::Uniform { low: 1.0, high: 1.0 }.validate().is_err());
    }

    #[test]
    fn integrate_total_mass() {
        let rep = LevyProcessRep::new(2.0, JumpLaw::Normal { mean: 0.0, sd: 1.0 }, 3.0).unwrap();
        let m = rep.integrate(&|_| Complex64::new(1.0, 0.0)).unwrap();
        assert!((m.re - 6.0).abs() < 1e-8);
        // ∫ 1{r ≤ 1} v² dn = λ·1·E v²
        let m = rep
            .integrate(&|p| Complex64::new(levy_kernel(1.0, p).powi(2), 0.0))
            .unwrap();
        assert!((m.re - 2.0).abs() < 1e-6);
    }

    #[test]
    fn sampler_matches_law() {
        let rep = LevyProcessRep::new(1.0, JumpLaw::Uniform { low: 0.0, high: 2.0 }, 4.0).unwrap();
        let mut rng = StreamFamily::tagged(3, "levy").stream(0);
        let n = 20_000;
        let (mut st, mut sv) = (0.0, 0.0);
        for _ in 0..n {
            let p = rep.sample_point(&mut rng);
            assert!(p.time > 0.0 && p.time <= 4.0);
            st += p.time;
            sv += p.jump;
        }
        assert!((st / n as f64 - 2.0).abs() < 0.05);
        assert!((sv / n as f64 - 1.0).abs() < 0.02);
    }
}
