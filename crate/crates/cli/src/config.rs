//! Experiment configuration documents.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use idsim_core::isomorphism::{Functional, IdComponent, NegativeControl, NonnegativeIdLaw, VerifyOptions};
use idsim_core::linalg::Matrix;
use idsim_core::measure::{AtomicMeasure, FiniteIndexSet};
use idsim_core::report::DEFAULT_Z_CRIT;
use idsim_core::representations::{JumpLaw, LevyModel, LevyPoint, MarkovChainModel, PermanentalModel};
use idsim_core::SimRng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const DEFAULT_REPS: usize = 10_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub model: ModelSpec,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: u64,
    /// JSON report path; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Per-grid-point table for plotting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

fn default_reps() -> usize {
    DEFAULT_REPS
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("config is not a valid experiment document")?;
        if cfg.reps == 0 {
            bail!("reps must be at least 1");
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum ModelSpec {
    Levy(LevyModel),
    CompoundPoisson {
        rate: f64,
        jumps: JumpLaw,
        horizon: f64,
    },
    Besq {
        beta: f64,
    },
    Feller {
        a: f64,
        sigma: f64,
    },
    MarkovChain {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states: Option<Vec<String>>,
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
    },
    Permanental {
        #[serde(rename = "U")]
        u: Vec<Vec<f64>>,
        alpha: f64,
    },
    CustomAtomic(CustomAtomic),
}

impl ModelSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Levy(_) => "levy",
            Self::CompoundPoisson { .. } => "compound-poisson",
            Self::Besq { .. } => "besq",
            Self::Feller { .. } => "feller",
            Self::MarkovChain { .. } => "markov-chain",
            Self::Permanental { .. } => "permanental",
            Self::CustomAtomic(_) => "custom-atomic",
        }
    }

    /// Jump-driven models as a Lévy triple; compound Poisson has no drift or
    /// Gaussian part.
    pub fn levy(&self) -> Option<LevyModel> {
        match self {
            Self::Levy(m) => Some(m.clone()),
            Self::CompoundPoisson { rate, jumps, horizon } => Some(LevyModel {
                drift: 0.0,
                sigma: 0.0,
                rate: *rate,
                jumps: jumps.clone(),
                horizon: *horizon,
            }),
            _ => None,
        }
    }

    pub fn chain(&self) -> Option<Result<MarkovChainModel>> {
        match self {
            Self::MarkovChain { states, p } => Some((|| {
                let states = match states {
                    Some(s) => s.clone(),
                    None => (0..p.len()).map(|i| format!("x{}", i + 1)).collect(),
                };
                Ok(MarkovChainModel::new(states, Matrix::from_rows(p)?)?)
            })()),
            _ => None,
        }
    }

    pub fn permanental(&self) -> Option<Result<PermanentalModel>> {
        match self {
            Self::Permanental { u, alpha } => Some((|| Ok(PermanentalModel::new(Matrix::from_rows(u)?, *alpha)?))()),
            _ => None,
        }
    }
}

/// A finite atomic measure, optionally with gamma rays and a drift so that it
/// also describes a nonnegative infinitely divisible law, and further measures
/// for consistency checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CustomAtomic {
    #[serde(flatten)]
    pub measure: AtomicMeasure<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma_rays: Vec<GammaRay>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub family: Vec<AtomicMeasure<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaRay {
    pub direction: Vec<f64>,
    pub alpha: f64,
}

impl CustomAtomic {
    pub fn measure(&self) -> Result<AtomicMeasure<f64>> {
        Ok(AtomicMeasure::new(
            self.measure.index_set.clone(),
            self.measure.atoms.clone(),
        )?)
    }

    pub fn family(&self) -> Result<Vec<AtomicMeasure<f64>>> {
        let mut out = vec![self.measure()?];
        for m in &self.family {
            out.push(AtomicMeasure::new(m.index_set.clone(), m.atoms.clone())?);
        }
        Ok(out)
    }

    pub fn law(&self) -> Result<NonnegativeIdLaw> {
        let d = self.measure.index_set.dimension();
        let drift = self.drift.clone().unwrap_or_else(|| vec![0.0; d]);
        let mut components: Vec<IdComponent> = self
            .measure
            .atoms
            .iter()
            .map(|a| IdComponent::Atom {
                point: a.point.clone(),
                weight: a.weight,
            })
            .collect();
        components.extend(self.gamma_rays.iter().map(|g| IdComponent::GammaRay {
            direction: g.direction.clone(),
            alpha: g.alpha,
        }));
        Ok(NonnegativeIdLaw::new(drift, components)?)
    }

    pub fn index_set(&self) -> &FiniteIndexSet {
        &self.measure.index_set
    }
}

/// Bounded test functional on a `d`-dimensional vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum FunctionalSpec {
    Constant {
        value: f64,
    },
    /// `exp(−Σ s_i y_i)`, requires `s ≥ 0`.
    Laplace {
        s: Vec<f64>,
    },
    ExpNegCoordinate {
        index: usize,
    },
    IndicatorBelow {
        index: usize,
        level: f64,
    },
    /// `cos(Σ a_i y_i)`.
    Cosine {
        a: Vec<f64>,
    },
}

impl FunctionalSpec {
    pub fn build(&self, dim: usize) -> Result<Functional> {
        let check_index = |i: usize| {
            if i >= dim {
                bail!("functional index {i} outside dimension {dim}");
            }
            Ok(())
        };
        let check_len = |v: &[f64]| {
            if v.len() != dim {
                bail!("functional has {} coefficients for dimension {dim}", v.len());
            }
            Ok(())
        };
        Ok(match self {
            Self::Constant { value } => Functional::constant(*value),
            Self::Laplace { s } => {
                check_len(s)?;
                if s.iter().any(|x| !(*x >= 0.0)) {
                    bail!("laplace coefficients must be nonnegative");
                }
                Functional::laplace(s.clone())
            }
            Self::ExpNegCoordinate { index } => {
                check_index(*index)?;
                Functional::exp_neg_coordinate(*index)
            }
            Self::IndicatorBelow { index, level } => {
                check_index(*index)?;
                Functional::indicator_below(*index, *level)
            }
            Self::Cosine { a } => {
                check_len(a)?;
                let a = a.clone();
                Functional::new("cosine", Some(1.0), move |y| {
                    a.iter().zip(y).map(|(c, v)| c * v).sum::<f64>().cos()
                })
            }
        })
    }
}

/// `q(r, v) = weight · e^{−decay·r} · 1{r ≤ until}` on jump points. Without
/// an explicit weight, the weight makes `∫ q dn` equal the target mass.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    #[serde(default)]
    pub decay: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub until: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TimeWeight {
    pub weight: f64,
    pub decay: f64,
    pub until: f64,
}

impl QSpec {
    /// Resolves the weight against a rate-`rate` intensity on `[0, horizon]`
    /// and stores the resolved weight.
    pub fn resolve(&mut self, rate: f64, horizon: f64, target: f64) -> Result<TimeWeight> {
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            bail!("q decay must be finite and nonnegative");
        }
        let until = self.until.unwrap_or(horizon).min(horizon);
        if !(until > 0.0) {
            bail!("q support [0, {until}] is empty");
        }
        let weight = match self.weight {
            Some(w) => w,
            None => {
                let integral = if self.decay == 0.0 {
                    until
                } else {
                    -(-self.decay * until).exp_m1() / self.decay
                };
                target / (rate * integral)
            }
        };
        if !(weight >= 0.0 && weight.is_finite()) {
            bail!("q weight {weight} is not a finite nonnegative number");
        }
        self.weight = Some(weight);
        Ok(TimeWeight {
            weight,
            decay: self.decay,
            until,
        })
    }
}

impl TimeWeight {
    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.until {
            self.weight * (-self.decay * r).exp()
        } else {
            0.0
        }
    }

    /// Draws from `q·n` normalized, for jumps with law `jumps`.
    pub fn sample_point(&self, jumps: &JumpLaw, rng: &mut SimRng) -> LevyPoint {
        let u: f64 = rng.random();
        let time = if self.decay == 0.0 {
            u * self.until
        } else {
            -(u * (-self.decay * self.until).exp_m1()).ln_1p() / self.decay
        };
        LevyPoint {
            time,
            jump: jumps.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifySettings {
    #[serde(default = "default_z_crit")]
    pub z_crit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<NegativeControl>,
}

fn default_z_crit() -> f64 {
    DEFAULT_Z_CRIT
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            z_crit: DEFAULT_Z_CRIT,
            control: None,
        }
    }
}

impl VerifySettings {
    pub fn options(&self, reps: usize) -> VerifyOptions {
        VerifyOptions {
            reps,
            z_crit: self.z_crit,
            control: self.control,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use idsim_core::StreamFamily;

    #[test]
    fn q_weight_normalizes_the_window() {
        let mut q = QSpec {
            weight: None,
            decay: 0.5,
            until: Some(3.0),
        };
        let w = q.resolve(2.0, 10.0, 0.8).unwrap();
        // 2 ∫_0^3 w e^{−r/2} dr = 0.8
        let mass = 2.0 * w.weight * 2.0 * (1.0 - (-1.5f64).exp());
        assert!((mass - 0.8).abs() < 1e-12);
        assert_eq!(q.weight, Some(w.weight));
        assert_eq!(w.eval(3.5), 0.0);
    }

    #[test]
    fn q_points_follow_the_truncated_exponential() {
        let mut q = QSpec {
            weight: None,
            decay: 1.0,
            until: Some(2.0),
        };
        let w = q.resolve(1.0, 5.0, 1.0).unwrap();
        let mut rng = StreamFamily::tagged(1, "q-points").stream(0);
        let n = 200_000;
        let times: Vec<f64> = (0..n)
            .map(|_| w.sample_point(&JumpLaw::point(1.0), &mut rng).time)
            .collect();
        assert!(times.iter().all(|t| (0.0..=2.0).contains(t)));
        // E r = (1 − 3e^{−2}) / (1 − e^{−2}) for Exp(1) truncated to [0, 2]
        let e2 = (-2.0f64).exp();
        let expected = (1.0 - 3.0 * e2) / (1.0 - e2);
        let mean = times.iter().sum::<f64>() / n as f64;
        assert!((mean - expected).abs() < 0.01, "{mean} vs {expected}");
    }
}
