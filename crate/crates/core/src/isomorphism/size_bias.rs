//! Size-bias form for nonnegative infinitely divisible vectors:
//! `E F(Y + Z^k) = E[F(Y) Y_k / θ_k]` with
//! `L(Z^k) = (c_k/θ_k) δ_0 + (y_k/θ_k) ν(dy)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use super::{add, Functional, NegativeControl, VerifyOptions};
use crate::error::{Error, Result};
use crate::mc;
use crate::prm::poisson_count;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::report::IdentityReport;
use crate::rng::{SimRng, StreamFamily};

/// Piece of the Lévy measure of a nonnegative vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum IdComponent {
    /// `weight · δ_point`.
    Atom { point: Vec<f64>, weight: f64 },
    /// `α e^{−r} r⁻¹ dr` along `r ↦ r·direction`, so the component
    /// contributes `direction · Gamma(α, 1)`.
    GammaRay { direction: Vec<f64>, alpha: f64 },
}

impl IdComponent {
    fn vector(&self) -> &[f64] {
        match self {
            Self::Atom { point, .. } => point,
            Self::GammaRay { direction, .. } => direction,
        }
    }

    /// `∫ y_k ν_component(dy)`.
    fn first_moment(&self, k: usize) -> f64 {
        match self {
            Self::Atom { point, weight } => weight * point[k],
            Self::GammaRay { direction, alpha } => alpha * direction[k],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonnegativeIdLaw {
    pub drift: Vec<f64>,
    pub components: Vec<IdComponent>,
}

impl NonnegativeIdLaw {
    pub fn new(drift: Vec<f64>, components: Vec<IdComponent>) -> Result<Self> {
        let d = drift.len();
        if drift.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter("drift must be finite and nonnegative".into()));
        }
        for c in &components {
            let v = c.vector();
            if v.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !(*x >= 0.0 && x.is_finite())) || v.iter().all(|x| *x == 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "component {v:?} must be nonnegative and nonzero"
                )));
            }
            let mass = match c {
                IdComponent::Atom { weight, .. } => *weight,
                IdComponent::GammaRay { alpha, .. } => *alpha,
            };
            if !(mass > 0.0 && mass.is_finite()) {
                return Err(Error::InvalidParameter(format!("component mass {mass}")));
            }
        }
        Ok(Self { drift, components })
    }

    /// `Y ~ Gamma(α, 1)` in one dimension.
    pub fn gamma(alpha: f64) -> Result<Self> {
        Self::new(
            vec![0.0],
            vec![IdComponent::GammaRay {
                direction: vec![1.0],
                alpha,
            }],
        )
    }

    pub fn dimension(&self) -> usize {
        self.drift.len()
    }

    /// `θ_k = E Y_k`.
    pub fn mean(&self, k: usize) -> f64 {
        self.drift[k] + self.components.iter().map(|c| c.first_moment(k)).sum::<f64>()
    }

    fn checked_mean(&self, k: usize) -> Result<f64> {
        if k >= self.dimension() {
            return Err(Error::InvalidParameter(format!(
                "coordinate {k} outside dimension {}",
                self.dimension()
            )));
        }
        let theta = self.mean(k);
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::DegenerateMean {
                coordinate: k,
                value: theta,
            });
        }
        Ok(theta)
    }

    pub fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        let mut y = self.drift.clone();
        for c in &self.components {
            match c {
                IdComponent::Atom { point, weight } => {
                    let n = poisson_count(*weight, rng);
                    for (yi, p) in y.iter_mut().zip(point) {
                        *yi += n as f64 * p;
                    }
                }
                IdComponent::GammaRay { direction, alpha } => {
                    let g = Gamma::new(*alpha, 1.0).expect("validated").sample(rng);
                    for (yi, d) in y.iter_mut().zip(direction) {
                        *yi += g * d;
                    }
                }
            }
        }
        y
    }

    /// Draw of `Z^k`. With `include_atom = false` the atom at the origin is
    /// dropped and the rest renormalized.
    pub fn sample_size_biased(&self, k: usize, include_atom: bool, rng: &mut SimRng) -> Result<Vec<f64>> {
        let theta = self.checked_mean(k)?;
        let atom = if include_atom { self.drift[k] } else { 0.0 };
        let total = if include_atom { theta } else { theta - self.drift[k] };
        if !(total > 0.0) {
            return Err(Error::DegenerateMean {
                coordinate: k,
                value: total,
            });
        }
        let mut u = rng.random::<f64>() * total;
        if u < atom {
            return Ok(vec![0.0; self.dimension()]);
        }
        u -= atom;
        let mut chosen = None;
        for c in &self.components {
            let m = c.first_moment(k);
            if m > 0.0 {
                chosen = Some(c);
                if u < m {
                    break;
                }
                u -= m;
            }
        }
        let c = chosen.expect("positive mean has a contributing component");
        Ok(match c {
            IdComponent::Atom { point, .. } => point.clone(),
            // r · α e^{−r} r⁻¹ dr ∝ e^{−r} dr
            IdComponent::GammaRay { direction, .. } => {
                let r: f64 = Exp1.sample(rng);
                direction.iter().map(|d| r * d).collect()
            }
        })
    }
}

/// `E F(Y + Z^k)` against `E[F(Y) Y_k/θ_k]` on independent streams. The
/// [`NegativeControl::DropAtom`] control drops the drift atom from `Z^k`.
pub fn verify_size_bias(
    law: &NonnegativeIdLaw,
    k: usize,
    f: &Functional,
    opts: &VerifyOptions,
    family: &StreamFamily,
) -> Result<IdentityReport> {
    opts.validate()?;
    let theta = law.checked_mean(k)?;
    let include_atom = opts.control != Some(NegativeControl::DropAtom);
    let lhs: Vec<f64> = mc::collect(opts.reps, &family.child("size-bias-lhs"), |rng, _| {
        let y = law.sample(rng);
        let z = law.sample_size_biased(k, include_atom, rng)?;
        Ok(f.eval(&add(&y, &z)))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let scale = opts.weight_scale();
    let rhs: Vec<f64> = mc::collect(opts.reps, &family.child("size-bias-rhs"), |rng, _| {
        let y = law.sample(rng);
        f.eval(&y) * scale * y[k] / theta
    });
    Ok(IdentityReport::independent(&lhs, &rhs, opts.z_crit))
}

/// Drift and Lévy-measure tail recovered from `Z^k`:
/// `c_k = θ_k P(Z^k_k = 0)` and
/// `ν(A_k ∩ {y_k > c}) = θ_k E[1_{A_k}(Z^k) 1{Z^k_k > c} / Z^k_k]`, where
/// `A_k = {y_1 = … = y_{k−1} = 0, y_k > 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub coordinate: usize,
    pub drift_estimate: f64,
    pub drift_se: f64,
    pub drift_expected: f64,
    pub tail_level: f64,
    pub tail_estimate: f64,
    pub tail_se: f64,
    pub tail_expected: f64,
    pub z_drift: f64,
    pub z_tail: f64,
    pub pass: bool,
}

fn exp_integral_e1(x: f64) -> Result<f64> {
    integrate(|y: f64| (-y).exp() / y, x, f64::INFINITY, &QuadratureOptions::default())
}

pub fn reconstruct_from_size_bias(
    law: &NonnegativeIdLaw,
    k: usize,
    tail_level: f64,
    reps: usize,
    family: &StreamFamily,
    z_crit: f64,
) -> Result<ReconstructionReport> {
    let theta = law.checked_mean(k)?;
    if !(tail_level > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tail level {tail_level} must be positive"
        )));
    }
    let m = mc::replicate(reps, &family.child("size-bias-reconstruct"), |rng, _| {
        let z = law.sample_size_biased(k, true, rng).expect("mean checked");
        let zero = if z[k] == 0.0 { theta } else { 0.0 };
        let in_ak = z[..k].iter().all(|v| *v == 0.0) && z[k] > tail_level;
        [zero, if in_ak { theta / z[k] } else { 0.0 }]
    });
    let in_ak = |v: &[f64]| v[..k].iter().all(|x| *x == 0.0) && v[k] > 0.0;
    let mut tail_expected = 0.0;
    for c in &law.components {
        match c {
            IdComponent::Atom { point, weight } if in_ak(point) && point[k] > tail_level => tail_expected += weight,
            IdComponent::GammaRay { direction, alpha } if in_ak(direction) => {
                tail_expected += alpha * exp_integral_e1(tail_level / direction[k])?;
            }
            _ => {}
        }
    }
    let z = |est: f64, se: f64, exp: f64| {
        if se > 0.0 {
            (est - exp) / se
        } else if (est - exp).abs() <= 1e-12 * exp.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let (drift_estimate, drift_se) = (m.mean(0), m.se(0));
    let (tail_estimate, tail_se) = (m.mean(1), m.se(1));
    let drift_expected = law.drift[k];
    let z_drift = z(drift_estimate, drift_se, drift_expected);
    let z_tail = z(tail_estimate, tail_se, tail_expected);
    Ok(ReconstructionReport {
        coordinate: k,
        drift_estimate,
        drift_se,
        drift_expected,
        tail_level,
        tail_estimate,
        tail_se,
        tail_expected,
        z_drift,
        z_tail,
        pass: z_drift.abs() < z_crit && z_tail.abs() < z_crit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_only_law_has_zero_translation() {
        let law = NonnegativeIdLaw::new(vec![2.0], vec![]).unwrap();
        let mut rng = StreamFamily::tagged(1, "sb").stream(0);
        assert_eq!(law.sample(&mut rng), vec![2.0]);
        assert_eq!(law.sample_size_biased(0, true, &mut rng).unwrap(), vec![0.0]);
        let r = verify_size_bias(
            &law,
            0,
            &Functional::exp_neg_coordinate(0),
            &VerifyOptions::with_reps(100),
            &StreamFamily::tagged(1, "sb-v"),
        )
        .unwrap();
        assert_eq!(r.lhs_mean, (-2.0f64).exp());
        assert_eq!(r.rhs_mean, (-2.0f64).exp());
    }

    #[test]
    fn zero_mean_is_rejected() {
        let law = NonnegativeIdLaw::new(
            vec![0.0, 0.0],
            vec![IdComponent::Atom {
                point: vec![1.0, 0.0],
                weight: 1.0,
            }],
        )
        .unwrap();
        let mut rng = StreamFamily::tagged(1, "sb0").stream(0);
        assert!(matches!(
            law.sample_size_biased(1, true, &mut rng),
            Err(Error::DegenerateMean { coordinate: 1, .. })
        ));
    }

    #[test]
    fn atoms_are_size_biased_by_coordinate() {
        let law = NonnegativeIdLaw::new(
            vec![0.0],
            vec![
                IdComponent::Atom {
                    point: vec![1.0],
                    weight: 1.0,
                },
                IdComponent::Atom {
                    point: vec![3.0],
                    weight: 1.0,
                },
            ],
        )
        .unwrap();
        let mut rng = StreamFamily::tagged(2, "sb-atoms").stream(0);
        let n = 40_000;
        let threes = (0..n)
            .filter(|_| law.sample_size_biased(0, true, &mut rng).unwrap()[0] == 3.0)
            .count();
        let p = threes as f64 / n as f64;
        assert!((p - 0.75).abs() < 4.0 * (0.75f64 * 0.25 / n as f64).sqrt(), "{p}");
    }
}
