//! Transient finite-state Markov chains, their Green matrices and total local
//! times.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::SimRng;

/// How time spent in a state is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalTimeClock {
    /// Each visit counts 1 (discrete-time chain).
    VisitCount,
    /// Each visit lasts an independent unit-mean exponential time
    /// (continuous-time chain with unit jump rate and embedded kernel `P`).
    #[default]
    ExponentialHolding,
}

/// Chain with substochastic kernel `P`; row deficits are killing
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChainModel {
    states: Vec<String>,
    p: Matrix<f64>,
    green: Matrix<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct ChainJson {
    states: Vec<String>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
}

/// `U = (I − P)⁻¹`, the expected total time in `y` starting from `x`.
pub fn green_matrix(p: &Matrix<f64>) -> Result<Matrix<f64>> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch {
            expected: p.rows(),
            got: p.cols(),
        });
    }
    let n = p.rows();
    let a = Matrix::identity(n).sub(p);
    let u = a
        .inverse()
        .ok_or_else(|| Error::NotTransient("I − P is singular".into()))?;
    // For P ≥ 0, (I − P)⁻¹ ≥ 0 exactly when the spectral radius is below 1.
    let scale = u.max_abs().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if u[(i, j)] < -1e-12 * scale {
                return Err(Error::NotTransient(format!(
                    "negative potential u({i},{j}) = {}",
                    u[(i, j)]
                )));
            }
        }
    }
    let residual = a.matmul(&u)?.sub(&Matrix::identity(n)).max_abs();
    if residual > 1e-10 * scale {
        return Err(Error::NotTransient(format!("inverse residual {residual}")));
    }
    Ok(u)
}

impl MarkovChainModel {
    pub fn new(states: Vec<String>, p: Matrix<f64>) -> Result<Self> {
        if states.len() != p.rows() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: p.rows(),
            });
        }
        for i in 0..p.rows() {
            let row = p.row(i);
            if row.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::InvalidParameter(format!("row {i} of P has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if s > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!("row {i} of P sums to {s} > 1")));
            }
        }
        let green = green_matrix(&p)?;
        Ok(Self { states, p, green })
    }

    pub fn from_rows(p: &[Vec<f64>]) -> Result<Self> {
        let states = (0..p.len()).map(|i| format!("x{}", i + 1)).collect();
        Self::new(states, Matrix::from_rows(p)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: ChainJson = serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::new(c.states, Matrix::from_rows(&c.p)?)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn kernel(&self) -> &Matrix<f64> {
        &self.p
    }

    pub fn green(&self) -> &Matrix<f64> {
        &self.green
    }

    fn step(&self, x: usize, rng: &mut SimRng) -> Option<usize> {
        let mut u: f64 = rng.random();
        for (y, &p) in self.p.row(x).iter().enumerate() {
            if u < p {
                return Some(y);
            }
            u -= p;
        }
        None
    }

    fn holding(clock: LocalTimeClock, rng: &mut SimRng) -> f64 {
        match clock {
            LocalTimeClock::VisitCount => 1.0,
            LocalTimeClock::ExponentialHolding => Exp1.sample(rng),
        }
    }

    /// Total local times `L^y_∞` of the chain started at `x`.
    pub fn sample_local_times(&self, x: usize, clock: LocalTimeClock, rng: &mut SimRng) -> Vec<f64> {
        let mut l = vec![0.0; self.len()];
        let mut cur = Some(x);
        while let Some(s) = cur {
            l[s] += Self::holding(clock, rng);
            cur = self.step(s, rng);
        }
        l
    }

    /// Total local times under `P̃_a`: the chain started at `a` and killed at
    /// its last visit to `a` (that visit included).
    pub fn sample_local_times_tilde(&self, a: usize, clock: LocalTimeClock, rng: &mut SimRng) -> Result<Vec<f64>> {
        if !(self.green[(a, a)] > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "u(a,a) = {} must be positive",
                self.green[(a, a)]
            )));
        }
        let mut l = vec![0.0; self.len()];
        let mut at_last_visit = l.clone();
        let mut cur = Some(a);
        while let Some(s) = cur {
            l[s] += Self::holding(clock, rng);
            if s == a {
                at_last_visit.copy_from_slice(&l);
            }
            cur = self.step(s, rng);
        }
        Ok(at_last_visit)
    }
}

/// `(1/u(a,a)) ∂/∂s_a log|I + US|` with `S = diag(s)`; equals
/// `[(I + US)⁻¹U]_{aa} / u(a,a)`.
pub fn tilde_laplace_transform(u: &Matrix<f64>, s: &[f64], a: usize) -> Result<f64> {
    let n = u.rows();
    let m = Matrix::identity(n).add(&u.matmul(&Matrix::diagonal(s))?);
    let inv = m.inverse().ok_or(Error::NotPositiveDefinite)?;
    Ok(inv.matmul(u)?[(a, a)] / u[(a, a)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFamily;

    #[test]
    fn green_examples() {
        let one = MarkovChainModel::from_rows(&[vec![0.5]]).unwrap();
        assert!((one.green()[(0, 0)] - 2.0).abs() < 1e-15);
        let zero = MarkovChainModel::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(zero.green(), &Matrix::identity(2));
        let two = MarkovChainModel::from_rows(&[vec![0.0, 0.4], vec![0.4, 0.0]]).unwrap();
        let u = two.green();
        assert!((u[(0, 0)] - 1.0 / 0.84).abs() < 1e-14);
        assert!((u[(0, 1)] - 0.4 / 0.84).abs() < 1e-14);
        assert!((u[(0, 0)] - 1.190_476_190_476_190_5).abs() < 1e-12);
    }

    #[test]
    fn recurrent_chain_is_rejected() {
        assert!(matches!(
            MarkovChainModel::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            Err(Error::NotTransient(_))
        ));
        assert!(MarkovChainModel::from_rows(&[vec![0.7, 0.6], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn immediate_killing() {
        let m = MarkovChainModel::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let mut rng = StreamFamily::tagged(1, "kill").stream(0);
        assert_eq!(
            m.sample_local_times_tilde(1, LocalTimeClock::VisitCount, &mut rng)
                .unwrap(),
            vec![0.0, 1.0]
        );
        let l = m
            .sample_local_times_tilde(0, LocalTimeClock::ExponentialHolding, &mut rng)
            .unwrap();
        assert!(l[0] > 0.0 && l[1] == 0.0);
    }

    #[test]
    fn json_loading() {
        let m = MarkovChainModel::from_json(r#"{"states":["a","b"],"P":[[0,0.4],[0.4,0]]}"#).unwrap();
        assert_eq!(m.states(), ["a", "b"]);
        assert!(MarkovChainModel::from_json(r#"{"states":["a"],"P":[[1.0]]}"#).is_err());
    }

    #[test]
    fn laplace_derivative_matches_finite_differences() {
        let u = Matrix::from_rows(&[vec![1.0 / 0.84, 0.4 / 0.84], vec![0.4 / 0.84, 1.0 / 0.84]]).unwrap();
        let s = [0.7, 0.3];
        let h = 1e-6;
        let logdet = |s0: f64| {
            let m = Matrix::identity(2).add(&u.matmul(&Matrix::diagonal(&[s0, s[1]])).unwrap());
            m.determinant().ln()
        };
        let fd = (logdet(s[0] + h) - logdet(s[0] - h)) / (2.0 * h) / u[(0, 0)];
        let closed = tilde_laplace_transform(&u, &s, 0).unwrap();
        assert!((fd - closed).abs() < 1e-8, "{fd} vs {closed}");
    }
}
