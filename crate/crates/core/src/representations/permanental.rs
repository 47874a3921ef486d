//! α-permanental vectors with a symmetric positive definite kernel, for
//! half-integer α: `Y = ½ Σ_{i ≤ 2α} (η⁽ⁱ⁾)²` with `η⁽ⁱ⁾ ~ N(0, U)` i.i.d.

use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct PermanentalModel {
    u: Matrix<f64>,
    alpha: f64,
    copies: usize,
    chol: Matrix<f64>,
}

#[derive(Debug, Deserialize)]
struct PermanentalJson {
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
    alpha: f64,
}

impl PermanentalModel {
    pub fn new(u: Matrix<f64>, alpha: f64) -> Result<Self> {
        let k = 2.0 * alpha;
        if !(alpha > 0.0) || (k - k.round()).abs() > 1e-12 {
            return Err(Error::NonHalfIntegerAlpha(alpha));
        }
        let asym = u.asymmetry();
        if asym > 1e-12 * u.max_abs().max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        let chol = u.cholesky()?;
        Ok(Self {
            u,
            alpha,
            copies: k.round() as usize,
            chol,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: PermanentalJson = serde_json::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Self::new(Matrix::from_rows(&j.u)?, j.alpha)
    }

    pub fn kernel(&self) -> &Matrix<f64> {
        &self.u
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dimension(&self) -> usize {
        self.u.rows()
    }

    pub fn sample(&self, rng: &mut SimRng) -> Vec<f64> {
        let n = self.dimension();
        let mut y = vec![0.0; n];
        let mut z = vec![0.0; n];
        for _ in 0..self.copies {
            for v in z.iter_mut() {
                *v = StandardNormal.sample(rng);
            }
            let eta = self.chol.matvec(&z);
            for (yi, e) in y.iter_mut().zip(eta) {
                *yi += 0.5 * e * e;
            }
        }
        y
    }

    /// `E exp(−Σ s_j Y_j) = |I + US|^{−α}`.
    pub fn laplace_transform(&self, s: &[f64]) -> Result<f64> {
        let n = self.dimension();
        let m = Matrix::identity(n).add(&self.u.matmul(&Matrix::diagonal(s))?);
        Ok(m.determinant().powf(-self.alpha))
    }

    /// `E Y_x = α u(x, x)`.
    pub fn mean(&self, x: usize) -> f64 {
        self.alpha * self.u[(x, x)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let u = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(matches!(
            PermanentalModel::new(u.clone(), 0.3),
            Err(Error::NonHalfIntegerAlpha(_))
        ));
        assert!(PermanentalModel::new(u, 1.5).is_ok());
        let bad = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            PermanentalModel::new(bad, 0.5),
            Err(Error::NotPositiveDefinite)
        ));
        let m = PermanentalModel::from_json(r#"{"U":[[2,1],[1,2]],"alpha":1}"#).unwrap();
        assert_eq!(m.mean(1), 2.0);
    }

    #[test]
    fn scalar_laplace_transform() {
        let m = PermanentalModel::new(Matrix::from_rows(&[vec![1.0]]).unwrap(), 0.5).unwrap();
        assert!((m.laplace_transform(&[1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
