//! Small-time limit `h⁻¹ E f(X_h) → ∫ f dρ` for a one-dimensional Lévy
//! process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mc;
use crate::representations::levy::LevyModel;
use crate::rng::StreamFamily;

pub const DEFAULT_H_LADDER: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub h: Vec<f64>,
    /// `h⁻¹ · mean f(X_h)` per ladder step.
    pub estimates: Vec<f64>,
    pub ses: Vec<f64>,
    /// Degree of the polynomial in `h` fitted to the estimates.
    pub degree: usize,
    /// Intercept of the fit, the extrapolation to `h = 0`.
    pub limit: f64,
    pub limit_se: f64,
    /// `∫ f dρ` by quadrature.
    pub oracle: f64,
    pub abs_error: f64,
    /// `abs_error / |oracle|`; absent when the oracle is 0.
    pub rel_error: Option<f64>,
}

/// Weighted least-squares polynomial `Σ_{i ≤ degree} a_i h^i` through the
/// estimates (weights `1/se²`, or equal when any `se` is zero); returns the
/// intercept and its standard error.
fn extrapolate(h: &[f64], y: &[f64], se: &[f64], degree: usize) -> Result<(f64, f64)> {
    let p = degree + 1;
    let equal = se.iter().any(|s| *s <= 0.0);
    let mut a = Matrix::zeros(p, p);
    let mut b = vec![0.0; p];
    for k in 0..h.len() {
        let w = if equal { 1.0 } else { 1.0 / (se[k] * se[k]) };
        let pows: Vec<f64> = (0..p).map(|i| h[k].powi(i as i32)).collect();
        for i in 0..p {
            b[i] += w * pows[i] * y[k];
            for j in 0..p {
                a[(i, j)] += w * pows[i] * pows[j];
            }
        }
    }
    let inv = a
        .inverse()
        .ok_or_else(|| Error::InvalidParameter("h ladder does not determine the fit".into()))?;
    let coef = inv.matvec(&b);
    let var = if equal {
        // propagate the per-point variances through the unweighted fit
        (0..h.len())
            .map(|k| {
                let l: f64 = (0..p).map(|j| inv[(0, j)] * h[k].powi(j as i32)).sum();
                l * l * se[k] * se[k]
            })
            .sum()
    } else {
        inv[(0, 0)]
    };
    Ok((coef[0], var.max(0.0).sqrt()))
}

/// `f` should be bounded with `f(x) = o(x²)` at the origin (`O(x²)` without
/// Gaussian part); this is the caller's responsibility. The fit uses degree
/// `min(2, len − 1)`.
pub fn small_time_limit(
    model: &LevyModel,
    f: &(dyn Fn(f64) -> f64 + Sync),
    h_ladder: &[f64],
    reps: usize,
    family: &StreamFamily,
) -> Result<LimitReport> {
    model.validate()?;
    if h_ladder.is_empty() || h_ladder.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidParameter("h ladder must be nonempty and positive".into()));
    }
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("reps = {reps} must be at least 2")));
    }
    let mut estimates = Vec::new();
    let mut ses = Vec::new();
    for (k, &h) in h_ladder.iter().enumerate() {
        let m = mc::replicate(reps, &family.child(&format!("small-time-{k}")), |rng, _| {
            [f(model.sample_marginal(h, rng))]
        });
        estimates.push(m.mean(0) / h);
        ses.push(m.se(0) / h);
    }
    let degree = (h_ladder.len() - 1).min(2);
    let (limit, limit_se) = extrapolate(h_ladder, &estimates, &ses, degree)?;
    let oracle = model.levy_measure_integral(f)?;
    let abs_error = (limit - oracle).abs();
    Ok(LimitReport {
        h: h_ladder.to_vec(),
        estimates,
        ses,
        degree,
        limit,
        limit_se,
        oracle,
        abs_error,
        rel_error: (oracle != 0.0).then(|| abs_error / oracle.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_is_recovered() {
        let h = [0.4, 0.2, 0.1, 0.05];
        let y: Vec<f64> = h.iter().map(|x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
        let (c, se) = extrapolate(&h, &y, &[0.0; 4], 2).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
        assert_eq!(se, 0.0);
        let (c, _) = extrapolate(&h, &y, &[0.1, 0.1, 0.2, 0.3], 2).unwrap();
        assert!((c - 2.0).abs() < 1e-10);
    }
}
