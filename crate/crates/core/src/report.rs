//! Paired Monte Carlo estimates of the two sides of an identity.

use serde::{Deserialize, Serialize};

use crate::stats::KahanSum;

pub const DEFAULT_Z_CRIT: f64 = 4.0;

/// How the two arms were sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Arms use independent random streams; `z` uses `√(se_l² + se_r²)`.
    Independent,
    /// Arms share each replication's randomness; `z` uses the standard error
    /// of the per-replication difference.
    Paired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs_mean: f64,
    pub lhs_se: f64,
    pub rhs_mean: f64,
    pub rhs_se: f64,
    pub z: f64,
    pub reps: u64,
    pub z_crit: f64,
    pub pass: bool,
    pub pairing: Pairing,
    /// Means after discarding the top and bottom 0.5% of each arm. Diagnostic
    /// only; the verdict uses the raw means.
    pub lhs_trimmed: f64,
    pub rhs_trimmed: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().copied().collect::<KahanSum>().value() / n;
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).collect::<KahanSum>().value();
    let var = if xs.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Symmetrically trimmed mean dropping `frac` of the sample at each end.
pub fn trimmed_mean(xs: &[f64], frac: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = ((v.len() as f64) * frac).floor() as usize;
    let kept = &v[k..v.len() - k];
    kept.iter().copied().collect::<KahanSum>().value() / kept.len() as f64
}

const TRIM: f64 = 0.005;

fn z_of(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

impl IdentityReport {
    /// Report from two independently sampled arms.
    pub fn independent(lhs: &[f64], rhs: &[f64], z_crit: f64) -> Self {
        let (lm, lv) = mean_var(lhs);
        let (rm, rv) = mean_var(rhs);
        let lhs_se = (lv / lhs.len() as f64).sqrt();
        let rhs_se = (rv / rhs.len() as f64).sqrt();
        let z = z_of(lm - rm, (lhs_se * lhs_se + rhs_se * rhs_se).sqrt());
        Self {
            lhs_mean: lm,
            lhs_se,
            rhs_mean: rm,
            rhs_se,
            z,
            reps: lhs.len().min(rhs.len()) as u64,
            z_crit,
            pass: z.abs() < z_crit,
            pairing: Pairing::Independent,
            lhs_trimmed: trimmed_mean(lhs, TRIM),
            rhs_trimmed: trimmed_mean(rhs, TRIM),
        }
    }

    /// Report from arms evaluated on the same replications.
    pub fn paired(lhs: &[f64], rhs: &[f64], z_crit: f64) -> Self {
        let mut r = Self::independent(lhs, rhs, z_crit);
        let diff: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - b).collect();
        let (dm, dv) = mean_var(&diff);
        r.z = z_of(dm, (dv / diff.len() as f64).sqrt());
        r.pass = r.z.abs() < z_crit;
        r.pairing = Pairing::Paired;
        r
    }

    /// Replaces the right-hand arm by a known constant (zero standard error).
    pub fn against_constant(lhs: &[f64], value: f64, z_crit: f64) -> Self {
        let (lm, lv) = mean_var(lhs);
        let lhs_se = (lv / lhs.len() as f64).sqrt();
        let z = z_of(lm - value, lhs_se);
        Self {
            lhs_mean: lm,
            lhs_se,
            rhs_mean: value,
            rhs_se: 0.0,
            z,
            reps: lhs.len() as u64,
            z_crit,
            pass: z.abs() < z_crit,
            pairing: Pairing::Independent,
            lhs_trimmed: trimmed_mean(lhs, TRIM),
            rhs_trimmed: value,
        }
    }

    /// `z` of the difference between the discrepancies of two independent
    /// reports, `(l₁ − r₁) − (l₂ − r₂)`.
    pub fn cross_z(&self, other: &Self) -> f64 {
        let d = (self.lhs_mean - self.rhs_mean) - (other.lhs_mean - other.rhs_mean);
        let se = (self.lhs_se.powi(2) + self.rhs_se.powi(2) + other.lhs_se.powi(2) + other.rhs_se.powi(2)).sqrt();
        z_of(d, se)
    }
}
