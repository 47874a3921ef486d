//! Occupation-density (local time) estimators for discretized paths.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::rng::{keyed_normal, mix64};
use crate::scalar::Scalar;

/// How `L^a` is estimated from a path sampled on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LocalTimeEstimator {
    /// Time spent by the piecewise-linear interpolant within `ε` of the
    /// level, divided by `2ε`. `None` uses `ε = √R·m^{-1/4}`.
    Band { epsilon: Option<f64> },
    /// Brownian-bridge refinement of the grid segments near the level down to
    /// `min_step`, followed by the exact conditional expectation of the bridge
    /// local time on each remaining segment. Gives exactly zero when the
    /// refined path never crosses the level.
    Refined { min_step: f64 },
}

impl Default for LocalTimeEstimator {
    fn default() -> Self {
        Self::Band { epsilon: None }
    }
}

/// Lebesgue measure of `{s ∈ [0, 1]: |x + (y − x)s − a| < ε}`.
fn band_fraction<T: Scalar>(x: T, y: T, a: T, eps: T) -> T {
    let d = y - x;
    if d == T::zero() {
        return if (x - a).abs() < eps { T::one() } else { T::zero() };
    }
    let s1 = (a - eps - x) / d;
    let s2 = (a + eps - x) / d;
    let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
    (hi.min(T::one()) - lo.max(T::zero())).max(T::zero())
}

/// `(2ε)⁻¹ |{t: |x(t) − a| < ε}|` for the linear interpolant of `values`
/// sampled with spacing `dt`. Zero for `a ≤ 0`.
pub fn band_local_time<T: Scalar>(values: &[T], dt: T, a: T, eps: T) -> T {
    if a <= T::zero() || values.len() < 2 {
        return T::zero();
    }
    let occupied = values
        .windows(2)
        .fold(T::zero(), |acc, w| acc + band_fraction(w[0], w[1], a, eps));
    occupied * dt / (T::of(2.0) * eps)
}

/// Scaled complementary error function `e^{z²} erfc(z)` for `z ≥ 0`.
fn erfcx(z: f64) -> f64 {
    if z < 10.0 {
        erfc(z) * (z * z).exp()
    } else {
        // asymptotic series, relative error below 1e-8 for z ≥ 10
        let w = 1.0 / (2.0 * z * z);
        (1.0 - w + 3.0 * w * w - 15.0 * w * w * w + 105.0 * w.powi(4)) / (z * std::f64::consts::PI.sqrt())
    }
}

/// `E[L^a_h | B_0 = x, B_h = y]` for a Brownian bridge:
/// `½√(2πh)·erfc(c/√(2h))·e^{d²/(2h)}` with `c = |a − x| + |a − y|`, `d = y − x`.
pub fn bridge_expected_local_time(x: f64, y: f64, h: f64, a: f64) -> f64 {
    let c = (a - x).abs() + (a - y).abs();
    let d = y - x;
    let z = c / (2.0 * h).sqrt();
    0.5 * (2.0 * std::f64::consts::PI * h).sqrt() * erfcx(z) * ((d * d - c * c) / (2.0 * h)).exp()
}

/// Probability that a Brownian bridge from `x` to `y` over time `h` hits `a`.
pub fn bridge_hit_probability(x: f64, y: f64, h: f64, a: f64) -> f64 {
    if (x - a) * (y - a) <= 0.0 {
        1.0
    } else {
        (-2.0 * (a - x).abs() * (a - y).abs() / h).exp()
    }
}

/// Segments whose bridge hits the level with smaller probability are dropped.
pub const HIT_PRUNE: f64 = 1e-10;

struct Refiner {
    seed: u64,
    a: f64,
    min_step: f64,
    total: f64,
    straddled: bool,
}

impl Refiner {
    fn visit(&mut self, x: f64, y: f64, h: f64, node: u64, depth: u32) {
        if bridge_hit_probability(x, y, h, self.a) < HIT_PRUNE {
            return;
        }
        if h <= self.min_step || depth >= 60 {
            if (x - self.a) * (y - self.a) <= 0.0 {
                self.straddled = true;
            }
            self.total += bridge_expected_local_time(x, y, h, self.a);
            return;
        }
        let key = mix64(self.seed ^ mix64(node ^ ((depth as u64) << 58)));
        let mid = 0.5 * (x + y) + (0.25 * h).sqrt() * keyed_normal(key);
        self.visit(x, mid, 0.5 * h, mix64(node ^ 0x5EED_0001), depth + 1);
        self.visit(mid, y, 0.5 * h, mix64(node ^ 0x5EED_0002), depth + 1);
    }
}

/// Refined estimator of `L^a` for `values` on a grid with spacing `dt`.
/// Midpoints are drawn from a counter-based generator keyed by `seed` and the
/// position in the dyadic refinement, so every level sees the same refined
/// path.
pub fn refined_local_time(values: &[f64], dt: f64, a: f64, min_step: f64, seed: u64) -> f64 {
    if a <= 0.0 || values.len() < 2 {
        return 0.0;
    }
    let mut r = Refiner {
        seed,
        a,
        min_step,
        total: 0.0,
        straddled: false,
    };
    for (i, w) in values.windows(2).enumerate() {
        r.visit(w[0], w[1], dt, mix64(i as u64), 0);
    }
    if r.straddled {
        r.total
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureOptions};

    #[test]
    fn tent_has_local_time_two() {
        // slope ±1 tent of height 1 on [0, 2]: Σ 1/|slope| = 2
        let values: Vec<f64> = (0..=2000).map(|i| 1.0 - ((i as f64) / 1000.0 - 1.0).abs()).collect();
        let dt = 2.0 / 2000.0;
        for eps in [0.1, 0.01, 0.001] {
            let l = band_local_time(&values, dt, 0.5, eps);
            assert!((l - 2.0).abs() < 1e-9, "eps={eps}: {l}");
        }
        assert_eq!(band_local_time(&values, dt, 0.0, 0.01), 0.0);
        assert_eq!(band_local_time(&values, dt, -1.0, 0.01), 0.0);
        assert_eq!(band_local_time(&values, dt, 1.2, 0.01), 0.0);
        let f: Vec<f32> = values.iter().map(|&v| v as f32).collect();
        assert!((band_local_time(&f, dt as f32, 0.5, 0.01) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn band_occupation_formula_is_exact_for_linear_paths() {
        let values = [0.0, 0.7, 0.2, 1.3, 0.0];
        let dt = 0.25;
        let eps = 0.05;
        let o = QuadratureOptions {
            rel_tol: 1e-10,
            ..Default::default()
        };
        // the band around levels in (−ε, 0] is cut off by the a ≤ 0 convention
        let mass = integrate(|a: f64| band_local_time(&values, dt, a, eps), 0.0, 1.4, &o).unwrap();
        let lost = integrate(
            |a: f64| {
                let v: Vec<f64> = values.to_vec();
                let occupied: f64 = v.windows(2).map(|w| band_fraction(w[0], w[1], a, eps)).sum();
                occupied * dt / (2.0 * eps)
            },
            -eps,
            0.0,
            &o,
        )
        .unwrap();
        assert!((mass + lost - 1.0).abs() < 1e-6, "{mass} + {lost}");
    }

    #[test]
    fn bridge_local_time_integrates_to_duration() {
        // ∫ E[L^a | x, y] da = h
        let (x, y, h) = (0.3, -0.2, 0.5);
        let o = QuadratureOptions::default();
        let total = integrate(
            |a| bridge_expected_local_time(x, y, h, a),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &o,
        )
        .unwrap();
        assert!((total - h).abs() < 1e-7, "{total}");
    }

    #[test]
    fn erfcx_branches_agree() {
        let below = erfcx(10.0 - 1e-12);
        let above = erfcx(10.0);
        assert!((below - above).abs() < 1e-8 * above);
        // steep straddling segment: E L ≈ h/|d|
        let v = bridge_expected_local_time(-10.0, 10.0, 1e-2, 0.0);
        assert!((v - 1e-2 / 20.0).abs() < 1e-4 * v);
    }

    #[test]
    fn refined_estimator_is_zero_off_the_path() {
        let values = [0.0, 0.1, 0.05, 0.0];
        assert_eq!(refined_local_time(&values, 0.01, 2.0, 1e-4, 9), 0.0);
        assert_eq!(refined_local_time(&values, 0.01, -0.5, 1e-4, 9), 0.0);
        let l = refined_local_time(&values, 0.01, 0.07, 1e-5, 9);
        assert!(l > 0.0);
    }
}
