//! Brownian positive excursions under the Itô measure `n₊`, normalized so
//! that `n₊{R > x} = (2π)^{-1/2} x^{-1/2}`, sampled from a length-tilted
//! probability measure `f(R) dn₊`.

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prm::open_unit;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::representations::local_time::{band_local_time, refined_local_time, LocalTimeEstimator};
use crate::rng::SimRng;

/// `n₊` length density `x^{-3/2} / (2√(2π))`.
pub fn length_density(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    x.powf(-1.5) / (2.0 * (2.0 * std::f64::consts::PI).sqrt())
}

/// `n₊{R > x}`.
pub fn length_tail(x: f64) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `√(π/2)·(x ∧ 1)`.
pub fn canonical_tilt(x: f64) -> f64 {
    (std::f64::consts::PI / 2.0).sqrt() * x.min(1.0)
}

type TiltFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Sampler of excursion lengths from `f(R) n₊(dR)`.
#[derive(Clone)]
pub struct LengthSampler {
    kind: TiltKind,
}

#[derive(Clone)]
enum TiltKind {
    Canonical,
    /// Rejection from the canonical density; `bound ≥ sup f / f_canonical`.
    Custom {
        f: TiltFn,
        bound: f64,
    },
}

impl std::fmt::Debug for LengthSampler {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            TiltKind::Canonical => fm.write_str("LengthSampler(canonical)"),
            TiltKind::Custom { bound, .. } => write!(fm, "LengthSampler(custom, bound {bound})"),
        }
    }
}

impl Default for LengthSampler {
    fn default() -> Self {
        Self::canonical()
    }
}

/// `∫ f dn₊` over lengths, split at 1 to isolate the two singular ends.
fn integrate_lengths(h: impl Fn(f64) -> f64) -> Result<f64> {
    let o = QuadratureOptions::default();
    let hh = |x: f64| h(x) * length_density(x);
    Ok(integrate(hh, 0.0, 1.0, &o)? + integrate(hh, 1.0, f64::INFINITY, &o)?)
}

impl LengthSampler {
    pub fn canonical() -> Self {
        Self {
            kind: TiltKind::Canonical,
        }
    }

    /// Tilt `f` with `f ≤ bound·√(π/2)(x ∧ 1)`. Fails unless
    /// `∫ f dn₊ = 1` within `1e-6`.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, bound: f64) -> Result<Self> {
        let f: TiltFn = Arc::new(f);
        let total = integrate_lengths(|x| f(x))?;
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::UnnormalizedTilt(total));
        }
        if !(bound >= 1.0 && bound.is_finite()) {
            return Err(Error::InvalidParameter(format!("rejection bound {bound}")));
        }
        Ok(Self {
            kind: TiltKind::Custom { f, bound },
        })
    }

    pub fn tilt(&self, x: f64) -> f64 {
        match &self.kind {
            TiltKind::Canonical => canonical_tilt(x),
            TiltKind::Custom { f, .. } => f(x),
        }
    }

    /// Inverse CDF of `¼x^{-1/2}` on `(0, 1]`, `¼x^{-3/2}` on `(1, ∞)`.
    fn sample_canonical(rng: &mut SimRng) -> f64 {
        let u = open_unit(rng);
        if u < 0.5 {
            (2.0 * u) * (2.0 * u)
        } else {
            let w = 1.0 - u;
            1.0 / (4.0 * w * w)
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        match &self.kind {
            TiltKind::Canonical => Self::sample_canonical(rng),
            TiltKind::Custom { f, bound } => loop {
                let x = Self::sample_canonical(rng);
                let u: f64 = rng.random();
                if u * bound * canonical_tilt(x) <= f(x) {
                    return x;
                }
            },
        }
    }

    /// `∫ (c·f(R) ∧ 1) n₊(dR)`.
    pub fn retained_integral(&self, c: f64) -> Result<f64> {
        if c <= 0.0 {
            return Ok(0.0);
        }
        match &self.kind {
            TiltKind::Canonical => {
                let k = (std::f64::consts::PI / 2.0).sqrt();
                Ok(if c * k <= 1.0 {
                    c
                } else {
                    2.0 * (c * k).sqrt() / (2.0 * std::f64::consts::PI).sqrt()
                })
            }
            TiltKind::Custom { f, .. } => integrate_lengths(|x| (c * f(x)).min(1.0)),
        }
    }
}

/// Number of grid points used for an excursion of length `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GridRule {
    Fixed {
        m: usize,
    },
    /// `clamp(R·per_unit, min, max)`.
    Adaptive {
        per_unit: f64,
        min: usize,
        max: usize,
    },
}

impl GridRule {
    pub fn points(&self, length: f64) -> usize {
        match *self {
            Self::Fixed { m } => m,
            Self::Adaptive { per_unit, min, max } => ((length * per_unit).ceil() as usize).clamp(min, max),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let smallest = match *self {
            Self::Fixed { m } => m,
            Self::Adaptive { min, max, .. } => min.min(max),
        };
        if smallest < 3 {
            return Err(Error::GridTooSmall(smallest));
        }
        Ok(())
    }
}

/// Normalized excursion on `[0, 1]` at `m` equally spaced points, as the
/// modulus of a three-dimensional Brownian bridge from 0 to 0. The values are
/// exact in law at the grid points.
pub fn unit_excursion(m: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
    if m < 3 {
        return Err(Error::GridTooSmall(m));
    }
    let steps = m - 1;
    let sd = (1.0 / steps as f64).sqrt();
    let mut sq = vec![0.0; m];
    for _ in 0..3 {
        let mut walk = Vec::with_capacity(m);
        walk.push(0.0);
        let mut s = 0.0;
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(rng);
            s += sd * z;
            walk.push(s);
        }
        let end = walk[steps];
        for (i, (w, acc)) in walk.iter().zip(sq.iter_mut()).enumerate() {
            let b = w - end * i as f64 / steps as f64;
            *acc += b * b;
        }
    }
    let mut out: Vec<f64> = sq.into_iter().map(f64::sqrt).collect();
    out[0] = 0.0;
    out[steps] = 0.0;
    Ok(out)
}

/// Excursion of length `R`, stored as a seed and materialized on first use.
/// Clones share the materialized path.
#[derive(Debug, Clone)]
pub struct ExcursionPoint {
    length: f64,
    m: usize,
    seed: u64,
    path: Arc<OnceLock<Vec<f64>>>,
}

/// Beyond `HEIGHT_CUTOFF·√R` the normalized excursion maximum has tail
/// probability below `1e-30`; local times above it are returned as zero
/// without materializing the path.
pub const HEIGHT_CUTOFF: f64 = 6.0;

impl ExcursionPoint {
    pub fn new(length: f64, m: usize, seed: u64) -> Result<Self> {
        if m < 3 {
            return Err(Error::GridTooSmall(m));
        }
        Ok(Self {
            length,
            m,
            seed,
            path: Arc::new(OnceLock::new()),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn grid_points(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `path(t_i) = √R·e(t_i/R)` at `t_i = iR/(m − 1)`.
    pub fn path(&self) -> &[f64] {
        self.path.get_or_init(|| {
            let mut rng = SimRng::seed_from_u64(self.seed);
            let scale = self.length.sqrt();
            unit_excursion(self.m, &mut rng)
                .expect("m checked on construction")
                .into_iter()
                .map(|v| v * scale)
                .collect()
        })
    }

    pub fn dt(&self) -> f64 {
        self.length / (self.m - 1) as f64
    }

    pub fn default_bandwidth(&self) -> f64 {
        self.length.sqrt() * (self.m as f64).powf(-0.25)
    }

    /// `L^a_∞` of the excursion; zero for `a ≤ 0`.
    pub fn local_time(&self, a: f64, estimator: &LocalTimeEstimator) -> f64 {
        if a <= 0.0 || a > HEIGHT_CUTOFF * self.length.sqrt() {
            return 0.0;
        }
        match *estimator {
            LocalTimeEstimator::Band { epsilon } => {
                let eps = epsilon.unwrap_or_else(|| self.default_bandwidth());
                band_local_time(self.path(), self.dt(), a, eps)
            }
            LocalTimeEstimator::Refined { min_step } => {
                refined_local_time(self.path(), self.dt(), a, min_step, self.seed)
            }
        }
    }
}

/// Draws `R ~ f(R) n₊(dR)` and an excursion of that length on `m` points.
pub fn sample_excursion(lengths: &LengthSampler, m: usize, rng: &mut SimRng) -> Result<ExcursionPoint> {
    if m < 3 {
        return Err(Error::GridTooSmall(m));
    }
    let r = lengths.sample(rng);
    let seed: u64 = rng.random();
    let e = ExcursionPoint::new(r, m, seed)?;
    e.path();
    Ok(e)
}

/// Lazily materialized variant of [`sample_excursion`] with the grid size
/// chosen from the length.
pub fn sample_excursion_lazy(lengths: &LengthSampler, grid: &GridRule, rng: &mut SimRng) -> ExcursionPoint {
    let r = lengths.sample(rng);
    let seed: u64 = rng.random();
    ExcursionPoint::new(r, grid.points(r), seed).expect("grid rule validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFamily;

    #[test]
    fn canonical_tilt_is_normalized() {
        let total = integrate_lengths(canonical_tilt).unwrap();
        assert!((total - 1.0).abs() < 1e-7, "{total}");
        // P(R ≤ 1) = ½ under the tilted law
        let below = integrate(
            |x| canonical_tilt(x) * length_density(x),
            0.0,
            1.0,
            &QuadratureOptions::default(),
        )
        .unwrap();
        assert!((below - 0.5).abs() < 1e-7);
    }

    #[test]
    fn unnormalized_tilt_is_rejected() {
        assert!(matches!(
            LengthSampler::custom(|x| 2.0 * canonical_tilt(x), 2.0),
            Err(Error::UnnormalizedTilt(_))
        ));
    }

    #[test]
    fn retained_integral_closed_form() {
        let s = LengthSampler::canonical();
        let custom = LengthSampler::custom(canonical_tilt, 1.0).unwrap();
        for c in [0.1, 0.79, 2.0, 1000.0] {
            let a = s.retained_integral(c).unwrap();
            let b = custom.retained_integral(c).unwrap();
            assert!((a - b).abs() < 1e-6 * a.max(1.0), "{c}: {a} vs {b}");
        }
    }

    #[test]
    fn tilted_lengths_and_tail() {
        let s = LengthSampler::canonical();
        let mut rng = StreamFamily::tagged(5, "len").stream(0);
        let n = 100_000;
        let lengths: Vec<f64> = (0..n).map(|_| s.sample(&mut rng)).collect();
        let below = lengths.iter().filter(|&&x| x <= 1.0).count() as f64 / n as f64;
        assert!((below - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        // untilted tail n₊{R > 2} by importance weights 1/f(R)
        let tail: f64 = lengths
            .iter()
            .map(|&x| if x > 2.0 { 1.0 / canonical_tilt(x) } else { 0.0 })
            .sum::<f64>()
            / n as f64;
        let exact = length_tail(2.0);
        assert!((tail - exact).abs() < 0.02 * exact, "{tail} vs {exact}");
    }

    #[test]
    fn excursion_shape() {
        let mut rng = StreamFamily::tagged(6, "exc").stream(0);
        for m in [3, 10, 1000] {
            let e = unit_excursion(m, &mut rng).unwrap();
            assert_eq!(e.len(), m);
            assert_eq!(e[0], 0.0);
            assert_eq!(e[m - 1], 0.0);
            assert!(e[1..m - 1].iter().all(|&v| v > 0.0));
        }
        assert!(matches!(unit_excursion(2, &mut rng), Err(Error::GridTooSmall(2))));
        let p = sample_excursion(&LengthSampler::canonical(), 50, &mut rng).unwrap();
        assert_eq!(p.path()[0], 0.0);
        assert_eq!(*p.path().last().unwrap(), 0.0);
    }

    #[test]
    fn lazy_points_are_reproducible() {
        let p = ExcursionPoint::new(2.0, 100, 77).unwrap();
        let q = p.clone();
        let r = ExcursionPoint::new(2.0, 100, 77).unwrap();
        assert_eq!(p.path(), r.path());
        assert_eq!(q.path().as_ptr(), p.path().as_ptr());
    }

    #[test]
    fn unit_excursion_mean_area() {
        // E ∫ e = √(π/8)
        let fam = StreamFamily::tagged(8, "area");
        let areas: Vec<f64> = crate::mc::collect(4000, &fam, |rng, _| {
            let e = unit_excursion(2001, rng).unwrap();
            e.iter().sum::<f64>() / 2000.0
        });
        let (m, se) = crate::stats::mean_se(&areas);
        let exact = (std::f64::consts::PI / 8.0).sqrt();
        assert!((m - exact).abs() < 4.0 * se + 0.005, "{m} vs {exact}");
    }
}
