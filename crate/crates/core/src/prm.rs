//! Poisson random measures on representation spaces.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc;
use crate::measure::CutoffFunction;
use crate::report::IdentityReport;
use crate::rng::{SimRng, StreamFamily};
use crate::stats::KahanSum;

/// Integrand handed to [`LevyRepresentation::integrate`].
pub type PointFn<'a, P> = dyn Fn(&P) -> Complex64 + Sync + 'a;

/// Measure space `(S, n)` with a representation `V_t(s)` of a Lévy measure.
///
/// `sample_point` draws from the probability measure `n⁽¹⁾ = g·n` and
/// `density` returns `g`. When `finite_mass` is `Some(θ)` the sampler draws
/// from `n/θ`, i.e. `g ≡ 1/θ`.
pub trait LevyRepresentation: Send + Sync {
    type Point: Clone + Send + Sync + std::fmt::Debug;

    fn sample_point(&self, rng: &mut SimRng) -> Self::Point;

    fn density(&self, s: &Self::Point) -> f64;

    /// `V_t(s)`.
    fn kernel(&self, t: f64, s: &Self::Point) -> f64;

    fn finite_mass(&self) -> Option<f64> {
        None
    }

    /// `∫ h dn`, when the representation can integrate against `n`.
    fn integrate(&self, _h: &PointFn<'_, Self::Point>) -> Result<Complex64> {
        Err(Error::NoQuadrature)
    }

    /// Expected number of ladder points kept within budget `τ`,
    /// `∫ (τ g ∧ 1) dn`.
    fn expected_retained(&self, tau: f64) -> Result<f64> {
        self.integrate(&|s| Complex64::new((tau * self.density(s)).min(1.0), 0.0))
            .map(|c| c.re)
    }

    /// Intensity mass of the part of the window beyond the budget,
    /// `n-mass of {(s, r): τ < r ≤ 1/g(s)} = ∫ (1 − τ g)⁺ dn`. Infinite when
    /// unknown.
    fn discarded_mass(&self, tau: f64) -> f64 {
        self.integrate(&|s| Complex64::new((1.0 - tau * self.density(s)).max(0.0), 0.0))
            .map(|c| c.re)
            .unwrap_or(f64::INFINITY)
    }
}

/// Monte Carlo spot check of `∫ g dn = 1` for finite-mass representations:
/// returns `max |g(s)·θ − 1|` over `probes` sampled points.
pub fn spot_check_density<R: LevyRepresentation>(rep: &R, probes: usize, rng: &mut SimRng) -> Result<f64> {
    let theta = rep.finite_mass().ok_or(Error::MissingFiniteMass)?;
    Ok((0..probes)
        .map(|_| {
            let s = rep.sample_point(rng);
            (rep.density(&s) * theta - 1.0).abs()
        })
        .fold(0.0, f64::max))
}

/// One realization of a Poisson random measure.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration<P> {
    pub points: Vec<P>,
    /// Arrival marks `Γ_j` of the retained points (empty for direct sampling).
    pub marks: Vec<f64>,
    /// Number of ladder arrivals `Γ_j ≤ τ`, retained or not.
    pub ladder_len: usize,
}

impl<P> Default for PointConfiguration<P> {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            marks: Vec::new(),
            ladder_len: 0,
        }
    }
}

impl<P: Clone> PointConfiguration<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `N + δ_s`.
    pub fn with_point(&self, s: P) -> Self {
        let mut out = self.clone();
        out.points.push(s);
        out
    }

    /// Union of two configurations.
    pub fn merged(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.points.extend(other.points.iter().cloned());
        out.marks.extend(other.marks.iter().copied());
        out.ladder_len += other.ladder_len;
        out
    }
}

/// How a Poisson random measure is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "budget")]
pub enum Window {
    /// Poisson count plus i.i.d. points; needs finite total mass.
    Finite,
    /// Thinned arrival ladder up to the given `Γ` budget.
    Budget(f64),
}

/// Finite-intensity PRM: `Poisson(θ)` points drawn i.i.d. from `n/θ`.
pub fn sample_prm_finite<R: LevyRepresentation>(rep: &R, rng: &mut SimRng) -> Result<PointConfiguration<R::Point>> {
    let theta = rep.finite_mass().ok_or(Error::MissingFiniteMass)?;
    let count = poisson_count(theta, rng);
    Ok(PointConfiguration {
        points: (0..count).map(|_| rep.sample_point(rng)).collect(),
        marks: Vec::new(),
        ladder_len: count,
    })
}

pub(crate) fn poisson_count(mean: f64, rng: &mut SimRng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// Walks the arrival ladder `Γ_1 < Γ_2 < …` of unit-rate exponential partial
/// sums up to `τ`, pairing each arrival with `ξ_j ~ n⁽¹⁾` and calling
/// `visit(ξ_j, Γ_j, retained)` with `retained = g(ξ_j) ≤ 1/Γ_j`. Returns the
/// number of arrivals within the budget.
///
/// Per arrival the generator is consumed in the fixed order `E_j, ξ_j`, and
/// the arrival that overshoots `τ` draws no point, so a larger budget only
/// appends terms.
pub fn walk_ladder<R: LevyRepresentation>(
    rep: &R,
    tau: f64,
    rng: &mut SimRng,
    mut visit: impl FnMut(R::Point, f64, bool),
) -> usize {
    let mut gamma = 0.0;
    let mut count = 0;
    if tau <= 0.0 {
        return 0;
    }
    loop {
        let e: f64 = Exp1.sample(rng);
        gamma += e;
        if gamma > tau {
            return count;
        }
        count += 1;
        let s = rep.sample_point(rng);
        let retained = rep.density(&s) * gamma <= 1.0;
        visit(s, gamma, retained);
    }
}

/// PRM with intensity `n` restricted to the window `{(s, r): r ≤ 1/g(s), r ≤ τ}`
/// realized by thinning the arrival ladder.
pub fn sample_prm_thinned<R: LevyRepresentation>(rep: &R, tau: f64, rng: &mut SimRng) -> PointConfiguration<R::Point> {
    let mut cfg = PointConfiguration::default();
    cfg.ladder_len = walk_ladder(rep, tau, rng, |s, gamma, keep| {
        if keep {
            cfg.points.push(s);
            cfg.marks.push(gamma);
        }
    });
    cfg
}

pub fn sample_prm<R: LevyRepresentation>(
    rep: &R,
    window: Window,
    rng: &mut SimRng,
) -> Result<PointConfiguration<R::Point>> {
    match window {
        Window::Finite => sample_prm_finite(rep, rng),
        Window::Budget(tau) => Ok(sample_prm_thinned(rep, tau, rng)),
    }
}

/// `N(q) = Σ_{s ∈ N} q(s)`.
pub fn n_of_q<P>(config: &PointConfiguration<P>, q: impl Fn(&P) -> f64) -> f64 {
    config.points.iter().map(q).collect::<KahanSum>().value()
}

/// `∫ f χ(f) dn` by the representation's quadrature.
pub fn compensator_by_quadrature<R: LevyRepresentation>(
    rep: &R,
    f: &(dyn Fn(&R::Point) -> f64 + Sync),
    chi: CutoffFunction,
) -> Result<f64> {
    rep.integrate(&|s| {
        let v = f(s);
        Complex64::new(chi.truncate_scalar(v), 0.0)
    })
    .map(|c| c.re)
}

/// `I_N(f) = Σ_{s ∈ N} f(s) − ∫ f χ(f) dn`, with the compensator supplied by
/// the caller.
pub fn compensated_integral<P>(config: &PointConfiguration<P>, f: impl Fn(&P) -> f64, compensator: f64) -> Result<f64> {
    if !compensator.is_finite() {
        return Err(Error::NonFiniteCompensator(compensator));
    }
    Ok(n_of_q(config, f) - compensator)
}

/// Comparison of the empirical characteristic function of `I_N(f)` with
/// `exp ∫ (e^{iθf} − 1 − iθ f χ(f)) dn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfReport {
    pub theta: Vec<f64>,
    pub empirical: Vec<Complex64>,
    pub oracle: Vec<Complex64>,
    pub deviation: Vec<f64>,
    /// `|empirical − oracle|` over its Monte Carlo standard error.
    pub z: Vec<f64>,
    pub max_deviation: f64,
    pub compensator: f64,
    pub reps: u64,
    /// `4/√reps`.
    pub tolerance: f64,
    pub pass: bool,
}

pub fn empirical_cf_check<R: LevyRepresentation>(
    rep: &R,
    f: &(dyn Fn(&R::Point) -> f64 + Sync),
    chi: CutoffFunction,
    theta_grid: &[f64],
    window: Window,
    reps: usize,
    family: &StreamFamily,
) -> Result<CfReport> {
    let compensator = compensator_by_quadrature(rep, f, chi)?;
    let mut oracle = Vec::with_capacity(theta_grid.len());
    for &th in theta_grid {
        let log_cf = rep.integrate(&|s| {
            let v = f(s);
            Complex64::new(0.0, th * v).exp() - 1.0 - Complex64::new(0.0, th * chi.truncate_scalar(v))
        })?;
        oracle.push(log_cf.exp());
    }
    let samples: Vec<Result<f64>> = mc::collect(reps, family, |rng, _| {
        let cfg = sample_prm(rep, window, rng)?;
        compensated_integral(&cfg, f, compensator)
    });
    let samples: Vec<f64> = samples.into_iter().collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let mut empirical = Vec::new();
    let mut deviation = Vec::new();
    let mut z = Vec::new();
    for (k, &th) in theta_grid.iter().enumerate() {
        let (mut c, mut s, mut c2, mut s2) = (KahanSum::new(), KahanSum::new(), KahanSum::new(), KahanSum::new());
        for &x in &samples {
            let (si, co) = (th * x).sin_cos();
            c.add(co);
            s.add(si);
            c2.add(co * co);
            s2.add(si * si);
        }
        let mean = Complex64::new(c.value() / n, s.value() / n);
        let var = (c2.value() / n - mean.re * mean.re) + (s2.value() / n - mean.im * mean.im);
        let se = (var.max(0.0) / n).sqrt();
        let d = (mean - oracle[k]).norm();
        empirical.push(mean);
        deviation.push(d);
        z.push(if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    let max_deviation = deviation.iter().copied().fold(0.0, f64::max);
    let tolerance = 4.0 / n.sqrt();
    Ok(CfReport {
        theta: theta_grid.to_vec(),
        empirical,
        oracle,
        deviation,
        z,
        max_deviation,
        compensator,
        reps: reps as u64,
        tolerance,
        pass: max_deviation < tolerance,
    })
}

/// Both sides of the Mecke-Palm formula
/// `E Σ_{s ∈ N} h(s, N) = ∫ E h(s, N + δ_s) n(ds)` on a finite-mass space,
/// the right side by importance sampling `s ~ n⁽¹⁾` with weight `1/g(s)`.
pub fn mecke_palm_check<R, H>(rep: &R, h: H, reps: usize, family: &StreamFamily, z_crit: f64) -> Result<IdentityReport>
where
    R: LevyRepresentation,
    H: Fn(&R::Point, &PointConfiguration<R::Point>) -> f64 + Sync,
{
    rep.finite_mass().ok_or(Error::MissingFiniteMass)?;
    let lhs: Vec<f64> = mc::collect(reps, &family.child("mecke-lhs"), |rng, _| {
        let cfg = sample_prm_finite(rep, rng).expect("finite mass checked");
        cfg.points.iter().map(|s| h(s, &cfg)).collect::<KahanSum>().value()
    });
    let rhs: Vec<f64> = mc::collect(reps, &family.child("mecke-rhs"), |rng, _| {
        let s = rep.sample_point(rng);
        let cfg = sample_prm_finite(rep, rng).expect("finite mass checked");
        h(&s, &cfg.with_point(s.clone())) / rep.density(&s)
    });
    Ok(IdentityReport::independent(&lhs, &rhs, z_crit))
}

/// Draws a uniform `(0, 1)` variate; shared helper for samplers.
#[inline]
pub(crate) fn open_unit(rng: &mut SimRng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
