//! Generalized shot-noise series `Σ_j V_t(ξ_j) 1{g(ξ_j) ≤ Γ_j⁻¹}` truncated
//! at a `Γ` budget, with optional per-term centering.

use std::collections::HashMap;

use num_complex::Complex64;
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::CutoffFunction;
use crate::path::SamplePath;
use crate::prm::{walk_ladder, LevyRepresentation};
use crate::representations::bessel::{BesqRep, ExcursionSettings, FellerRep};
use crate::representations::levy::{JumpLaw, LevyProcessRep};
use crate::rng::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// `S⁽⁰⁾_t + shift(t)`, where the caller's shift is `b(t) − c(t)`.
    None,
    /// `Σ_j [V_t(ξ_j) 1{…} − c_j(t)] + shift(t)`, where the shift is `b(t)`.
    PerTerm,
}

/// Series description. `shift[i]` is added at `time_grid[i]`.
pub struct SeriesConfig<R> {
    pub rep: R,
    pub gamma_budget: f64,
    pub time_grid: Vec<f64>,
    pub centering: Centering,
    pub shift: Vec<f64>,
    pub chi: CutoffFunction,
    cache: Mutex<HashMap<(usize, u64), f64>>,
}

impl<R: std::fmt::Debug> std::fmt::Debug for SeriesConfig<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SeriesConfig")
            .field("rep", &self.rep)
            .field("gamma_budget", &self.gamma_budget)
            .field("time_grid", &self.time_grid)
            .field("centering", &self.centering)
            .field("shift", &self.shift)
            .finish()
    }
}

/// One truncated series path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRealization {
    pub path: SamplePath,
    /// Retained terms.
    pub terms_used: usize,
    /// Arrivals `Γ_j ≤ τ`, retained or not.
    pub ladder_len: usize,
    /// `n`-mass of the window beyond the budget; infinite when the intensity
    /// near `g = 0` is not integrable.
    pub discarded_mass: f64,
}

impl<R: LevyRepresentation> SeriesConfig<R> {
    /// Fails with [`Error::BudgetExhausted`] when fewer than one term is
    /// expected within the budget while the discarded window has infinite
    /// mass.
    pub fn new(rep: R, gamma_budget: f64, time_grid: Vec<f64>, centering: Centering, shift: Vec<f64>) -> Result<Self> {
        if !(gamma_budget > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma budget {gamma_budget} must be positive"
            )));
        }
        if time_grid.is_empty() {
            return Err(Error::InvalidParameter("empty time grid".into()));
        }
        if shift.len() != time_grid.len() {
            return Err(Error::DimensionMismatch {
                expected: time_grid.len(),
                got: shift.len(),
            });
        }
        if rep.discarded_mass(gamma_budget).is_infinite() {
            let expected = rep.expected_retained(gamma_budget).unwrap_or(f64::INFINITY);
            if expected < 1.0 {
                return Err(Error::BudgetExhausted { budget: gamma_budget });
            }
        }
        Ok(Self {
            rep,
            gamma_budget,
            time_grid,
            centering,
            shift,
            chi: CutoffFunction::default(),
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Zero shift.
    pub fn unshifted(rep: R, gamma_budget: f64, time_grid: Vec<f64>, centering: Centering) -> Result<Self> {
        let n = time_grid.len();
        Self::new(rep, gamma_budget, time_grid, centering, vec![0.0; n])
    }

    pub fn with_cutoff(mut self, chi: CutoffFunction) -> Self {
        self.chi = chi;
        self.cache.lock().clear();
        self
    }

    /// `Σ_{i ≤ j} c_i(t) = ∫ ⟦V_t⟧ (j g ∧ 1) dn`, cached per `(j, t)`.
    pub fn cumulative_centering(&self, j: usize, t: f64) -> Result<f64> {
        if j == 0 {
            return Ok(0.0);
        }
        let key = (j, t.to_bits());
        if let Some(&v) = self.cache.lock().get(&key) {
            return Ok(v);
        }
        let jf = j as f64;
        let chi = self.chi;
        let v = self
            .rep
            .integrate(&|s| {
                let w = (jf * self.rep.density(s)).min(1.0);
                Complex64::new(chi.truncate_scalar(self.rep.kernel(t, s)) * w, 0.0)
            })?
            .re;
        if !v.is_finite() {
            return Err(Error::NonFiniteCompensator(v));
        }
        self.cache.lock().insert(key, v);
        Ok(v)
    }

    /// `c_j(t) = ∫ ⟦V_t⟧ {(jg ∧ 1) − ((j−1)g ∧ 1)} dn`.
    pub fn centering_term(&self, j: usize, t: f64) -> Result<f64> {
        if j == 0 {
            return Err(Error::InvalidParameter("centering terms are indexed from 1".into()));
        }
        Ok(self.cumulative_centering(j, t)? - self.cumulative_centering(j - 1, t)?)
    }

    /// Partial sums `Σ_{i ≤ J} c_i(t)` for `J = 1, 2, 4, …, j_max` and whether
    /// they look Cauchy. Convergence is an analytic hypothesis; this only
    /// flags visibly non-Cauchy behaviour.
    pub fn centering_diagnostics(&self, t: f64, j_max: usize) -> Result<CenteringDiagnostics> {
        let mut partial_sums = Vec::new();
        let mut j = 1;
        while j <= j_max.max(1) {
            partial_sums.push((j, self.cumulative_centering(j, t)?));
            j *= 2;
        }
        let cauchy = match partial_sums.len() {
            0..=2 => true,
            n => {
                let d1 = (partial_sums[n - 1].1 - partial_sums[n - 2].1).abs();
                let d0 = (partial_sums[n - 2].1 - partial_sums[n - 3].1).abs();
                let scale = 1.0 + partial_sums[n - 1].1.abs();
                d1 <= d0 || d1 < 1e-9 * scale
            }
        };
        Ok(CenteringDiagnostics {
            t,
            partial_sums,
            cauchy,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringDiagnostics {
    pub t: f64,
    pub partial_sums: Vec<(usize, f64)>,
    pub cauchy: bool,
}

/// Draws one truncated series path. `visit` sees every ladder arrival
/// `(ξ_j, Γ_j, retained)` after it has been accounted for.
pub fn generate_series_with<R: LevyRepresentation>(
    cfg: &SeriesConfig<R>,
    rng: &mut SimRng,
    mut visit: impl FnMut(&R::Point, f64, bool),
) -> Result<SeriesRealization> {
    let mut values = cfg.shift.clone();
    let mut terms_used = 0;
    let ladder_len = walk_ladder(&cfg.rep, cfg.gamma_budget, rng, |s, gamma, keep| {
        if keep {
            terms_used += 1;
            for (v, &t) in values.iter_mut().zip(&cfg.time_grid) {
                *v += cfg.rep.kernel(t, &s);
            }
        }
        visit(&s, gamma, keep);
    });
    if cfg.centering == Centering::PerTerm {
        for (v, &t) in values.iter_mut().zip(&cfg.time_grid) {
            *v -= cfg.cumulative_centering(ladder_len, t)?;
        }
    }
    Ok(SeriesRealization {
        path: SamplePath::new(cfg.time_grid.clone(), values),
        terms_used,
        ladder_len,
        discarded_mass: cfg.rep.discarded_mass(cfg.gamma_budget),
    })
}

pub fn generate_series<R: LevyRepresentation>(cfg: &SeriesConfig<R>, rng: &mut SimRng) -> Result<SeriesRealization> {
    generate_series_with(cfg, rng, |_, _, _| {})
}

/// Feller diffusion `dZ = σ√Z dW, Z₀ = a`:
/// `Z_t = Σ L^{σ²t/4}_∞(ξ_j) 1{f(R(ξ_j)) ≤ a Γ_j⁻¹}`, with `Z₀ = a`.
pub fn feller_config(
    a: f64,
    sigma: f64,
    settings: ExcursionSettings,
    tau: f64,
    grid: Vec<f64>,
) -> Result<SeriesConfig<FellerRep>> {
    let shift = grid.iter().map(|&t| if t == 0.0 { a } else { 0.0 }).collect();
    SeriesConfig::new(FellerRep::new(a, sigma, settings)?, tau, grid, Centering::None, shift)
}

pub fn feller_series(
    a: f64,
    sigma: f64,
    settings: ExcursionSettings,
    tau: f64,
    grid: Vec<f64>,
    rng: &mut SimRng,
) -> Result<SeriesRealization> {
    generate_series(&feller_config(a, sigma, settings, tau, grid)?, rng)
}

/// Squared Bessel process of dimension `β` started at 0:
/// `Y_t = Σ L^{t−η_j}_∞(ξ_j) 1{e^{−βη_j} f(R(ξ_j)) ≤ Γ_j⁻¹}`.
pub fn besq_config(beta: f64, settings: ExcursionSettings, tau: f64, grid: Vec<f64>) -> Result<SeriesConfig<BesqRep>> {
    SeriesConfig::unshifted(BesqRep::new(beta, settings)?, tau, grid, Centering::None)
}

pub fn besq_series(
    beta: f64,
    settings: ExcursionSettings,
    tau: f64,
    grid: Vec<f64>,
    rng: &mut SimRng,
) -> Result<SeriesRealization> {
    generate_series(&besq_config(beta, settings, tau, grid)?, rng)
}

/// `Y_t = drift·t + Σ_{jumps up to t} v` on `[0, horizon]`, where the jumps
/// arrive at rate `λ` with law `μ`. A jump law charging both half-lines uses
/// per-term centering; a one-signed one is summed directly.
pub fn levy_config(
    rate: f64,
    jumps: JumpLaw,
    horizon: f64,
    drift: f64,
    tau: f64,
    grid: Vec<f64>,
) -> Result<SeriesConfig<LevyProcessRep>> {
    let two_sided = match &jumps {
        JumpLaw::Atoms { points, weights } => {
            points.iter().zip(weights).any(|(&p, &w)| p < 0.0 && w > 0.0)
                && points.iter().zip(weights).any(|(&p, &w)| p > 0.0 && w > 0.0)
        }
        JumpLaw::Normal { .. } => true,
        JumpLaw::Exponential { .. } => false,
        JumpLaw::Uniform { low, high } => *low < 0.0 && *high > 0.0,
    };
    let rep = LevyProcessRep::new(rate, jumps, horizon)?;
    if two_sided {
        let mut cfg = SeriesConfig::unshifted(rep, tau, grid, Centering::PerTerm)?;
        // b(t) = drift·t + ∫⟦V_t⟧ dn so that the centred series has the same law
        let mut shift = Vec::with_capacity(cfg.time_grid.len());
        for &t in &cfg.time_grid {
            let full = cfg
                .rep
                .integrate(&|s| Complex64::new(CutoffFunction::default().truncate_scalar(cfg.rep.kernel(t, s)), 0.0))?;
            shift.push(drift * t + full.re);
        }
        cfg.shift = shift;
        Ok(cfg)
    } else {
        let shift = grid.iter().map(|&t| drift * t).collect();
        SeriesConfig::new(rep, tau, grid, Centering::None, shift)
    }
}

pub fn levy_series(
    rate: f64,
    jumps: JumpLaw,
    horizon: f64,
    drift: f64,
    tau: f64,
    grid: Vec<f64>,
    rng: &mut SimRng,
) -> Result<SeriesRealization> {
    generate_series(&levy_config(rate, jumps, horizon, drift, tau, grid)?, rng)
}
