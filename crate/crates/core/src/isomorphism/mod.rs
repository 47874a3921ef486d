//! Monte Carlo verification of isomorphism identities of the form
//! `E F(X + Z) = E[F(X) W]`.
//!
//! Each `verify_*` estimates both sides on independent child streams of the
//! caller's [`StreamFamily`] unless noted, and returns an
//! [`IdentityReport`](crate::report::IdentityReport).

mod dynkin;
mod series_iso;
mod size_bias;
mod small_time;
mod translation;

use std::fmt;
use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc;
use crate::measure::CutoffFunction;
use crate::prm::{sample_prm, LevyRepresentation, PointConfiguration, Window};
use crate::report::DEFAULT_Z_CRIT;
use crate::rng::{SimRng, StreamFamily};

pub use dynkin::{verify_dynkin, DynkinReport};
pub use series_iso::{verify_series_iso, SeriesIsoReport};
pub use size_bias::{
    reconstruct_from_size_bias, verify_size_bias, IdComponent, NonnegativeIdLaw, ReconstructionReport,
};
pub use small_time::{small_time_limit, LimitReport, DEFAULT_H_LADDER};
pub use translation::{
    verify_iso1_atom, verify_iso2, verify_iso3_iso4, verify_levy_translation, Iso1AtomReport, Iso34Report,
};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Functional of a path given by its values on the time grid (or of a random
/// vector given by its coordinates).
#[derive(Clone)]
pub struct Functional {
    pub name: String,
    /// `sup |F|`, when known.
    pub bound: Option<f64>,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Functional")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .finish()
    }
}

impl Functional {
    pub fn new(
        name: impl Into<String>,
        bound: Option<f64>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            bound,
            eval: Arc::new(eval),
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), Some(c.abs()), move |_| c)
    }

    /// `F(y) = e^{−y_i}`.
    pub fn exp_neg_coordinate(i: usize) -> Self {
        Self::new(format!("exp(-y[{i}])"), None, move |y| (-y[i]).exp())
    }

    /// `F(y) = e^{−Σ s_j y_j}`.
    pub fn laplace(s: Vec<f64>) -> Self {
        Self::new(format!("exp(-<s,y>) s={s:?}"), None, move |y| {
            (-s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()).exp()
        })
    }

    /// `F(y) = 1{y_i ≤ c}`.
    pub fn indicator_below(i: usize, c: f64) -> Self {
        Self::new(format!("1{{y[{i}] <= {c}}}"), Some(1.0), move |y| {
            if y[i] <= c {
                1.0
            } else {
                0.0
            }
        })
    }

    #[inline]
    pub fn eval(&self, y: &[f64]) -> f64 {
        (self.eval)(y)
    }
}

/// Deliberate violations used to confirm that a check has power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum NegativeControl {
    /// Multiplies the right-hand weight by the factor.
    ScaleWeight(f64),
    /// Omits the atom term `q(0_T)` from the right-hand weight.
    DropAtom,
    /// Uses this state instead of the true anchor on the right-hand side.
    WrongAnchor(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub reps: usize,
    pub z_crit: f64,
    #[serde(default)]
    pub control: Option<NegativeControl>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            reps: 10_000,
            z_crit: DEFAULT_Z_CRIT,
            control: None,
        }
    }
}

impl VerifyOptions {
    pub fn with_reps(reps: usize) -> Self {
        Self {
            reps,
            ..Self::default()
        }
    }

    pub fn with_control(mut self, control: NegativeControl) -> Self {
        self.control = Some(control);
        self
    }

    fn weight_scale(&self) -> f64 {
        match self.control {
            Some(NegativeControl::ScaleWeight(c)) => c,
            _ => 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::InvalidParameter(format!(
                "reps = {} must be at least 2",
                self.reps
            )));
        }
        if !(self.z_crit > 0.0) {
            return Err(Error::InvalidParameter(format!("z_crit = {}", self.z_crit)));
        }
        Ok(())
    }
}

/// `X_t = Σ_{s ∈ N} V_t(s) + offset(t)` on a time grid, with `N` drawn on a
/// [`Window`].
#[derive(Debug, Clone)]
pub struct PrmProcess<R> {
    pub rep: R,
    pub grid: Vec<f64>,
    pub window: Window,
    /// Deterministic part `b(t) − c(t)`.
    pub offset: Vec<f64>,
    /// Scale of an independent Brownian part `σB_t`.
    pub sigma: f64,
}

/// One draw of the process with its point configuration.
#[derive(Debug, Clone)]
pub struct ProcessDraw<P> {
    pub path: Vec<f64>,
    pub config: PointConfiguration<P>,
}

impl<R: LevyRepresentation> PrmProcess<R> {
    pub fn new(rep: R, grid: Vec<f64>, window: Window, offset: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidParameter("empty time grid".into()));
        }
        if offset.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: offset.len(),
            });
        }
        Ok(Self {
            rep,
            grid,
            window,
            offset,
            sigma: 0.0,
        })
    }

    /// Uncentred sum without shift.
    pub fn plain(rep: R, grid: Vec<f64>, window: Window) -> Result<Self> {
        let n = grid.len();
        Self::new(rep, grid, window, vec![0.0; n])
    }

    /// Offset `b(t) − ∫ ⟦V_t⟧ dn`, the compensator by quadrature.
    pub fn compensated(rep: R, grid: Vec<f64>, window: Window, shift: &[f64], chi: CutoffFunction) -> Result<Self> {
        let mut offset = Vec::with_capacity(grid.len());
        for (&t, &b) in grid.iter().zip(shift) {
            let c = rep.integrate(&|s| num_complex::Complex64::new(chi.truncate_scalar(rep.kernel(t, s)), 0.0))?;
            if !c.re.is_finite() {
                return Err(Error::NonFiniteCompensator(c.re));
            }
            offset.push(b - c.re);
        }
        Self::new(rep, grid, window, offset)
    }

    /// Adds `σB_t`; needs a nondecreasing grid in `[0, ∞)`.
    pub fn with_brownian(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma = {sigma}")));
        }
        if sigma > 0.0 && (self.grid[0] < 0.0 || self.grid.windows(2).any(|w| w[1] < w[0])) {
            return Err(Error::InvalidParameter(
                "Brownian part needs a nondecreasing nonnegative grid".into(),
            ));
        }
        self.sigma = sigma;
        Ok(self)
    }

    /// `(V_t(s))_{t ∈ grid}`.
    pub fn kernel_values(&self, s: &R::Point) -> Vec<f64> {
        self.grid.iter().map(|&t| self.rep.kernel(t, s)).collect()
    }

    pub fn draw(&self, rng: &mut SimRng) -> Result<ProcessDraw<R::Point>> {
        let config = sample_prm(&self.rep, self.window, rng)?;
        let mut path = self.offset.clone();
        for s in &config.points {
            for (x, &t) in path.iter_mut().zip(&self.grid) {
                *x += self.rep.kernel(t, s);
            }
        }
        if self.sigma > 0.0 {
            let (mut b, mut last) = (0.0, 0.0);
            for (x, &t) in path.iter_mut().zip(&self.grid) {
                let g: f64 = StandardNormal.sample(rng);
                b += self.sigma * (t - last).sqrt() * g;
                last = t;
                *x += b;
            }
        }
        Ok(ProcessDraw { path, config })
    }
}

fn add(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

/// Fails unless `∫ q dn` is within `10⁻²` of `target`: by quadrature when
/// the representation offers it, otherwise by Monte Carlo over `n⁽¹⁾`
/// allowing four standard errors on top.
pub fn check_q_normalization<R: LevyRepresentation>(
    rep: &R,
    q: &(dyn Fn(&R::Point) -> f64 + Sync),
    target: f64,
    reps: usize,
    family: &StreamFamily,
) -> Result<f64> {
    if let Ok(v) = rep.integrate(&|s| num_complex::Complex64::new(q(s), 0.0)) {
        if v.re.is_finite() {
            if (v.re - target).abs() > 1e-2 {
                return Err(Error::Normalization {
                    estimate: v.re,
                    expected: target,
                });
            }
            return Ok(v.re);
        }
    }
    let m = mc::replicate(reps.clamp(1000, 100_000), &family.child("q-normalization"), |rng, _| {
        let s = rep.sample_point(rng);
        [q(&s) / rep.density(&s)]
    });
    let (est, se) = (m.mean(0), m.se(0));
    if !((est - target).abs() <= 1e-2 + 4.0 * se) {
        return Err(Error::Normalization {
            estimate: est,
            expected: target,
        });
    }
    Ok(est)
}

/// `q(s)/g(s)`, zero where `q` vanishes.
fn importance_weight<R: LevyRepresentation>(rep: &R, q: &(dyn Fn(&R::Point) -> f64 + Sync), s: &R::Point) -> f64 {
    let qs = q(s);
    if qs == 0.0 {
        0.0
    } else {
        qs / rep.density(s)
    }
}

fn collect_results(v: Vec<Result<f64>>) -> Result<Vec<f64>> {
    v.into_iter().collect()
}
