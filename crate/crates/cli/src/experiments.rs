//! Registered experiments and their runners.

use anyhow::{anyhow, bail, Result};
use idsim_core::isomorphism::{
    reconstruct_from_size_bias, small_time_limit, verify_dynkin, verify_iso1_atom, verify_iso2, verify_iso3_iso4,
    verify_levy_translation, verify_series_iso, verify_size_bias, PrmProcess, DEFAULT_H_LADDER,
};
use idsim_core::measure::{
    check_consistency, sigma_finiteness_witness, validate_levy_measure, DEFAULT_WITNESS_THRESHOLD,
};
use idsim_core::prm::LevyRepresentation;
use idsim_core::representations::{
    BesqRep, ExcursionSettings, FellerRep, LevyModel, LevyPoint, LevyProcessRep, LocalTimeClock,
};
use idsim_core::series::{besq_config, feller_config, generate_series, levy_config, SeriesConfig};
use idsim_core::stats::mean_se;
use idsim_core::{mc, StreamFamily, Window};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{CustomAtomic, ExperimentConfig, FunctionalSpec, ModelSpec, QSpec, VerifySettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Generated,
}

/// Columns of the optional CSV output, one row per grid point (or state,
/// coordinate, ladder step).
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub struct Outcome {
    pub verdict: Verdict,
    pub result: Value,
    pub table: Option<Table>,
}

type Runner = fn(&mut ExperimentConfig, &StreamFamily) -> Result<Outcome>;

pub struct Experiment {
    pub name: &'static str,
    pub models: &'static [&'static str],
    pub required: &'static str,
    run: Runner,
}

const JUMP_MODELS: &[&str] = &["levy", "compound-poisson"];

pub const EXPERIMENTS: &[Experiment] = &[
    Experiment {
        name: "validate_levy_measure",
        models: &["custom-atomic"],
        required: "-",
        run: run_validate,
    },
    Experiment {
        name: "check_consistency",
        models: &["custom-atomic"],
        required: "model.family",
        run: run_consistency,
    },
    Experiment {
        name: "sigma_finiteness_witness",
        models: &["levy", "compound-poisson", "besq", "feller"],
        required: "t0",
        run: run_witness,
    },
    Experiment {
        name: "generate_series",
        models: &["levy", "compound-poisson", "besq", "feller"],
        required: "grid",
        run: run_generate_series,
    },
    Experiment {
        name: "sample_local_times",
        models: &["markov-chain"],
        required: "-",
        run: run_local_times,
    },
    Experiment {
        name: "sample_permanental",
        models: &["permanental"],
        required: "-",
        run: run_permanental,
    },
    Experiment {
        name: "verify_iso2",
        models: JUMP_MODELS,
        required: "grid, functional",
        run: run_iso2,
    },
    Experiment {
        name: "verify_iso3_iso4",
        models: JUMP_MODELS,
        required: "grid, functional",
        run: run_iso34,
    },
    Experiment {
        name: "verify_iso1_atom",
        models: JUMP_MODELS,
        required: "grid, functional, q_zero, zero_sets",
        run: run_iso1,
    },
    Experiment {
        name: "verify_levy_translation",
        models: JUMP_MODELS,
        required: "grid, functional",
        run: run_translation,
    },
    Experiment {
        name: "verify_series_iso",
        models: JUMP_MODELS,
        required: "grid, functional",
        run: run_series_iso,
    },
    Experiment {
        name: "verify_dynkin",
        models: &["markov-chain"],
        required: "anchor, functional",
        run: run_dynkin,
    },
    Experiment {
        name: "verify_size_bias",
        models: &["custom-atomic"],
        required: "coordinate, functional",
        run: run_size_bias,
    },
    Experiment {
        name: "reconstruct_from_size_bias",
        models: &["custom-atomic"],
        required: "coordinate, tail_level",
        run: run_reconstruction,
    },
    Experiment {
        name: "small_time_limit",
        models: JUMP_MODELS,
        required: "f",
        run: run_small_time,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name)
}

impl Experiment {
    pub fn run(&self, cfg: &mut ExperimentConfig) -> Result<Outcome> {
        let tag = cfg.model.tag();
        if !self.models.contains(&tag) {
            bail!(
                "{} does not accept model type `{tag}` (expected one of: {})",
                self.name,
                self.models.join(", ")
            );
        }
        let family = StreamFamily::tagged(cfg.seed, self.name);
        (self.run)(cfg, &family)
    }
}

/// Text table of the registry in registration order.
pub fn listing() -> String {
    let w = EXPERIMENTS.iter().map(|e| e.name.len()).max().unwrap_or(0);
    let m = EXPERIMENTS.iter().map(|e| e.models.join(",").len()).max().unwrap_or(0);
    let mut out = format!("{:w$}  {:m$}  {}\n", "experiment", "models", "required params");
    for e in EXPERIMENTS {
        out.push_str(&format!("{:w$}  {:m$}  {}\n", e.name, e.models.join(","), e.required));
    }
    out
}

/// Parses `cfg.params`, rejecting keys the experiment does not know.
fn params<P: DeserializeOwned + Serialize>(cfg: &ExperimentConfig) -> Result<P> {
    let p: P = serde_json::from_value(cfg.params.clone()).map_err(|e| anyhow!("invalid params: {e}"))?;
    let known = serde_json::to_value(&p)?;
    if let (Value::Object(given), Value::Object(known)) = (&cfg.params, &known) {
        if let Some(k) = given.keys().find(|k| !known.contains_key(*k)) {
            bail!("invalid params: unknown field `{k}`");
        }
    }
    Ok(p)
}

/// Writes the resolved parameters back so the report echoes them.
fn store<P: Serialize>(cfg: &mut ExperimentConfig, p: &P) -> Result<()> {
    cfg.params = serde_json::to_value(p)?;
    Ok(())
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn custom(cfg: &ExperimentConfig) -> &CustomAtomic {
    match &cfg.model {
        ModelSpec::CustomAtomic(c) => c,
        _ => unreachable!("model tag checked by the registry"),
    }
}

fn jump_model(cfg: &ExperimentConfig) -> LevyModel {
    cfg.model.levy().expect("model tag checked by the registry")
}

fn mean_se_columns(samples: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    (0..dim)
        .map(|k| {
            let col: Vec<f64> = samples.iter().map(|v| v[k]).collect();
            mean_se(&col)
        })
        .unzip()
}

#[derive(Serialize, Deserialize)]
struct NoParams {}

fn run_validate(cfg: &mut ExperimentConfig, _: &StreamFamily) -> Result<Outcome> {
    let _: NoParams = params(cfg)?;
    let r = validate_levy_measure(&custom(cfg).measure()?);
    Ok(Outcome {
        verdict: pass_if(r.pass),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

fn run_consistency(cfg: &mut ExperimentConfig, _: &StreamFamily) -> Result<Outcome> {
    let _: NoParams = params(cfg)?;
    let r = check_consistency(&custom(cfg).family()?);
    Ok(Outcome {
        verdict: pass_if(r.consistent),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

#[derive(Serialize, Deserialize)]
struct WitnessParams {
    t0: Vec<f64>,
    #[serde(default = "witness_threshold")]
    threshold: f64,
}

fn witness_threshold() -> f64 {
    DEFAULT_WITNESS_THRESHOLD
}

fn witness<R: LevyRepresentation>(rep: &R, p: &WitnessParams, reps: usize, fam: &StreamFamily) -> Result<Outcome> {
    let r = sigma_finiteness_witness(rep, &p.t0, reps as u64, p.threshold, &mut fam.stream(0))?;
    Ok(Outcome {
        verdict: pass_if(r.witnessed),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

fn run_witness(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let p: WitnessParams = params(cfg)?;
    store(cfg, &p)?;
    let settings = ExcursionSettings::default();
    match &cfg.model {
        ModelSpec::Besq { beta } => witness(&BesqRep::new(*beta, settings)?, &p, cfg.reps, fam),
        ModelSpec::Feller { a, sigma } => witness(&FellerRep::new(*a, *sigma, settings)?, &p, cfg.reps, fam),
        _ => witness(&jump_model(cfg).rep()?, &p, cfg.reps, fam),
    }
}

/// Default budget for the excursion-driven series, whose intensity has
/// infinite mass.
const EXCURSION_TAU: f64 = 200.0;

/// Paths written to the CSV besides the mean and standard error.
const CSV_PATHS: usize = 16;

#[derive(Serialize, Deserialize)]
struct SeriesParams {
    grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
}

fn series_outcome<R: LevyRepresentation>(cfg: &SeriesConfig<R>, reps: usize, fam: &StreamFamily) -> Result<Outcome> {
    let draws = mc::collect(reps, fam, |rng, _| generate_series(cfg, rng));
    let draws = draws.into_iter().collect::<idsim_core::Result<Vec<_>>>()?;
    let grid = &cfg.time_grid;
    let paths: Vec<Vec<f64>> = draws.iter().map(|d| d.path.values.clone()).collect();
    let (mean, se) = mean_se_columns(&paths, grid.len());
    let terms: Vec<f64> = draws.iter().map(|d| d.terms_used as f64).collect();
    let (terms_mean, terms_se) = mean_se(&terms);
    let shown = reps.min(CSV_PATHS);
    let mut header = vec!["t".to_string(), "mean".into(), "se".into()];
    header.extend((0..shown).map(|i| format!("path_{i}")));
    let rows = (0..grid.len())
        .map(|k| {
            let mut row = vec![grid[k], mean[k], se[k]];
            row.extend(paths[..shown].iter().map(|p| p[k]));
            row
        })
        .collect();
    Ok(Outcome {
        verdict: Verdict::Generated,
        result: json!({
            "grid": grid,
            "mean": mean,
            "se": se,
            "terms_used_mean": terms_mean,
            "terms_used_se": terms_se,
            "gamma_budget": cfg.gamma_budget,
            "discarded_mass": draws.first().map(|d| d.discarded_mass),
        }),
        table: Some(Table { header, rows }),
    })
}

fn levy_series(model: &LevyModel, tau: f64, grid: Vec<f64>) -> Result<SeriesConfig<LevyProcessRep>> {
    if model.sigma != 0.0 {
        bail!("series representation covers the jump part only; set sigma = 0");
    }
    Ok(levy_config(
        model.rate,
        model.jumps.clone(),
        model.horizon,
        model.drift,
        tau,
        grid,
    )?)
}

fn run_generate_series(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let mut p: SeriesParams = params(cfg)?;
    let settings = ExcursionSettings::default();
    let grid = p.grid.clone();
    match cfg.model.clone() {
        ModelSpec::Besq { beta } => {
            let tau = *p.tau.get_or_insert(EXCURSION_TAU);
            store(cfg, &p)?;
            series_outcome(&besq_config(beta, settings, tau, grid)?, cfg.reps, fam)
        }
        ModelSpec::Feller { a, sigma } => {
            let tau = *p.tau.get_or_insert(EXCURSION_TAU);
            store(cfg, &p)?;
            series_outcome(&feller_config(a, sigma, settings, tau, grid)?, cfg.reps, fam)
        }
        _ => {
            let model = jump_model(cfg);
            // τ equal to the total mass discards nothing
            let tau = *p.tau.get_or_insert((model.rate * model.horizon).max(1.0));
            store(cfg, &p)?;
            series_outcome(&levy_series(&model, tau, grid)?, cfg.reps, fam)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LocalTimeParams {
    #[serde(default)]
    start: usize,
    #[serde(default)]
    clock: LocalTimeClock,
    /// Draw under the chain stopped at its last visit to `start`.
    #[serde(default)]
    tilde: bool,
}

fn run_local_times(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let p: LocalTimeParams = params(cfg)?;
    store(cfg, &p)?;
    let chain = cfg.model.chain().expect("model tag checked by the registry")?;
    if p.start >= chain.len() {
        bail!("start state {} outside {} states", p.start, chain.len());
    }
    let draws = mc::collect(cfg.reps, fam, |rng, _| {
        if p.tilde {
            chain.sample_local_times_tilde(p.start, p.clock, rng)
        } else {
            Ok(chain.sample_local_times(p.start, p.clock, rng))
        }
    });
    let draws = draws.into_iter().collect::<idsim_core::Result<Vec<_>>>()?;
    let (mean, se) = mean_se_columns(&draws, chain.len());
    let green: Vec<f64> = (0..chain.len()).map(|y| chain.green()[(p.start, y)]).collect();
    let rows = (0..chain.len())
        .map(|y| vec![y as f64, mean[y], se[y], green[y]])
        .collect();
    Ok(Outcome {
        verdict: Verdict::Generated,
        result: json!({ "states": chain.states(), "mean": mean, "se": se, "green_row": green }),
        table: Some(Table {
            header: vec!["state".into(), "mean".into(), "se".into(), "green".into()],
            rows,
        }),
    })
}

fn run_permanental(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let _: NoParams = params(cfg)?;
    let model = cfg.model.permanental().expect("model tag checked by the registry")?;
    let d = model.dimension();
    let draws = mc::collect(cfg.reps, fam, |rng, _| model.sample(rng));
    let (mean, se) = mean_se_columns(&draws, d);
    let expected: Vec<f64> = (0..d).map(|x| model.mean(x)).collect();
    let rows = (0..d).map(|x| vec![x as f64, mean[x], se[x], expected[x]]).collect();
    Ok(Outcome {
        verdict: Verdict::Generated,
        result: json!({ "mean": mean, "se": se, "expected_mean": expected }),
        table: Some(Table {
            header: vec!["coordinate".into(), "mean".into(), "se".into(), "expected".into()],
            rows,
        }),
    })
}

#[derive(Serialize, Deserialize)]
struct IsoParams {
    grid: Vec<f64>,
    functional: FunctionalSpec,
    #[serde(default = "empty_q")]
    q: QSpec,
    #[serde(default = "finite_window")]
    window: Window,
    #[serde(flatten)]
    verify: VerifySettings,
}

fn empty_q() -> QSpec {
    QSpec {
        weight: None,
        decay: 0.0,
        until: None,
    }
}

fn finite_window() -> Window {
    Window::Finite
}

fn levy_process(model: &LevyModel, grid: Vec<f64>, window: Window) -> Result<PrmProcess<LevyProcessRep>> {
    model.validate()?;
    let offset = grid.iter().map(|t| model.drift * t).collect();
    Ok(PrmProcess::new(model.rep()?, grid, window, offset)?.with_brownian(model.sigma)?)
}

fn run_iso2(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let mut p: IsoParams = params(cfg)?;
    let model = jump_model(cfg);
    let q = p.q.resolve(model.rate, model.horizon, 1.0)?;
    store(cfg, &p)?;
    let f = p.functional.build(p.grid.len())?;
    let process = levy_process(&model, p.grid.clone(), p.window)?;
    let r = verify_iso2(
        &process,
        &|s: &LevyPoint| q.eval(s.time),
        &f,
        &p.verify.options(cfg.reps),
        fam,
    )?;
    Ok(Outcome {
        verdict: pass_if(r.pass),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

fn run_iso34(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let mut p: IsoParams = params(cfg)?;
    let model = jump_model(cfg);
    let q = p.q.resolve(model.rate, model.horizon, 1.0)?;
    store(cfg, &p)?;
    let f = p.functional.build(p.grid.len())?;
    let process = levy_process(&model, p.grid.clone(), p.window)?;
    let r = verify_iso3_iso4(
        &process,
        &|s: &LevyPoint| q.eval(s.time),
        &f,
        &p.verify.options(cfg.reps),
        fam,
    )?;
    let positive_ok = r.positive_z.is_none_or(|z| z.abs() < p.verify.z_crit);
    Ok(Outcome {
        verdict: pass_if(r.identity.pass && positive_ok),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

#[derive(Serialize, Deserialize)]
struct Iso1Params {
    #[serde(flatten)]
    base: IsoParams,
    q_zero: f64,
    /// Each entry is a set `T₀` of grid times; `U = {x_{T₀} = 0}`.
    zero_sets: Vec<Vec<f64>>,
}

fn run_iso1(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let mut p: Iso1Params = params(cfg)?;
    let model = jump_model(cfg);
    let q = p.base.q.resolve(model.rate, model.horizon, 1.0 - p.q_zero)?;
    store(cfg, &p)?;
    let b = &p.base;
    let f = b.functional.build(b.grid.len())?;
    let process = levy_process(&model, b.grid.clone(), b.window)?;
    let r = verify_iso1_atom(
        &process,
        &|s: &LevyPoint| q.eval(s.time),
        p.q_zero,
        &f,
        &p.zero_sets,
        &b.verify.options(cfg.reps),
        fam,
    )?;
    let ok = r.forward.pass && r.converse.iter().all(|c| c.pass);
    Ok(Outcome {
        verdict: pass_if(ok),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

#[derive(Serialize, Deserialize)]
struct TranslationParams {
    grid: Vec<f64>,
    functional: FunctionalSpec,
    #[serde(default = "empty_q")]
    q: QSpec,
    #[serde(flatten)]
    verify: VerifySettings,
}

fn run_translation(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let mut p: TranslationParams = params(cfg)?;
    let model = jump_model(cfg);
    let q = p.q.resolve(model.rate, model.horizon, 1.0)?;
    store(cfg, &p)?;
    let f = p.functional.build(p.grid.len())?;
    let r = verify_levy_translation(
        &model,
        &|r, _| q.eval(r),
        &f,
        p.grid.clone(),
        &p.verify.options(cfg.reps),
        fam,
    )?;
    Ok(Outcome {
        verdict: pass_if(r.pass),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

#[derive(Serialize, Deserialize)]
struct SeriesIsoParams {
    grid: Vec<f64>,
    functional: FunctionalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default = "empty_q")]
    q: QSpec,
    #[serde(flatten)]
    verify: VerifySettings,
}

fn run_series_iso(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let mut p: SeriesIsoParams = params(cfg)?;
    let model = jump_model(cfg);
    let q = p.q.resolve(model.rate, model.horizon, 1.0)?;
    let tau = *p.tau.get_or_insert((model.rate * model.horizon).max(1.0));
    store(cfg, &p)?;
    let f = p.functional.build(p.grid.len())?;
    let series = levy_series(&model, tau, p.grid.clone())?;
    let jumps = model.jumps.clone();
    let r = verify_series_iso(
        &series,
        &|s: &LevyPoint| q.eval(s.time),
        &|rng| q.sample_point(&jumps, rng),
        &f,
        &p.verify.options(cfg.reps),
        fam,
    )?;
    Ok(Outcome {
        verdict: pass_if(r.forward.pass && r.converse.pass),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

#[derive(Serialize, Deserialize)]
struct DynkinParams {
    anchor: usize,
    functional: FunctionalSpec,
    #[serde(default = "unit_alpha")]
    alpha: f64,
    #[serde(default)]
    clock: LocalTimeClock,
    #[serde(flatten)]
    verify: VerifySettings,
}

fn unit_alpha() -> f64 {
    1.0
}

fn run_dynkin(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let p: DynkinParams = params(cfg)?;
    store(cfg, &p)?;
    let chain = cfg.model.chain().expect("model tag checked by the registry")?;
    let f = p.functional.build(chain.len())?;
    let r = verify_dynkin(&chain, p.anchor, p.alpha, p.clock, &f, &p.verify.options(cfg.reps), fam)?;
    Ok(Outcome {
        verdict: pass_if(r.forward.pass && r.converse.pass),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

#[derive(Serialize, Deserialize)]
struct SizeBiasParams {
    coordinate: usize,
    functional: FunctionalSpec,
    #[serde(flatten)]
    verify: VerifySettings,
}

fn run_size_bias(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let p: SizeBiasParams = params(cfg)?;
    store(cfg, &p)?;
    let c = custom(cfg);
    let f = p.functional.build(c.index_set().dimension())?;
    let r = verify_size_bias(&c.law()?, p.coordinate, &f, &p.verify.options(cfg.reps), fam)?;
    Ok(Outcome {
        verdict: pass_if(r.pass),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

#[derive(Serialize, Deserialize)]
struct ReconstructionParams {
    coordinate: usize,
    tail_level: f64,
    #[serde(flatten)]
    verify: VerifySettings,
}

fn run_reconstruction(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let p: ReconstructionParams = params(cfg)?;
    store(cfg, &p)?;
    let law = custom(cfg).law()?;
    let r = reconstruct_from_size_bias(&law, p.coordinate, p.tail_level, cfg.reps, fam, p.verify.z_crit)?;
    Ok(Outcome {
        verdict: pass_if(r.pass),
        result: serde_json::to_value(&r)?,
        table: None,
    })
}

/// One-dimensional test function for the small-time limit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
enum ScalarFn {
    /// `1{x ≥ level}`, with `level > 0`.
    IndicatorAbove { level: f64 },
    /// `1{|x| ≥ level}`, with `level > 0`.
    IndicatorOutside { level: f64 },
    /// `x⁴ ∧ 1`.
    QuarticCapped,
}

impl ScalarFn {
    fn eval(&self, x: f64) -> f64 {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        match *self {
            Self::IndicatorAbove { level } => ind(x >= level),
            Self::IndicatorOutside { level } => ind(x.abs() >= level),
            Self::QuarticCapped => x.powi(4).min(1.0),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SmallTimeParams {
    f: ScalarFn,
    #[serde(default = "default_ladder")]
    h_ladder: Vec<f64>,
    /// The verdict accepts `|limit − oracle|` up to the larger of
    /// `z_crit·se` and `rel_tol·|oracle|`.
    #[serde(default = "default_rel_tol")]
    rel_tol: f64,
    #[serde(flatten)]
    verify: VerifySettings,
}

fn default_ladder() -> Vec<f64> {
    DEFAULT_H_LADDER.to_vec()
}

fn default_rel_tol() -> f64 {
    0.02
}

fn run_small_time(cfg: &mut ExperimentConfig, fam: &StreamFamily) -> Result<Outcome> {
    let p: SmallTimeParams = params(cfg)?;
    match p.f {
        ScalarFn::IndicatorAbove { level } | ScalarFn::IndicatorOutside { level } if !(level > 0.0) => {
            bail!("indicator level must be positive so that f vanishes near 0")
        }
        _ => {}
    }
    store(cfg, &p)?;
    let model = jump_model(cfg);
    let f = p.f.clone();
    let r = small_time_limit(&model, &move |x| f.eval(x), &p.h_ladder, cfg.reps, fam)?;
    let allowed = (p.verify.z_crit * r.limit_se).max(p.rel_tol * r.oracle.abs());
    let rows =
        r.h.iter()
            .zip(&r.estimates)
            .zip(&r.ses)
            .map(|((h, e), s)| vec![*h, *e, *s])
            .collect();
    Ok(Outcome {
        verdict: pass_if(r.abs_error <= allowed),
        result: serde_json::to_value(&r)?,
        table: Some(Table {
            header: vec!["h".into(), "estimate".into(), "se".into()],
            rows,
        }),
    })
}
