//! Series form: `E F(V(ξ₀) + Y) = E[F(Y) Q]` with
//! `Q = Σ_j q(ξ_j) 1{g(ξ_j) ≤ Γ_j⁻¹}` read off the same ladder as `Y`.

use serde::{Deserialize, Serialize};

use super::{add, check_q_normalization, Functional, VerifyOptions};
use crate::error::Result;
use crate::mc;
use crate::prm::LevyRepresentation;
use crate::report::IdentityReport;
use crate::rng::{SimRng, StreamFamily};
use crate::series::{generate_series_with, SeriesConfig};
use crate::stats::mean_se;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesIsoReport {
    /// `E F(V(ξ₀) + Y)` against `E[F(Y) Q]`.
    pub forward: IdentityReport,
    /// `E[F(Y); Q > 0]` against `E[F(V(ξ₀) + Y) / (Q + q(ξ₀))]`.
    pub converse: IdentityReport,
    pub q_total_mean: f64,
    pub q_total_se: f64,
}

fn path_and_q<R: LevyRepresentation>(
    cfg: &SeriesConfig<R>,
    q: &(dyn Fn(&R::Point) -> f64 + Sync),
    rng: &mut SimRng,
) -> Result<(Vec<f64>, f64)> {
    let mut total = 0.0;
    let r = generate_series_with(cfg, rng, |s, _, keep| {
        if keep {
            total += q(s);
        }
    })?;
    Ok((r.path.values, total))
}

/// `xi0` draws from `q·n`; `q` must integrate to 1 against `n`.
pub fn verify_series_iso<R: LevyRepresentation>(
    cfg: &SeriesConfig<R>,
    q: &(dyn Fn(&R::Point) -> f64 + Sync),
    xi0: &(dyn Fn(&mut SimRng) -> R::Point + Sync),
    f: &Functional,
    opts: &VerifyOptions,
    family: &StreamFamily,
) -> Result<SeriesIsoReport> {
    opts.validate()?;
    check_q_normalization(&cfg.rep, q, 1.0, opts.reps, family)?;
    let translated: Vec<(f64, f64)> = mc::collect(opts.reps, &family.child("series-iso-translated"), |rng, _| {
        let s0 = xi0(rng);
        let (y, total) = path_and_q(cfg, q, rng)?;
        let v: Vec<f64> = cfg.time_grid.iter().map(|&t| cfg.rep.kernel(t, &s0)).collect();
        let fz = f.eval(&add(&y, &v));
        let denom = total + q(&s0);
        Ok((fz, if denom > 0.0 { fz / denom } else { 0.0 }))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let scale = opts.weight_scale();
    let plain: Vec<(f64, f64, f64)> = mc::collect(opts.reps, &family.child("series-iso-plain"), |rng, _| {
        let (y, total) = path_and_q(cfg, q, rng)?;
        let fy = f.eval(&y);
        Ok((fy * scale * total, if total > 0.0 { fy } else { 0.0 }, total))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let lhs: Vec<f64> = translated.iter().map(|p| p.0).collect();
    let converse_rhs: Vec<f64> = translated.iter().map(|p| p.1).collect();
    let rhs: Vec<f64> = plain.iter().map(|p| p.0).collect();
    let pos: Vec<f64> = plain.iter().map(|p| p.1).collect();
    let totals: Vec<f64> = plain.iter().map(|p| p.2).collect();
    let (q_total_mean, q_total_se) = mean_se(&totals);
    Ok(SeriesIsoReport {
        forward: IdentityReport::independent(&lhs, &rhs, opts.z_crit),
        converse: IdentityReport::independent(&pos, &converse_rhs, opts.z_crit),
        q_total_mean,
        q_total_se,
    })
}
