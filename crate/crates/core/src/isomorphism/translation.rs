//! Translation identities for a process built from a Poisson random measure:
//! `∫ E F(X + V(s)) q(s) n(ds) = E[F(X) N(q)]` and its converse and atom
//! variants.

use serde::{Deserialize, Serialize};

use super::{
    add, check_q_normalization, collect_results, importance_weight, Functional, NegativeControl, PrmProcess,
    VerifyOptions,
};
use crate::error::{Error, Result};
use crate::mc;
use crate::prm::{n_of_q, LevyRepresentation, Window};
use crate::report::IdentityReport;
use crate::representations::levy::{LevyModel, LevyPoint};
use crate::rng::StreamFamily;
use crate::stats::mean_se;

/// Left side by importance sampling `s ~ n⁽¹⁾` with weight `q(s)/g(s)` and an
/// independent draw of `X`; right side `F(X)·N(q)` on a separate stream.
/// Fails with [`Error::Normalization`] unless `∫ q dn ≈ 1`.
pub fn verify_iso2<R: LevyRepresentation>(
    process: &PrmProcess<R>,
    q: &(dyn Fn(&R::Point) -> f64 + Sync),
    f: &Functional,
    opts: &VerifyOptions,
    family: &StreamFamily,
) -> Result<IdentityReport> {
    opts.validate()?;
    check_q_normalization(&process.rep, q, 1.0, opts.reps, family)?;
    let rep = &process.rep;
    let lhs = collect_results(mc::collect(opts.reps, &family.child("iso2-lhs"), |rng, _| {
        let s = rep.sample_point(rng);
        let w = importance_weight(rep, q, &s);
        let x = process.draw(rng)?;
        Ok(if w == 0.0 {
            0.0
        } else {
            w * f.eval(&add(&x.path, &process.kernel_values(&s)))
        })
    }))?;
    let scale = opts.weight_scale();
    let rhs = collect_results(mc::collect(opts.reps, &family.child("iso2-rhs"), |rng, _| {
        let x = process.draw(rng)?;
        Ok(f.eval(&x.path) * scale * n_of_q(&x.config, q))
    }))?;
    Ok(IdentityReport::independent(&lhs, &rhs, opts.z_crit))
}

/// Converse identity `E[F(X); N(q) > 0] = ∫ E[F(X + V(s)) / (N(q) + q(s))] q(s) n(ds)`
/// with the empirical `P(N(q) > 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iso34Report {
    pub identity: IdentityReport,
    pub positive_fraction: f64,
    pub positive_fraction_se: f64,
    /// `1 − e^{−n{q > 0}}` when that mass is finite and computable.
    pub positive_expected: Option<f64>,
    pub positive_z: Option<f64>,
}

/// The expected positive fraction refers to the full intensity; with a
/// [`Window::Budget`] smaller than the mass of `{q > 0}` it is only an
/// approximation.
pub fn verify_iso3_iso4<R: LevyRepresentation>(
    process: &PrmProcess<R>,
    q: &(dyn Fn(&R::Point) -> f64 + Sync),
    f: &Functional,
    opts: &VerifyOptions,
    family: &StreamFamily,
) -> Result<Iso34Report> {
    opts.validate()?;
    check_q_normalization(&process.rep, q, 1.0, opts.reps, family)?;
    let rep = &process.rep;
    let plain: Vec<(f64, f64)> = mc::collect(opts.reps, &family.child("iso3-lhs"), |rng, _| {
        let x = process.draw(rng)?;
        let positive = n_of_q(&x.config, q) > 0.0;
        Ok(if positive { (f.eval(&x.path), 1.0) } else { (0.0, 0.0) })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let scale = opts.weight_scale();
    let rhs = collect_results(mc::collect(opts.reps, &family.child("iso3-rhs"), |rng, _| {
        let s = rep.sample_point(rng);
        let w = importance_weight(rep, q, &s);
        let x = process.draw(rng)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        let denom = n_of_q(&x.config, q) + q(&s);
        Ok(scale * w * f.eval(&add(&x.path, &process.kernel_values(&s))) / denom)
    }))?;
    let lhs: Vec<f64> = plain.iter().map(|p| p.0).collect();
    let ind: Vec<f64> = plain.iter().map(|p| p.1).collect();
    let (positive_fraction, positive_fraction_se) = mean_se(&ind);
    let support = rep
        .integrate(&|s| num_complex::Complex64::new(if q(s) > 0.0 { 1.0 } else { 0.0 }, 0.0))
        .ok()
        .map(|c| c.re)
        .filter(|m| m.is_finite());
    let positive_expected = support.map(|m| 1.0 - (-m).exp());
    let positive_z = positive_expected.map(|p| {
        if positive_fraction_se > 0.0 {
            (positive_fraction - p) / positive_fraction_se
        } else if positive_fraction == p {
            0.0
        } else {
            f64::INFINITY
        }
    });
    Ok(Iso34Report {
        identity: IdentityReport::independent(&lhs, &rhs, opts.z_crit),
        positive_fraction,
        positive_fraction_se,
        positive_expected,
        positive_z,
    })
}

/// Translation by `Z ~ q(0_T) δ_{0_T} + q·ν`:
/// `E F(X + Z) = E[F(X) (N(q) + q(0_T))]`, and for each choice of
/// `U = {x: x(t) = 0, t ∈ T₀}` the converse
/// `E[F(X); N(q) + q(0_T) > 0] = E[F(X + Z) / (N(q) + q(Z) + q(0_T) 1_{U^c}(Z))]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iso1AtomReport {
    pub forward: IdentityReport,
    /// One report per `T₀`, in input order.
    pub converse: Vec<IdentityReport>,
    pub zero_sets: Vec<Vec<f64>>,
}

pub fn verify_iso1_atom<R: LevyRepresentation>(
    process: &PrmProcess<R>,
    q: &(dyn Fn(&R::Point) -> f64 + Sync),
    q_zero: f64,
    f: &Functional,
    zero_sets: &[Vec<f64>],
    opts: &VerifyOptions,
    family: &StreamFamily,
) -> Result<Iso1AtomReport> {
    opts.validate()?;
    if !(0.0..=1.0).contains(&q_zero) {
        return Err(Error::InvalidParameter(format!(
            "atom weight q(0) = {q_zero} outside [0, 1]"
        )));
    }
    check_q_normalization(&process.rep, q, 1.0 - q_zero, opts.reps, family)?;
    let mut zero_idx = Vec::new();
    for set in zero_sets {
        let idx: Option<Vec<usize>> = set.iter().map(|t| process.grid.iter().position(|g| g == t)).collect();
        zero_idx.push(idx.ok_or_else(|| Error::InvalidParameter(format!("zero set {set:?} is not on the grid")))?);
    }
    let rep = &process.rep;
    let k = zero_idx.len();
    // translated arm: forward left side, then one converse right side per U
    let translated: Vec<Vec<f64>> = mc::collect(opts.reps, &family.child("iso1-translated"), |rng, _| {
        let s = rep.sample_point(rng);
        let w = importance_weight(rep, q, &s);
        let x = process.draw(rng)?;
        let nq = n_of_q(&x.config, q);
        let fx = f.eval(&x.path);
        let v = process.kernel_values(&s);
        let fxz = if w == 0.0 { 0.0 } else { f.eval(&add(&x.path, &v)) };
        let mut out = Vec::with_capacity(1 + k);
        out.push(q_zero * fx + w * fxz);
        for idx in &zero_idx {
            let in_u = idx.iter().all(|&i| v[i] == 0.0);
            let atom_part = if q_zero > 0.0 { q_zero * fx / (nq + q_zero) } else { 0.0 };
            let jump_part = if w == 0.0 {
                0.0
            } else {
                let extra = if in_u { 0.0 } else { q_zero };
                w * fxz / (nq + q(&s) + extra)
            };
            out.push(atom_part + jump_part);
        }
        Ok(out)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let scale = opts.weight_scale();
    let atom_rhs = if opts.control == Some(NegativeControl::DropAtom) {
        0.0
    } else {
        q_zero
    };
    let plain: Vec<(f64, f64)> = mc::collect(opts.reps, &family.child("iso1-plain"), |rng, _| {
        let x = process.draw(rng)?;
        let nq = n_of_q(&x.config, q);
        let fx = f.eval(&x.path);
        let positive = if nq + q_zero > 0.0 { fx } else { 0.0 };
        Ok((fx * scale * (nq + atom_rhs), positive))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let lhs: Vec<f64> = translated.iter().map(|v| v[0]).collect();
    let rhs: Vec<f64> = plain.iter().map(|p| p.0).collect();
    let pos: Vec<f64> = plain.iter().map(|p| p.1).collect();
    let converse = (0..k)
        .map(|j| {
            let r: Vec<f64> = translated.iter().map(|v| v[1 + j]).collect();
            IdentityReport::independent(&pos, &r, opts.z_crit)
        })
        .collect();
    Ok(Iso1AtomReport {
        forward: IdentityReport::independent(&lhs, &rhs, opts.z_crit),
        converse,
        zero_sets: zero_sets.to_vec(),
    })
}

/// Lévy-process form: `Z = 1_{[r, ∞)} v` with `(r, v) ~ q(r, v) dr ρ(dv)`, and
/// `N(q) = Σ_{jumps} q(r, ΔX_r)`. The process is simulated exactly on
/// `[0, horizon]` without compensation: `X_t = drift·t + σB_t + Σ_{r ≤ t} ΔX_r`.
pub fn verify_levy_translation(
    model: &LevyModel,
    q: &(dyn Fn(f64, f64) -> f64 + Sync),
    f: &Functional,
    grid: Vec<f64>,
    opts: &VerifyOptions,
    family: &StreamFamily,
) -> Result<IdentityReport> {
    model.validate()?;
    let offset = grid.iter().map(|t| model.drift * t).collect();
    let process = PrmProcess::new(model.rep()?, grid, Window::Finite, offset)?.with_brownian(model.sigma)?;
    let qp = |p: &LevyPoint| q(p.time, p.jump);
    verify_iso2(&process, &qp, f, opts, family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::representations::gamma::GammaRep;
    use crate::representations::levy::{JumpLaw, LevyProcessRep};

    fn poisson_shift() -> (PrmProcess<LevyProcessRep>, impl Fn(&LevyPoint) -> f64 + Sync) {
        let process =
            PrmProcess::plain(LevyProcessRep::poisson(1.0, 40.0).unwrap(), vec![1.0], Window::Finite).unwrap();
        (process, |p: &LevyPoint| (-p.time).exp())
    }

    #[test]
    fn constant_functional_gives_one() {
        let (process, q) = poisson_shift();
        let fam = StreamFamily::tagged(3, "iso2-const");
        let r = verify_iso2(
            &process,
            &q,
            &Functional::constant(1.0),
            &VerifyOptions::with_reps(20_000),
            &fam,
        )
        .unwrap();
        // the left side averages q/g over n⁽¹⁾
        assert!(((r.lhs_mean - 1.0) / r.lhs_se).abs() < 4.0);
        assert!(((r.rhs_mean - 1.0) / r.rhs_se).abs() < 4.0);
    }

    #[test]
    fn unnormalized_q_is_rejected() {
        let (process, _) = poisson_shift();
        let q2 = |p: &LevyPoint| 2.0 * (-p.time).exp();
        let fam = StreamFamily::tagged(3, "iso2-norm");
        assert!(matches!(
            verify_iso2(
                &process,
                &q2,
                &Functional::constant(1.0),
                &VerifyOptions::with_reps(100),
                &fam
            ),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn finite_support_positive_fraction() {
        // q uniform on jumps before time 2: n{q > 0} = 2
        let process = PrmProcess::plain(
            LevyProcessRep::poisson(1.0, 5.0).unwrap(),
            vec![1.0, 3.0],
            Window::Finite,
        )
        .unwrap();
        let q = |p: &LevyPoint| if p.time <= 2.0 { 0.5 } else { 0.0 };
        let fam = StreamFamily::tagged(4, "iso3");
        let r = verify_iso3_iso4(
            &process,
            &q,
            &Functional::exp_neg_coordinate(1),
            &VerifyOptions::with_reps(20_000),
            &fam,
        )
        .unwrap();
        let expected = r.positive_expected.unwrap();
        assert!((expected - (1.0 - (-2.0f64).exp())).abs() < 1e-8);
        assert!(r.positive_z.unwrap().abs() < 4.0);
        assert!(r.identity.pass, "{:?}", r.identity);
    }

    #[test]
    fn drift_only_atom_translation() {
        // q(0) = 1: Z ≡ 0 and both sides are E F(X)
        let process = PrmProcess::plain(GammaRep::new(1.0).unwrap(), vec![1.0], Window::Budget(50.0)).unwrap();
        let q = |_: &f64| 0.0;
        let fam = StreamFamily::tagged(5, "iso1-trivial");
        let r = verify_iso1_atom(
            &process,
            &q,
            1.0,
            &Functional::exp_neg_coordinate(0),
            &[vec![1.0]],
            &VerifyOptions::with_reps(5_000),
            &fam,
        )
        .unwrap();
        assert!(r.forward.pass && r.converse[0].pass);
    }

    #[test]
    fn brownian_drift_translation() {
        let model = LevyModel {
            drift: 0.3,
            sigma: 0.5,
            rate: 2.0,
            jumps: JumpLaw::Normal { mean: 0.0, sd: 1.0 },
            horizon: 2.0,
        };
        // q(r, v) = density of Exp(1) in r truncated to [0, 2] times 1/λ
        let c = 1.0 / (1.0 - (-2.0f64).exp());
        let q = move |r: f64, _v: f64| c * (-r).exp() / 2.0;
        let fam = StreamFamily::tagged(6, "levy-translation");
        let f = Functional::new("cos", Some(1.0), |y| (y[0] - y[1]).cos());
        let r =
            verify_levy_translation(&model, &q, &f, vec![0.5, 1.5], &VerifyOptions::with_reps(20_000), &fam).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
