//! Dynkin isomorphism for an α-permanental vector `Y` with kernel the Green
//! matrix of a symmetric transient chain:
//! `E Ẽ_a F(Y + L_∞) = E[F(Y) Y_a / (α u(a, a))]`, and the converse
//! `E F(Y) = E Ẽ_a[F(Y + L_∞) α u(a, a) / (Y_a + L^a_∞)]`.

use serde::{Deserialize, Serialize};

use super::{add, Functional, NegativeControl, VerifyOptions};
use crate::error::{Error, Result};
use crate::mc;
use crate::report::IdentityReport;
use crate::representations::markov::{LocalTimeClock, MarkovChainModel};
use crate::representations::permanental::PermanentalModel;
use crate::rng::StreamFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynkinReport {
    pub forward: IdentityReport,
    pub converse: IdentityReport,
    pub anchor: usize,
    pub alpha: f64,
    pub u_aa: f64,
}

/// `L_∞` is drawn under `P̃_a` (the chain from `a` stopped at its last visit
/// to `a`) with the given clock. The identity needs local times whose
/// Laplace transform is that of the continuous-time chain, so the default
/// [`LocalTimeClock::ExponentialHolding`] is the one that satisfies it.
pub fn verify_dynkin(
    chain: &MarkovChainModel,
    anchor: usize,
    alpha: f64,
    clock: LocalTimeClock,
    f: &Functional,
    opts: &VerifyOptions,
    family: &StreamFamily,
) -> Result<DynkinReport> {
    opts.validate()?;
    let n = chain.len();
    if anchor >= n {
        return Err(Error::InvalidParameter(format!("anchor {anchor} outside {n} states")));
    }
    let u = chain.green();
    let perm = PermanentalModel::new(u.clone(), alpha)?;
    let u_aa = u[(anchor, anchor)];
    let rhs_anchor = match opts.control {
        Some(NegativeControl::WrongAnchor(b)) if b < n => b,
        Some(NegativeControl::WrongAnchor(b)) => {
            return Err(Error::InvalidParameter(format!("wrong anchor {b} outside {n} states")));
        }
        _ => anchor,
    };
    let u_bb = u[(rhs_anchor, rhs_anchor)];
    let scale = opts.weight_scale();
    let translated: Vec<(f64, f64)> = mc::collect(opts.reps, &family.child("dynkin-translated"), |rng, _| {
        let y = perm.sample(rng);
        let l = chain.sample_local_times_tilde(anchor, clock, rng)?;
        let fz = f.eval(&add(&y, &l));
        Ok((fz, fz * alpha * u_aa / (y[anchor] + l[anchor])))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let plain: Vec<(f64, f64)> = mc::collect(opts.reps, &family.child("dynkin-plain"), |rng, _| {
        let y = perm.sample(rng);
        let fy = f.eval(&y);
        (fy * scale * y[rhs_anchor] / (alpha * u_bb), fy)
    });
    let lhs: Vec<f64> = translated.iter().map(|p| p.0).collect();
    let conv_rhs: Vec<f64> = translated.iter().map(|p| p.1).collect();
    let rhs: Vec<f64> = plain.iter().map(|p| p.0).collect();
    let conv_lhs: Vec<f64> = plain.iter().map(|p| p.1).collect();
    Ok(DynkinReport {
        forward: IdentityReport::independent(&lhs, &rhs, opts.z_crit),
        converse: IdentityReport::independent(&conv_lhs, &conv_rhs, opts.z_crit),
        anchor,
        alpha,
        u_aa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_functional() {
        let chain = MarkovChainModel::from_rows(&[vec![0.0, 0.4], vec![0.4, 0.0]]).unwrap();
        let fam = StreamFamily::tagged(9, "dynkin-const");
        let r = verify_dynkin(
            &chain,
            0,
            0.5,
            LocalTimeClock::ExponentialHolding,
            &Functional::constant(1.0),
            &VerifyOptions::with_reps(20_000),
            &fam,
        )
        .unwrap();
        assert_eq!(r.forward.lhs_mean, 1.0);
        assert!(r.forward.pass, "{:?}", r.forward);
    }

    #[test]
    fn anchor_out_of_range() {
        let chain = MarkovChainModel::from_rows(&[vec![0.5]]).unwrap();
        let fam = StreamFamily::tagged(9, "dynkin-range");
        assert!(verify_dynkin(
            &chain,
            1,
            0.5,
            LocalTimeClock::ExponentialHolding,
            &Functional::constant(1.0),
            &VerifyOptions::default(),
            &fam
        )
        .is_err());
    }
}
