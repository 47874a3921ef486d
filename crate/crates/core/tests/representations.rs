mod common;

use idsim_core::linalg::Matrix;
use idsim_core::report::IdentityReport;
use idsim_core::representations::markov::tilde_laplace_transform;
use idsim_core::representations::{
    compound_poisson_sample, green_matrix, ExcursionPoint, LocalTimeClock, LocalTimeEstimator, MarkovChainModel,
    PermanentalModel,
};
use idsim_core::stats::{ks_one_sample, mean_se};
use idsim_core::{mc, StreamFamily};
use rand_distr::{Distribution, Normal};
use statrs::distribution::{ContinuousCDF, Exp as ExpDist};

#[test]
fn brownian_scaling_of_local_times() {
    let (r, a, m) = (4.0f64, 0.6, 2048);
    let est = LocalTimeEstimator::Refined { min_step: 1e-5 };
    let pairs: Vec<(f64, f64)> = mc::collect(400, &StreamFamily::tagged(51, "scaling"), |_, i| {
        let seed = 0x51_0000 + i;
        let big = ExcursionPoint::new(r, m, seed).unwrap();
        let unit = ExcursionPoint::new(1.0, m, seed).unwrap();
        (big.local_time(a, &est), r.sqrt() * unit.local_time(a / r.sqrt(), &est))
    });
    let lhs: f64 = pairs.iter().map(|p| p.0).sum();
    let rhs: f64 = pairs.iter().map(|p| p.1).sum();
    assert!((lhs / rhs - 1.0).abs() < 0.05, "{lhs} vs {rhs}");

    // the band estimator with its default bandwidth is exactly scale covariant
    let band = LocalTimeEstimator::Band { epsilon: None };
    for seed in 0..20 {
        let big = ExcursionPoint::new(r, m, seed).unwrap();
        let unit = ExcursionPoint::new(1.0, m, seed).unwrap();
        let x = big.local_time(a, &band);
        let y = r.sqrt() * unit.local_time(a / r.sqrt(), &band);
        assert!((x - y).abs() <= 1e-9 * x.max(1.0), "{x} vs {y}");
    }
}

#[test]
fn green_matrix_counts_visits() {
    let chain = MarkovChainModel::from_rows(&[vec![0.2, 0.5, 0.1], vec![0.3, 0.1, 0.4], vec![0.0, 0.6, 0.2]]).unwrap();
    let u = chain.green().clone();
    for x in 0..3 {
        let visits = mc::collect(100_000, &StreamFamily::tagged(52, &format!("green-{x}")), |rng, _| {
            chain.sample_local_times(x, LocalTimeClock::VisitCount, rng)
        });
        for y in 0..3 {
            let col: Vec<f64> = visits.iter().map(|v| v[y]).collect();
            let (m, se) = mean_se(&col);
            assert!(
                (m - u[(x, y)]).abs() < 4.0 * se,
                "U[{x}][{y}] = {} vs {m} ± {se}",
                u[(x, y)]
            );
        }
    }
}

#[test]
fn green_matrix_examples() {
    let u = green_matrix(&Matrix::from_rows(&[vec![0.5]]).unwrap()).unwrap();
    assert!((u[(0, 0)] - 2.0).abs() < 1e-12);
    let u = green_matrix(&Matrix::from_rows(&[vec![0.0, 0.4], vec![0.4, 0.0]]).unwrap()).unwrap();
    assert!((u[(0, 0)] - 1.0 / 0.84).abs() < 1e-12 && (u[(0, 1)] - 0.4 / 0.84).abs() < 1e-12);
}

/// `(1/u(a,a)) ∂/∂s_a log|I + US|` by central differences on the 2×2
/// determinant written out by hand.
fn tilde_lt_by_differences(u: &[[f64; 2]; 2], s: [f64; 2], a: usize) -> f64 {
    let logdet = |s: [f64; 2]| {
        let m = [
            [1.0 + u[0][0] * s[0], u[0][1] * s[1]],
            [u[1][0] * s[0], 1.0 + u[1][1] * s[1]],
        ];
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]).ln()
    };
    let h = 1e-5;
    let (mut up, mut down) = (s, s);
    up[a] += h;
    down[a] -= h;
    (logdet(up) - logdet(down)) / (2.0 * h) / u[a][a]
}

#[test]
fn tilde_local_times_match_the_derivative_formula() {
    let chain = MarkovChainModel::from_rows(&[vec![0.0, 0.4], vec![0.4, 0.0]]).unwrap();
    let g = chain.green();
    let u = [[g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]]];
    let samples = mc::collect(100_000, &StreamFamily::tagged(53, "tilde"), |rng, _| {
        chain
            .sample_local_times_tilde(0, LocalTimeClock::ExponentialHolding, rng)
            .unwrap()
    });
    for s in [[0.5, 0.0], [0.3, 1.2], [2.0, 0.7]] {
        let oracle = tilde_lt_by_differences(&u, s, 0);
        let closed = tilde_laplace_transform(g, &s, 0).unwrap();
        assert!((oracle - closed).abs() < 1e-8, "{oracle} vs {closed}");
        let vals: Vec<f64> = samples.iter().map(|l| (-(s[0] * l[0] + s[1] * l[1])).exp()).collect();
        let r = IdentityReport::against_constant(&vals, oracle, 4.0);
        assert!(r.pass, "s = {s:?}: {r:?}");
    }
    // E L^a under P̃_a, the derivative at s = 0 of the transform
    let la: Vec<f64> = samples.iter().map(|l| l[0]).collect();
    let h = 1e-5;
    let slope = (tilde_laplace_transform(g, &[h, 0.0], 0).unwrap() - 1.0) / h;
    let (m, se) = mean_se(&la);
    assert!((m + slope).abs() < 4.0 * se + 1e-4, "{m} vs {}", -slope);
}

#[test]
fn killed_chain_tilde_is_a_single_visit() {
    let chain = MarkovChainModel::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
    let mut rng = StreamFamily::tagged(54, "killed").stream(0);
    for _ in 0..20 {
        assert_eq!(
            chain
                .sample_local_times_tilde(1, LocalTimeClock::VisitCount, &mut rng)
                .unwrap(),
            vec![0.0, 1.0]
        );
    }
}

#[test]
fn permanental_marginals() {
    let u = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.5]]).unwrap();
    let model = PermanentalModel::new(u, 1.0).unwrap();
    let ys = mc::collect(20_000, &StreamFamily::tagged(55, "perm"), |rng, _| model.sample(rng));
    for x in 0..2 {
        let col: Vec<f64> = ys.iter().map(|y| y[x]).collect();
        let (m, se) = mean_se(&col);
        assert!((m - model.mean(x)).abs() < 4.0 * se);
        // α = 1: Y_x ~ Gamma(1, scale u(x,x)), i.e. exponential
        let d = ExpDist::new(1.0 / model.kernel()[(x, x)]).unwrap();
        let ks = ks_one_sample(&col, |v| d.cdf(v));
        assert!(ks.p_value > 1e-3, "{ks:?}");
    }

    let single = PermanentalModel::new(Matrix::from_rows(&[vec![1.0]]).unwrap(), 0.5).unwrap();
    let vals: Vec<f64> = mc::collect(100_000, &StreamFamily::tagged(55, "perm-1"), |rng, _| {
        (-single.sample(rng)[0]).exp()
    });
    let r = IdentityReport::against_constant(&vals, 0.5f64.sqrt(), 4.0);
    assert!(r.pass, "{r:?}");
}

#[test]
fn compound_poisson_cf_matches_closed_form() {
    // V_t = (ξ, ξ + η) with independent normals; Y = Σ_{n ≤ ζ} V⁽ⁿ⁾
    let theta = 1.7;
    let grid = [1.0, 2.0];
    let nd = Normal::new(0.4, 0.8).unwrap();
    let a = [0.6, -0.9];
    let ys = mc::collect(100_000, &StreamFamily::tagged(56, "cp-cf"), |rng, _| {
        compound_poisson_sample(
            |rng, _| {
                let x = nd.sample(rng);
                vec![x, x + nd.sample(rng)]
            },
            theta,
            &grid,
            rng,
        )
        .values
    });
    // Σ a_t V_t = (a₁ + a₂)ξ + a₂η
    let cf_normal = |w: f64| num_complex::Complex64::new(-0.5 * 0.64 * w * w, 0.4 * w).exp();
    let ev = cf_normal(a[0] + a[1]) * cf_normal(a[1]);
    let oracle = (theta * (ev - 1.0)).exp();
    let phases: Vec<f64> = ys.iter().map(|y| a[0] * y[0] + a[1] * y[1]).collect();
    let re: Vec<f64> = phases.iter().map(|p| p.cos()).collect();
    let im: Vec<f64> = phases.iter().map(|p| p.sin()).collect();
    assert!(IdentityReport::against_constant(&re, oracle.re, 4.0).pass);
    assert!(IdentityReport::against_constant(&im, oracle.im, 4.0).pass);
}
