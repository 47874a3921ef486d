//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use idsim_core::SimRng;
use rand_distr::{Distribution, StandardNormal};

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `E e^{−(X_1 + 1{ζ ≤ 1})}` for a unit-rate Poisson process `X` and an
/// independent `ζ ~ Exp(1)`, via the Poisson characteristic functional
/// `E e^{−X_1} = exp ∫₀¹ (e^{−1} − 1) dr` and quadrature over `ζ`.
pub fn poisson_shift_oracle() -> f64 {
    let log_cf = simpson(|_| (-1.0f64).exp() - 1.0, 0.0, 1.0, 2);
    let shift = simpson(|z| (-z).exp() * (-1.0f64).exp(), 0.0, 1.0, 2000) + simpson(|z| (-z).exp(), 1.0, 60.0, 200_000);
    log_cf.exp() * shift
}

/// `E Σ_{s ∈ N} e^{−N(S)}` for a Poisson count with mean `θ`, summing the pmf
/// up to 50.
pub fn mecke_brute_force(theta: f64) -> f64 {
    let mut p = (-theta).exp();
    let mut total = 0.0;
    for k in 0..=50u32 {
        if k > 0 {
            p *= theta / k as f64;
        }
        total += p * k as f64 * (-(k as f64)).exp();
    }
    total
}

/// Euler–Maruyama for `dZ = σ√Z dW` from `a`, absorbed at 0.
pub fn feller_euler(a: f64, sigma: f64, t: f64, dt: f64, rng: &mut SimRng) -> f64 {
    let steps = (t / dt).round() as usize;
    let sq = dt.sqrt();
    let mut z = a;
    for _ in 0..steps {
        let g: f64 = StandardNormal.sample(rng);
        z += sigma * z.sqrt() * sq * g;
        if z <= 0.0 {
            return 0.0;
        }
    }
    z
}

/// Euler–Maruyama for `dY = 2√Y dW + β dt` from 0, truncated at 0.
pub fn besq_euler(beta: f64, t: f64, dt: f64, rng: &mut SimRng) -> f64 {
    let steps = (t / dt).round() as usize;
    let sq = dt.sqrt();
    let mut y: f64 = 0.0;
    for _ in 0..steps {
        let g: f64 = StandardNormal.sample(rng);
        y = (y + 2.0 * y.sqrt() * sq * g + beta * dt).max(0.0);
    }
    y
}

/// Empirical `E e^{−sY}` with its standard error.
pub fn laplace_estimate(sample: &[f64], s: f64) -> (f64, f64) {
    let n = sample.len() as f64;
    let v: Vec<f64> = sample.iter().map(|y| (-s * y).exp()).collect();
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Determinant of a 3×3 matrix by cofactor expansion.
pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Largest `|z|` over the real and imaginary parts when comparing the
/// empirical characteristic functions `E e^{iθx}` of two independent samples.
pub fn cf_two_sample_z(a: &[f64], b: &[f64], theta: f64) -> f64 {
    let part = |xs: &[f64], f: fn(f64) -> f64| {
        let n = xs.len() as f64;
        let v: Vec<f64> = xs.iter().map(|x| f(theta * x)).collect();
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1.0);
        (m, var / n)
    };
    let mut worst: f64 = 0.0;
    for f in [f64::cos as fn(f64) -> f64, f64::sin] {
        let (ma, va) = part(a, f);
        let (mb, vb) = part(b, f);
        let se = (va + vb).sqrt();
        if se > 0.0 {
            worst = worst.max((ma - mb).abs() / se);
        } else if ma != mb {
            return f64::INFINITY;
        }
    }
    worst
}
