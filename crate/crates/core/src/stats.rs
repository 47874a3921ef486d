//! Summation, moment accumulation and the goodness-of-fit statistics used by
//! the verification harness.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ChiSquared, ContinuousCDF};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// First and second (cross) moments of `K` jointly observed quantities.
#[derive(Debug, Clone)]
pub struct Moments<const K: usize> {
    n: u64,
    sum: [KahanSum; K],
    cross: [[KahanSum; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Self {
            n: 0,
            sum: [KahanSum::default(); K],
            cross: [[KahanSum::default(); K]; K],
        }
    }
}

impl<const K: usize> Moments<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: [f64; K]) {
        self.n += 1;
        for i in 0..K {
            self.sum[i].add(x[i]);
            for j in i..K {
                self.cross[i][j].add(x[i] * x[j]);
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        for i in 0..K {
            self.sum[i].merge(&other.sum[i]);
            for j in i..K {
                self.cross[i][j].merge(&other.cross[i][j]);
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i].value() / self.n as f64
    }

    /// Unbiased covariance of components `i` and `j`.
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let n = self.n as f64;
        let c = (self.cross[a][b].value() - self.sum[a].value() * self.sum[b].value() / n) / (n - 1.0);
        if a == b {
            c.max(0.0)
        } else {
            c
        }
    }

    pub fn var(&self, i: usize) -> f64 {
        self.cov(i, i)
    }

    /// Standard error of the mean of component `i`.
    pub fn se(&self, i: usize) -> f64 {
        (self.var(i) / self.n as f64).sqrt()
    }

    /// Standard error of `mean(i) - mean(j)` accounting for their covariance.
    pub fn se_diff(&self, i: usize, j: usize) -> f64 {
        let v = self.var(i) + self.var(j) - 2.0 * self.cov(i, j);
        (v.max(0.0) / self.n as f64).sqrt()
    }
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let mut m = Moments::<1>::new();
    for &x in xs {
        m.push([x]);
    }
    (m.mean(0), m.se(0))
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// Outcome of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS distance between `sample` and a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs());
    }
    let sn = n.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
    }
}

/// Two-sample KS distance; ties (including atoms) are handled exactly.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sn = ne.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
    }
}

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial
/// proportion at confidence `1 - alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> (f64, f64) {
    let (k, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0)
            .map(|b| b.inverse_cdf(alpha / 2.0))
            .unwrap_or(0.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k)
            .map(|b| b.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(1.0)
    };
    (lower, upper)
}

/// Poisson probability mass function.
pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * mean.ln() - mean - statrs::function::gamma::ln_gamma(kf + 1.0)).exp()
}

/// Pearson chi-square goodness of fit of integer counts against a pmf. Cells
/// with expected count below 5 are pooled into the tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn chi_square_counts(sample: &[u64], pmf: impl Fn(u64) -> f64) -> ChiSquareResult {
    let n = sample.len() as f64;
    let max = sample.iter().copied().max().unwrap_or(0);
    let mut observed = vec![0.0; max as usize + 1];
    for &k in sample {
        observed[k as usize] += 1.0;
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut tail_obs = 0.0;
    let mut cum_p = 0.0;
    let mut k = 0u64;
    loop {
        let p = pmf(k);
        let expected = n * p;
        let rest = n * (1.0 - cum_p - p);
        if expected < 5.0 || rest < 5.0 {
            break;
        }
        cum_p += p;
        cells.push((observed.get(k as usize).copied().unwrap_or(0.0), expected));
        k += 1;
    }
    for (idx, &o) in observed.iter().enumerate() {
        if idx as u64 >= k {
            tail_obs += o;
        }
    }
    cells.push((tail_obs, n * (1.0 - cum_p).max(0.0)));
    let statistic: f64 = cells
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = cells.len().saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64)
        .map(|c| 1.0 - c.cdf(statistic))
        .unwrap_or(f64::NAN);
    ChiSquareResult {
        statistic,
        dof,
        p_value,
    }
}
