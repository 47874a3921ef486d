//! Compound Poisson processes `Y_t = Σ_{n ≤ ζ} V⁽ⁿ⁾_t` built directly from a
//! sampler of the summand paths.

use crate::path::SamplePath;
use crate::prm::poisson_count;
use crate::rng::SimRng;

/// Draws `ζ ~ Poisson(θ)` and sums `ζ` i.i.d. paths from `v_sampler`, each
/// evaluated on `grid`.
pub fn compound_poisson_sample(
    v_sampler: impl Fn(&mut SimRng, &[f64]) -> Vec<f64>,
    theta: f64,
    grid: &[f64],
    rng: &mut SimRng,
) -> SamplePath {
    let mut path = SamplePath::constant(grid, 0.0);
    let count = poisson_count(theta, rng);
    for _ in 0..count {
        let v = v_sampler(rng, grid);
        path.add_assign(&v);
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamFamily;
    use crate::stats::{chi_square_counts, poisson_pmf};

    #[test]
    fn zero_intensity_gives_zero_path() {
        let mut rng = StreamFamily::tagged(1, "cp").stream(0);
        let p = compound_poisson_sample(|_, g| vec![1.0; g.len()], 0.0, &[0.5, 1.0], &mut rng);
        assert_eq!(p.values, vec![0.0, 0.0]);
    }

    #[test]
    fn unit_summands_give_poisson_marginal() {
        let fam = StreamFamily::tagged(2, "cp-poisson");
        let counts: Vec<u64> = crate::mc::collect(20_000, &fam, |rng, _| {
            compound_poisson_sample(|_, g| vec![1.0; g.len()], 3.0, &[1.0], rng).last() as u64
        });
        let r = chi_square_counts(&counts, |k| poisson_pmf(k, 3.0));
        assert!(r.p_value > 1e-4, "{r:?}");
    }
}
