//! Replication engine.
//!
//! Replications are cut into fixed chunks of [`CHUNK`] indices. Each chunk is
//! accumulated independently (possibly on different workers) and the partial
//! results are merged in chunk order, so the statistics are bitwise identical
//! for any worker count.

use rayon::prelude::*;

use crate::rng::{SimRng, StreamFamily};
use crate::stats::Moments;

pub const CHUNK: usize = 1024;

fn chunk_bounds(reps: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let chunks = reps.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(reps)))
}

/// Runs `reps` replications of `f` and accumulates the moments of its output.
pub fn replicate<const K: usize, F>(reps: usize, family: &StreamFamily, f: F) -> Moments<K>
where
    F: Fn(&mut SimRng, u64) -> [f64; K] + Sync,
{
    let partials: Vec<Moments<K>> = chunk_bounds(reps)
        .map(|(lo, hi)| {
            let mut m = Moments::new();
            for i in lo..hi {
                let mut rng = family.stream(i as u64);
                m.push(f(&mut rng, i as u64));
            }
            m
        })
        .collect();
    let mut total = Moments::new();
    for p in &partials {
        total.merge(p);
    }
    total
}

/// Runs `reps` replications and returns their outputs in replication order.
pub fn collect<T, F>(reps: usize, family: &StreamFamily, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng, u64) -> T + Sync,
{
    let nested: Vec<Vec<T>> = chunk_bounds(reps)
        .map(|(lo, hi)| {
            (lo..hi)
                .map(|i| {
                    let mut rng = family.stream(i as u64);
                    f(&mut rng, i as u64)
                })
                .collect()
        })
        .collect();
    nested.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn worker_count_does_not_change_results() {
        let fam = StreamFamily::tagged(11, "mc-test");
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    replicate::<2, _>(5000, &fam, |rng, _| {
                        let x: f64 = rng.random();
                        [x, x * x]
                    })
                })
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.mean(0).to_bits(), b.mean(0).to_bits());
        assert_eq!(a.var(1).to_bits(), b.var(1).to_bits());
        assert!((a.mean(0) - 0.5).abs() < 4.0 * a.se(0));
    }

    #[test]
    fn collect_preserves_order() {
        let fam = StreamFamily::tagged(1, "order");
        let v = collect(3000, &fam, |_, i| i);
        assert!(v.iter().enumerate().all(|(k, &i)| k as u64 == i));
    }
}
