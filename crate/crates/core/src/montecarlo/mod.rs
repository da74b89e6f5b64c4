//! Repeated state sampling with streaming statistics.
//!
//! Sample `i` of a run always uses substream `i` of the master seed, and
//! per-shard accumulators are folded in shard order, so results do not
//! depend on the size of the thread pool.

mod experiments;
mod histogram;
mod ks;
mod stats;

use rayon::prelude::*;

pub use experiments::{
    run_chsh_distribution, run_correlation_sweep, run_distribution, run_variance_scan,
    sample_chsh_readings, sample_chsh_values, sweep_correlations, ChshRun, ChshSummary,
    CorrelationSweep, DistributionRun, ExperimentPlan, PairSelector, SamplingPath, Showcase,
    SweepRow, VarianceRow, FAST_PATH_THRESHOLD,
};
pub use histogram::{Histogram, HistogramSpec};
pub use ks::{ks_distance, ks_two_sample, standard_normal_cdf, MIN_KS_SAMPLES};
pub use stats::SampleStats;

/// Samples per shard.
pub const SHARD_SIZE: u64 = 4096;

/// Shards evaluated concurrently before their results are folded in.
const SHARDS_PER_BATCH: u64 = 64;

/// Folds `step` over sample indices `0..n`.
///
/// Each shard of [`SHARD_SIZE`] consecutive indices gets a fresh accumulator
/// from `init`; shards run in parallel and are merged into the result in
/// ascending order.
pub fn sharded_fold<A, I, S, M>(n: u64, init: I, step: S, mut merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64) + Sync,
    M: FnMut(&mut A, A),
{
    let shards = n.div_ceil(SHARD_SIZE);
    let mut acc = init();
    let mut next = 0;
    while next < shards {
        let end = (next + SHARDS_PER_BATCH).min(shards);
        let parts: Vec<A> = (next..end)
            .into_par_iter()
            .map(|shard| {
                let mut local = init();
                let lo = shard * SHARD_SIZE;
                let hi = (lo + SHARD_SIZE).min(n);
                for i in lo..hi {
                    step(&mut local, i);
                }
                local
            })
            .collect();
        for part in parts {
            merge(&mut acc, part);
        }
        next = end;
    }
    acc
}

/// `f(i)` for `i` in `0..n`, in index order.
pub fn sharded_map<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let mut out = sharded_fold(
        n,
        Vec::new,
        |v: &mut Vec<T>, i| v.push(f(i)),
        |acc: &mut Vec<T>, part| acc.extend(part),
    );
    out.shrink_to_fit();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(f)
    }

    #[test]
    fn map_preserves_index_order() {
        let n = 3 * SHARD_SIZE + 17;
        let v = sharded_map(n, |i| i);
        assert_eq!(v, (0..n).collect::<Vec<_>>());
        assert!(sharded_map(0, |i| i).is_empty());
    }

    #[test]
    fn fold_is_independent_of_pool_size() {
        let n = 70 * SHARD_SIZE + 5;
        let run = || {
            sharded_fold(
                n,
                SampleStats::new,
                |s, i| s.push(((i as f64) * 0.618).sin()),
                |a, b| a.merge(&b),
            )
        };
        let one = in_pool(1, run);
        let three = in_pool(3, run);
        assert_eq!(one.count(), n);
        assert_eq!(one.mean().to_bits(), three.mean().to_bits());
        assert_eq!(one.m2().to_bits(), three.m2().to_bits());
    }
}
