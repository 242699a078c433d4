//! Latency statistics (weighted percentile and mean), wall-clock timing of
//! allocation calls, and 95% confidence intervals.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted multiset of hop latencies: latency value -> number of UEs at it.
pub type LatencyHistogram = BTreeMap<u32, u64>;

/// Nearest-rank weighted percentile: the smallest value `v` such that the
/// cumulative weight of values `<= v` reaches `ceil(p/100 * total_weight)`.
/// No interpolation; the result is always a member of the multiset.
pub fn weighted_percentile(multiset: &LatencyHistogram, p: f64) -> Result<u32> {
    if !(0.0..=100.0).contains(&p) || p == 0.0 {
        return Err(Error::invalid(format!("percentile p={p} outside (0, 100]")));
    }
    let total: u64 = multiset.values().sum();
    if total == 0 {
        return Err(Error::invalid("weighted_percentile of empty multiset"));
    }
    // p * total is exact in f64 for the integer weights we deal with, so the
    // ceiling does not pick up spurious ulps (e.g. p=90, total=10 -> rank 9).
    let rank = ((p * total as f64) / 100.0).ceil().max(1.0) as u64;
    let mut cum = 0u64;
    for (&value, &weight) in multiset {
        cum += weight;
        if cum >= rank {
            return Ok(value);
        }
    }
    // Unreachable: cum ends at total >= rank.
    Ok(*multiset.keys().next_back().expect("nonempty"))
}

/// Weighted mean: sum(value * weight) / sum(weight).
pub fn weighted_mean(multiset: &LatencyHistogram) -> Result<f64> {
    let total: u64 = multiset.values().sum();
    if total == 0 {
        return Err(Error::invalid("weighted_mean of empty multiset"));
    }
    let sum: u128 = multiset
        .iter()
        .map(|(&v, &w)| v as u128 * w as u128)
        .sum();
    Ok(sum as f64 / total as f64)
}

/// Times a single allocation invocation with the monotonic clock. Inputs must
/// be fully materialized before the call so the measurement covers only the
/// decision itself.
pub fn measure<T>(exec: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = exec();
    (out, start.elapsed().as_secs_f64())
}

/// Normal-approximation 95% confidence interval: mean +/- 1.96 * s / sqrt(n),
/// with `s` the sample standard deviation (n-1 denominator).
pub fn ci95(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(format!("ci95 requires >= 2 samples, got {n}")));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1) as f64;
    let halfwidth = 1.96 * var.sqrt() / (n as f64).sqrt();
    Ok((mean, halfwidth))
}

/// Per-(slot, algorithm, k) result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub slot: u64,
    pub algorithm: String,
    pub k: usize,
    pub fraction: f64,
    pub p90_hops: u32,
    pub mean_hops: f64,
    pub exec_time_s: f64,
    pub total_ues: u64,
}

/// Per-(algorithm, fraction) aggregate over all simulated slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub algorithm: String,
    pub k: usize,
    pub fraction: f64,
    pub mean_p90: f64,
    pub ci95_halfwidth: f64,
    pub mean_exec_time_s: f64,
    pub slots: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multiset(pairs: &[(u32, u64)]) -> LatencyHistogram {
        pairs.iter().copied().collect()
    }

    #[test]
    fn percentile_nearest_rank() {
        // rank ceil(90/100 * 10) = 9, and the 9th expanded element is 0
        let m = multiset(&[(0, 9), (10, 1)]);
        assert_eq!(weighted_percentile(&m, 90.0).unwrap(), 0);
        assert_eq!(weighted_percentile(&m, 91.0).unwrap(), 10);
        assert_eq!(weighted_percentile(&m, 100.0).unwrap(), 10);
    }

    #[test]
    fn percentile_constant_multiset() {
        for w in [1, 7, 1000] {
            let m = multiset(&[(5, w)]);
            for p in [1.0, 50.0, 90.0, 100.0] {
                assert_eq!(weighted_percentile(&m, p).unwrap(), 5);
            }
        }
    }

    #[test]
    fn percentile_rejects_empty_and_bad_p() {
        assert!(weighted_percentile(&multiset(&[]), 90.0).is_err());
        let m = multiset(&[(1, 1)]);
        assert!(weighted_percentile(&m, 0.0).is_err());
        assert!(weighted_percentile(&m, 100.1).is_err());
    }

    #[test]
    fn mean_small_cases() {
        assert_eq!(weighted_mean(&multiset(&[(1, 1), (3, 1)])).unwrap(), 2.0);
        assert_eq!(weighted_mean(&multiset(&[(0, 17)])).unwrap(), 0.0);
        assert!(weighted_mean(&multiset(&[])).is_err());
    }

    /// Expansion oracle: materialize the weighted multiset as a sorted list
    /// and compute the statistics directly on it.
    fn expanded(m: &LatencyHistogram) -> Vec<u32> {
        let mut out = Vec::new();
        for (&v, &w) in m {
            out.extend(std::iter::repeat(v).take(w as usize));
        }
        out
    }

    #[test]
    fn percentile_and_mean_match_expansion_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(202);
        for _ in 0..300 {
            let entries = rng.gen_range(1..12);
            let mut m = LatencyHistogram::new();
            for _ in 0..entries {
                *m.entry(rng.gen_range(0..40)).or_insert(0) += rng.gen_range(1..20) as u64;
            }
            let list = expanded(&m);
            let total = list.len() as u64;

            for _ in 0..4 {
                let p = rng.gen_range(1..=100) as f64;
                let rank = ((p * total as f64) / 100.0).ceil().max(1.0) as usize;
                let oracle = list[rank - 1];
                assert_eq!(weighted_percentile(&m, p).unwrap(), oracle, "p={p} m={m:?}");
            }
            let oracle_mean = list.iter().map(|&v| v as u64).sum::<u64>() as f64 / total as f64;
            assert_eq!(weighted_mean(&m).unwrap(), oracle_mean);
            assert_eq!(
                weighted_percentile(&m, 100.0).unwrap(),
                *list.last().unwrap()
            );
        }
    }

    #[test]
    fn ci95_hand_cases() {
        let (mean, hw) = ci95(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(mean, 1.0);
        assert_eq!(hw, 0.0);

        // samples {0, 2}: mean 1, s = sqrt(2), halfwidth = 1.96*sqrt(2)/sqrt(2)
        let (mean, hw) = ci95(&[0.0, 2.0]).unwrap();
        assert_eq!(mean, 1.0);
        assert!((hw - 1.96).abs() < 1e-12);

        assert!(ci95(&[1.0]).is_err());
    }

    #[test]
    fn ci95_monte_carlo_coverage() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(3.0, 2.0).unwrap();
        let trials = 2000;
        let mut covered = 0;
        for _ in 0..trials {
            let samples: Vec<f64> = (0..40).map(|_| normal.sample(&mut rng)).collect();
            let (mean, hw) = ci95(&samples).unwrap();
            if (mean - 3.0).abs() <= hw {
                covered += 1;
            }
        }
        let rate = covered as f64 / trials as f64;
        // 95% nominal coverage; allow sampling slack
        assert!((0.92..=0.98).contains(&rate), "coverage {rate}");
    }

    #[test]
    fn measure_noop_is_fast() {
        let ((), secs) = measure(|| ());
        assert!(secs >= 0.0);
        assert!(secs < 1e-3, "no-op stub took {secs}s");
    }

    #[test]
    fn measure_repeatability_sanity() {
        let work = || (0..1000u64).sum::<u64>();
        let (a, t1) = measure(work);
        let (b, t2) = measure(work);
        assert_eq!(a, b);
        assert!(t1 >= 0.0 && t2 >= 0.0);
    }
}
