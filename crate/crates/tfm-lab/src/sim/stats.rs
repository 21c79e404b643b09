//! Small statistics toolkit: empirical total variation distance, bootstrap
//! confidence intervals, and sample correlation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Total variation estimate between two integer sample sets: half the L1
/// distance between their empirical distributions on the union support.
pub fn estimate_stat_distance(a: &[u64], b: &[u64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "both sample sets must be nonempty");
    use std::collections::BTreeMap;
    let mut counts: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for &x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for &x in b {
        counts.entry(x).or_default().1 += 1;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    0.5 * counts
        .values()
        .map(|&(ca, cb)| (ca as f64 / na - cb as f64 / nb).abs())
        .sum::<f64>()
}

pub fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Percentile bootstrap 95% interval for the mean.
pub fn bootstrap_mean_ci(samples: &[f64], resamples: u32, seed: u64) -> (f64, f64) {
    assert!(!samples.is_empty());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(resamples as usize);
    for _ in 0..resamples {
        let mut sum = 0.0;
        for _ in 0..samples.len() {
            sum += samples[rng.gen_range(0..samples.len())];
        }
        means.push(sum / samples.len() as f64);
    }
    percentile_interval(means)
}

/// Percentile bootstrap 95% interval for the ratio of two sample means,
/// resampling numerator and denominator independently.
pub fn bootstrap_ratio_ci(numerator: &[f64], denominator: &[f64], resamples: u32, seed: u64) -> (f64, f64) {
    assert!(!numerator.is_empty() && !denominator.is_empty());
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(resamples as usize);
    for _ in 0..resamples {
        let mut num = 0.0;
        for _ in 0..numerator.len() {
            num += numerator[rng.gen_range(0..numerator.len())];
        }
        let mut den = 0.0;
        for _ in 0..denominator.len() {
            den += denominator[rng.gen_range(0..denominator.len())];
        }
        let num_mean = num / numerator.len() as f64;
        let den_mean = den / denominator.len() as f64;
        if den_mean > 0.0 {
            ratios.push(num_mean / den_mean);
        }
    }
    assert!(!ratios.is_empty(), "denominator resamples were all zero");
    percentile_interval(ratios)
}

fn percentile_interval(mut xs: Vec<f64>) -> (f64, f64) {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = xs[((xs.len() as f64 * 0.025) as usize).min(xs.len() - 1)];
    let hi = xs[((xs.len() as f64 * 0.975) as usize).min(xs.len() - 1)];
    (lo, hi)
}

/// Pearson correlation coefficient; zero for degenerate inputs.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va.sqrt() * vb.sqrt())
    }
}
