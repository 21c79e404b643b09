//! Expectation-ratio computations: the exact order-statistics summation, its
//! Monte Carlo counterpart, the closed-form theoretical lower bound, and the
//! tail estimator feeding it.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::dist::{DiscreteDist, TRUNCATION_TOL};
use crate::error::{Error, Result};

/// Expected maximum of `m` independent draws, by the survival-function sum
/// `E[max] = sum_k (1 - F(k)^m)` truncated once the term drops below 1e-12.
pub fn exact_expected_max(dist: &DiscreteDist, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let cdf = dist.cdf_table()?;
    let mut total = 0.0;
    for &f in &cdf {
        // 1 - F^m evaluated stably for F near 1.
        total += if f >= 1.0 { 0.0 } else { -(m as f64 * f.ln()).exp_m1() };
    }
    // Tail beyond the table carries at most m * TRUNCATION_TOL per step and
    // the table already extends to negligible survival mass.
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::TruncationFailure)
    }
}

/// Ratio of the expected maximum of `m` draws to the expected value of one
/// draw, computed by the same truncated summation on both sides. Equals 1 at
/// `m = 1` and is nondecreasing in `m`.
pub fn exact_ratio_iid(dist: &DiscreteDist, m: u32) -> Result<f64> {
    Ok(exact_expected_max(dist, m)? / exact_expected_max(dist, 1)?)
}

/// A Monte Carlo ratio estimate with its 95% confidence interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McRatio {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Monte Carlo estimate of the expectation ratio: `n_samples` maxima of `m`
/// seeded draws, normal-approximation confidence interval on their mean,
/// denominator from the exact summation.
pub fn mc_ratio_iid(dist: &DiscreteDist, m: u32, n_samples: u32, seed: u64) -> Result<McRatio> {
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    if n_samples < 1_000 {
        return Err(Error::InvalidParameter(format!(
            "at least 1000 samples required, got {n_samples}"
        )));
    }
    let sampler = dist.sampler()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let mut max = 0u64;
        for _ in 0..m {
            max = max.max(sampler.sample(&mut rng));
        }
        let x = max as f64;
        sum += x;
        sum_sq += x * x;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let variance = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    let half_width = 1.96 * (variance / n).sqrt();

    let expected_single = exact_expected_max(dist, 1)?;
    Ok(McRatio {
        estimate: mean / expected_single,
        ci_lo: (mean - half_width) / expected_single,
        ci_hi: (mean + half_width) / expected_single,
    })
}

/// Closed-form lower bound on the expectation ratio:
/// `(1 + c) * (p - delta) * (1 - (1 - p - delta)^(m-1)) / (p + delta)`,
/// clamped at zero from below. `p` is the probability that a stabilization
/// time reaches `(1 + c)` times its mean and `delta` bounds the statistical
/// distance between the per-resource time distributions.
pub fn theoretical_ratio_lower_bound(c: f64, p: f64, delta: f64, m: u32) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("p must be in (0, 1), got {p}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta must be in [0, 1), got {delta}")));
    }
    if p + delta >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "p + delta must be below 1, got {}",
            p + delta
        )));
    }
    if p <= delta {
        return Err(Error::InvalidParameter(format!(
            "p must exceed delta, got p = {p}, delta = {delta}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let bound = (1.0 + c) * (p - delta) * (1.0 - (1.0 - p - delta).powi(m as i32 - 1)) / (p + delta);
    Ok(bound.max(0.0))
}

/// Fraction of samples at or above `(1 + c)` times the sample mean.
pub fn tail_probability(samples: &[f64], c: f64) -> f64 {
    assert!(!samples.is_empty(), "tail probability needs samples");
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let threshold = (1.0 + c) * mean;
    samples.iter().filter(|&&z| z >= threshold).count() as f64 / samples.len() as f64
}

/// Exact tail `P[Z >= (1 + c) * E[Z]]` of a distribution, used as the `p`
/// parameter of the bound when the law is known analytically.
pub fn exact_tail_probability(dist: &DiscreteDist, c: f64) -> Result<f64> {
    let mean = exact_expected_max(dist, 1)?;
    let threshold = (1.0 + c) * mean;
    let cdf = dist.cdf_table()?;
    let k = threshold.ceil() as usize;
    if k == 0 {
        return Ok(1.0);
    }
    if k - 1 >= cdf.len() {
        return Ok(0.0);
    }
    Ok((1.0 - cdf[k - 1]).max(TRUNCATION_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_one_for_single_draw() {
        for d in [
            DiscreteDist::geometric(0.5).unwrap(),
            DiscreteDist::poisson(5.0).unwrap(),
            DiscreteDist::negative_binomial(3.0, 0.5).unwrap(),
            DiscreteDist::logarithmic(0.7).unwrap(),
        ] {
            assert_eq!(exact_ratio_iid(&d, 1).unwrap(), 1.0);
        }
    }

    #[test]
    fn geometric_pair_ratio_is_four_thirds() {
        // Independent route: E[max of 2] = sum_k (2 * 0.5^k - 0.25^k) = 8/3,
        // E[Z] = 2, so the ratio is 4/3.
        let d = DiscreteDist::geometric(0.5).unwrap();
        let r = exact_ratio_iid(&d, 2).unwrap();
        assert!((r - 4.0 / 3.0).abs() <= 1e-9, "ratio {r}");
    }

    #[test]
    fn exact_ratio_nondecreasing_in_m() {
        for d in [
            DiscreteDist::geometric(0.5).unwrap(),
            DiscreteDist::poisson(5.0).unwrap(),
            DiscreteDist::negative_binomial(3.0, 0.5).unwrap(),
            DiscreteDist::logarithmic(0.7).unwrap(),
        ] {
            let mut prev = 0.0;
            for m in 1..=16 {
                let r = exact_ratio_iid(&d, m).unwrap();
                assert!(r >= prev, "{} m={m}: {r} < {prev}", d.label());
                prev = r;
            }
        }
    }

    #[test]
    fn mc_agrees_with_exact() {
        let d = DiscreteDist::geometric(0.5).unwrap();
        for m in [1, 2, 4, 8] {
            let exact = exact_ratio_iid(&d, m).unwrap();
            let mc = mc_ratio_iid(&d, m, 100_000, 99).unwrap();
            assert!(
                mc.ci_lo <= exact && exact <= mc.ci_hi,
                "m={m}: exact {exact} outside [{}, {}]",
                mc.ci_lo,
                mc.ci_hi
            );
        }
    }

    #[test]
    fn mc_estimate_near_one_for_single_draw() {
        let d = DiscreteDist::poisson(5.0).unwrap();
        let mc = mc_ratio_iid(&d, 1, 50_000, 7).unwrap();
        assert!(mc.ci_lo <= 1.0 && 1.0 <= mc.ci_hi);
    }

    #[test]
    fn mc_is_reproducible() {
        let d = DiscreteDist::logarithmic(0.7).unwrap();
        let a = mc_ratio_iid(&d, 3, 10_000, 42).unwrap();
        let b = mc_ratio_iid(&d, 3, 10_000, 42).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert_eq!(a.ci_lo, b.ci_lo);
    }

    #[test]
    fn bound_vanishes_for_one_dimension() {
        assert_eq!(theoretical_ratio_lower_bound(2.0, 0.3, 0.1, 1).unwrap(), 0.0);
    }

    #[test]
    fn bound_direct_evaluation() {
        // (1 + 2) * 0.2 * (1 - 0.8) / 0.2 = 0.6
        let b = theoretical_ratio_lower_bound(2.0, 0.2, 0.0, 2).unwrap();
        assert!((b - 0.6).abs() < 1e-12);
    }

    #[test]
    fn bound_approaches_limit_for_large_m() {
        for p in [0.05, 0.2] {
            let b = theoretical_ratio_lower_bound(2.0, p, 0.0, 4096).unwrap();
            assert!((b - 3.0).abs() < 1e-9, "p={p}: {b}");
        }
    }

    #[test]
    fn bound_monotonicities() {
        let mut prev = 0.0;
        for m in 1..=32 {
            let b = theoretical_ratio_lower_bound(1.0, 0.25, 0.05, m).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        let mut prev = 0.0;
        for c in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let b = theoretical_ratio_lower_bound(c, 0.25, 0.05, 8).unwrap();
            assert!(b >= prev);
            prev = b;
        }
        let mut prev = f64::INFINITY;
        for delta in [0.0, 0.05, 0.1, 0.2] {
            let b = theoretical_ratio_lower_bound(1.0, 0.25, delta, 8).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn bound_rejects_bad_parameters() {
        assert!(theoretical_ratio_lower_bound(0.0, 0.2, 0.0, 2).is_err());
        assert!(theoretical_ratio_lower_bound(1.0, 0.0, 0.0, 2).is_err());
        assert!(theoretical_ratio_lower_bound(1.0, 0.6, 0.5, 2).is_err());
        assert!(theoretical_ratio_lower_bound(1.0, 0.1, 0.2, 2).is_err());
    }

    #[test]
    fn tail_probability_examples() {
        assert_eq!(tail_probability(&[3.0, 3.0, 3.0], 0.5), 0.0);
        assert_eq!(tail_probability(&[1.0, 1.0, 1.0, 9.0], 1.0), 0.25);
    }

    #[test]
    fn tail_probability_matches_geometric_oracle() {
        use rand::SeedableRng;
        let d = DiscreteDist::geometric(0.5).unwrap();
        let sampler = d.sampler().unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        let samples: Vec<f64> =
            (0..1_000_000).map(|_| sampler.sample(&mut rng) as f64).collect();
        // Mean 2, threshold 6, so the tail is P[Z >= 6] = 0.5^5.
        let p = tail_probability(&samples, 2.0);
        assert!((p - 0.5f64.powi(5)).abs() < 0.002, "tail {p}");
    }
}
