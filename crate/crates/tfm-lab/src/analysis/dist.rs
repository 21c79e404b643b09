//! Discrete distributions used to model stabilization times.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Mass beyond this point is ignored when truncating infinite sums.
pub const TRUNCATION_TOL: f64 = 1e-12;

const MAX_SUPPORT_SCAN: u64 = 10_000_000;

/// The four stabilization-time families.
///
/// Geometric and Logarithmic are supported on `{1, 2, ...}`, Poisson and
/// NegativeBinomial on `{0, 1, ...}`. The Logarithmic family has
/// `pmf(k) = -q^k / (k * ln(1 - q))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DiscreteDist {
    Geometric { q: f64 },
    Poisson { lambda: f64 },
    NegativeBinomial { r: f64, q: f64 },
    Logarithmic { q: f64 },
}

impl DiscreteDist {
    pub fn geometric(q: f64) -> Result<Self> {
        let d = Self::Geometric { q };
        d.validate()?;
        Ok(d)
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        let d = Self::Poisson { lambda };
        d.validate()?;
        Ok(d)
    }

    pub fn negative_binomial(r: f64, q: f64) -> Result<Self> {
        let d = Self::NegativeBinomial { r, q };
        d.validate()?;
        Ok(d)
    }

    pub fn logarithmic(q: f64) -> Result<Self> {
        let d = Self::Logarithmic { q };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Geometric { q } => (0.0..1.0).contains(&(1.0 - q)) && q > 0.0 && q <= 1.0,
            Self::Poisson { lambda } => lambda.is_finite() && lambda > 0.0,
            Self::NegativeBinomial { r, q } => {
                r.is_finite() && r > 0.0 && q > 0.0 && q < 1.0
            }
            Self::Logarithmic { q } => q > 0.0 && q < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid distribution parameters: {self:?}")))
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Geometric { .. } => "geometric",
            Self::Poisson { .. } => "poisson",
            Self::NegativeBinomial { .. } => "negative_binomial",
            Self::Logarithmic { .. } => "logarithmic",
        }
    }

    /// First point of the support.
    pub fn support_start(&self) -> u64 {
        match self {
            Self::Geometric { .. } | Self::Logarithmic { .. } => 1,
            Self::Poisson { .. } | Self::NegativeBinomial { .. } => 0,
        }
    }

    /// Probability mass at `k`; zero below the support.
    pub fn pmf(&self, k: u64) -> f64 {
        if k < self.support_start() {
            return 0.0;
        }
        let k_f = k as f64;
        match *self {
            Self::Geometric { q } => q * (1.0 - q).powi((k - 1) as i32),
            Self::Poisson { lambda } => {
                (k_f * lambda.ln() - lambda - ln_gamma(k_f + 1.0)).exp()
            }
            Self::NegativeBinomial { r, q } => {
                // Failures before the r-th success with success probability q.
                let log_coeff = ln_gamma(k_f + r) - ln_gamma(k_f + 1.0) - ln_gamma(r);
                (log_coeff + r * q.ln() + k_f * (1.0 - q).ln()).exp()
            }
            Self::Logarithmic { q } => -q.powi(k as i32) / (k_f * (1.0 - q).ln()),
        }
    }

    /// Cumulative mass up to and including `k`, by summation from the support
    /// start. Closed form for the geometric family.
    pub fn cdf(&self, k: u64) -> f64 {
        match *self {
            Self::Geometric { q } => {
                if k == 0 {
                    0.0
                } else {
                    1.0 - (1.0 - q).powi(k as i32)
                }
            }
            _ => {
                let mut cum = 0.0;
                for j in self.support_start()..=k {
                    cum += self.pmf(j);
                }
                cum.min(1.0)
            }
        }
    }

    /// Cumulative masses for `k = 0..=limit`, where `limit` is the first
    /// point whose tail mass falls below [`TRUNCATION_TOL`].
    pub(crate) fn cdf_table(&self) -> Result<Vec<f64>> {
        let mut table = Vec::new();
        let mut cum = 0.0;
        let mut k = 0u64;
        loop {
            cum += self.pmf(k);
            table.push(cum.min(1.0));
            if 1.0 - cum < TRUNCATION_TOL {
                return Ok(table);
            }
            k += 1;
            if k > MAX_SUPPORT_SCAN {
                return Err(Error::TruncationFailure);
            }
        }
    }

    /// Seedable inverse-transform sampler.
    pub fn sampler(&self) -> Result<DistSampler> {
        Ok(DistSampler { cdf: self.cdf_table()? })
    }
}

/// Inverse-transform sampler over a precomputed cumulative table.
#[derive(Debug, Clone)]
pub struct DistSampler {
    cdf: Vec<f64>,
}

impl DistSampler {
    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        let u: f64 = rng.gen();
        // First k with cdf[k] > u; the truncated tail maps to the last point.
        let k = self.cdf.partition_point(|&c| c <= u);
        k.min(self.cdf.len() - 1) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn geometric_closed_forms() {
        let d = DiscreteDist::geometric(0.5).unwrap();
        assert_eq!(d.pmf(1), 0.5);
        assert_eq!(d.cdf(2), 0.75);
        assert_eq!(d.pmf(0), 0.0);
    }

    #[test]
    fn poisson_at_zero() {
        let lambda = 5.0;
        let d = DiscreteDist::poisson(lambda).unwrap();
        assert!((d.pmf(0) - (-lambda).exp()).abs() < 1e-15);
    }

    #[test]
    fn pmfs_sum_to_one() {
        for d in [
            DiscreteDist::geometric(0.5).unwrap(),
            DiscreteDist::poisson(5.0).unwrap(),
            DiscreteDist::negative_binomial(3.0, 0.5).unwrap(),
            DiscreteDist::logarithmic(0.7).unwrap(),
        ] {
            let table = d.cdf_table().unwrap();
            let total = *table.last().unwrap();
            assert!(
                (1.0 - total).abs() < 1e-11,
                "{} sums to {total}",
                d.label()
            );
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(DiscreteDist::geometric(0.0).is_err());
        assert!(DiscreteDist::geometric(1.5).is_err());
        assert!(DiscreteDist::poisson(-1.0).is_err());
        assert!(DiscreteDist::negative_binomial(0.0, 0.5).is_err());
        assert!(DiscreteDist::logarithmic(1.0).is_err());
    }

    #[test]
    fn sampler_matches_pmf() {
        let d = DiscreteDist::geometric(0.5).unwrap();
        let sampler = d.sampler().unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        let n = 200_000;
        let mut ones = 0u64;
        let mut sum = 0u64;
        for _ in 0..n {
            let k = sampler.sample(&mut rng);
            sum += k;
            if k == 1 {
                ones += 1;
            }
        }
        let mean = sum as f64 / n as f64;
        assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.01);
    }
}
