//! Constant-elasticity demand with lognormal noise, mempool generation, and
//! stable-price computation.
//!
//! Per-resource demand follows `D_i(p) = A_i * p^(-elasticity_i)` where `p`
//! is the effective price per unit of resource `i` under the active
//! mechanism. Each resource's demand depends on its own price only, so the
//! per-resource demand streams are mutually independent.

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{ResourceVector, Transaction, FEE_FLOOR};

/// Demand curve of a single resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceDemand {
    /// Consumption at unit price.
    pub amplitude: f64,
    /// Price elasticity, must be positive.
    pub elasticity: f64,
}

impl ResourceDemand {
    pub fn demand_at(&self, price: f64) -> f64 {
        self.amplitude * price.max(FEE_FLOOR).powf(-self.elasticity)
    }
}

/// Mempool distribution: per-resource demand curves, multiplicative lognormal
/// noise on each resource's total, transaction sizing, and the distribution
/// of value over base cost. A margin range straddling 1 produces a mix of
/// eligible and ineligible transactions so the base fee binds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandModel {
    pub resources: Vec<ResourceDemand>,
    /// Sigma of the mean-one lognormal factor applied per resource per block.
    pub noise_sigma: f64,
    /// Mean transaction size in resource units.
    pub tx_size_mean: f64,
    /// Sizes are uniform in `mean * [1 - jitter, 1 + jitter]`.
    pub tx_size_jitter: f64,
    /// Value margin is uniform in `[margin_lo, margin_hi]`; a transaction is
    /// eligible exactly when its margin is at least 1.
    pub margin_lo: f64,
    pub margin_hi: f64,
}

impl DemandModel {
    pub fn validate(&self) -> Result<()> {
        if self.resources.is_empty() {
            return Err(Error::InvalidParameter("at least one resource demand required".into()));
        }
        for (i, r) in self.resources.iter().enumerate() {
            if !(r.amplitude.is_finite() && r.amplitude > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "amplitude {i} must be positive, got {}",
                    r.amplitude
                )));
            }
            if !(r.elasticity.is_finite() && r.elasticity > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "elasticity {i} must be positive, got {}",
                    r.elasticity
                )));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise sigma must be nonnegative".into()));
        }
        if !(self.tx_size_mean > 0.0) {
            return Err(Error::InvalidParameter("tx size mean must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.tx_size_jitter) {
            return Err(Error::InvalidParameter("tx size jitter must be in [0, 1)".into()));
        }
        if !(self.margin_lo >= 0.0 && self.margin_hi > self.margin_lo) {
            return Err(Error::InvalidParameter("margin range must be nonnegative and nonempty".into()));
        }
        if self.margin_hi < 1.0 {
            return Err(Error::InvalidParameter(
                "margin range must reach 1 so eligible transactions exist".into(),
            ));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.resources.len()
    }

    /// Rescales every amplitude, the shape of a demand shock.
    pub fn scaled_amplitudes(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for r in &mut out.resources {
            r.amplitude *= factor;
        }
        out
    }
}

/// Draws a mempool whose eligible consumption of each resource matches the
/// demand curve at the given effective prices, up to the configured noise.
///
/// Transactions consume a single resource each; sizes are jittered and the
/// final eligible transaction per resource is truncated so eligible totals
/// hit the noisy demand target exactly. Bids are truthful. Ineligible
/// transactions (margin below 1) accumulate alongside as a byproduct.
pub fn generate_mempool(
    model: &DemandModel,
    prices: &[f64],
    next_id: &mut u64,
    rng: &mut impl Rng,
) -> Result<Vec<Transaction>> {
    let m = model.dims();
    if prices.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: prices.len() });
    }
    let noise = if model.noise_sigma > 0.0 {
        Some(LogNormal::new(-0.5 * model.noise_sigma * model.noise_sigma, model.noise_sigma).unwrap())
    } else {
        None
    };

    let mut pool = Vec::new();
    for i in 0..m {
        let factor = noise.as_ref().map_or(1.0, |d| d.sample(rng));
        let target = model.resources[i].demand_at(prices[i]) * factor;
        let mut remaining = target;
        // Loose guard against margin ranges with little eligible mass.
        let mut draws_left = 50 + 200 * (target / model.tx_size_mean).ceil() as u64;
        while remaining > 1e-12 * target && draws_left > 0 {
            draws_left -= 1;
            let jitter = if model.tx_size_jitter > 0.0 {
                rng.gen_range(1.0 - model.tx_size_jitter..=1.0 + model.tx_size_jitter)
            } else {
                1.0
            };
            let margin = rng.gen_range(model.margin_lo..=model.margin_hi);
            let mut size = model.tx_size_mean * jitter;
            if margin >= 1.0 && size > remaining {
                size = remaining;
            }
            let value = margin * prices[i] * size;
            let tx = Transaction::truthful(*next_id, value, ResourceVector::single(m, i, size)?)?;
            *next_id += 1;
            if margin >= 1.0 {
                remaining -= size;
            }
            pool.push(tx);
        }
    }
    Ok(pool)
}

/// Total eligible consumption per resource at the given effective prices.
pub fn eligible_consumption(pool: &[Transaction], prices: &[f64]) -> Result<Vec<f64>> {
    let mut totals = vec![0.0; prices.len()];
    for tx in pool {
        if tx.bid >= tx.consumption.dot(prices)? {
            for (t, c) in totals.iter_mut().zip(tx.consumption.entries()) {
                *t += c;
            }
        }
    }
    Ok(totals)
}

/// Solves `demand(price) = target` for a single decreasing demand function by
/// doubling bracket growth and bisection.
pub(crate) fn bisect_decreasing(
    demand: impl Fn(f64) -> f64,
    target: f64,
) -> Result<f64> {
    let mut hi = 1.0;
    let mut growths = 0;
    while demand(hi) > target {
        hi *= 2.0;
        growths += 1;
        if growths > 400 {
            return Err(Error::NoRoot);
        }
    }
    let mut lo = hi / 2.0;
    while demand(lo) < target {
        lo /= 2.0;
        growths += 1;
        if lo < FEE_FLOOR || growths > 800 {
            return Err(Error::NoRoot);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if demand(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
