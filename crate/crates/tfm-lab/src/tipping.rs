//! The invertible tipping-function families, the revenue maximization
//! problem, and the reduction from multidimensional knapsack to revenue
//! maximization.
//!
//! Every shipped family is zero at zero, strictly increasing and continuous
//! in the transaction value, and invertible. The families depend on the value
//! only; resource prices and consumption are carried by [`RMInstance`] as
//! problem data. Note that the raw mechanism tip, bid minus base fee, is not
//! a member of these families since it is negative at zero value.

use serde::{Deserialize, Serialize};

use crate::allocator::{solve, KnapsackInstance, KnapsackItem, KnapsackSolution, SolverChoice};
use crate::error::{Error, Result};
use crate::mechanism::ResourceVector;

/// Relative tolerance of numeric inversion.
pub const INVERT_TOL: f64 = 1e-9;

/// A tipping rule mapping transaction value to a tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "lowercase")]
pub enum TippingSpec {
    /// `beta * v`
    Linear { beta: f64 },
    /// `beta * v^alpha`
    Power { beta: f64, alpha: f64 },
    /// `beta * v / (1 + gamma * v)`, bounded above by `beta / gamma`
    Saturating { beta: f64, gamma: f64 },
}

impl TippingSpec {
    pub fn linear(beta: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        Ok(Self::Linear { beta })
    }

    pub fn power(beta: f64, alpha: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        require_positive("alpha", alpha)?;
        Ok(Self::Power { beta, alpha })
    }

    pub fn saturating(beta: f64, gamma: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        require_positive("gamma", gamma)?;
        Ok(Self::Saturating { beta, gamma })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Linear { beta } => require_positive("beta", beta),
            Self::Power { beta, alpha } => {
                require_positive("beta", beta)?;
                require_positive("alpha", alpha)
            }
            Self::Saturating { beta, gamma } => {
                require_positive("beta", beta)?;
                require_positive("gamma", gamma)
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Linear { .. } => "linear",
            Self::Power { .. } => "power",
            Self::Saturating { .. } => "saturating",
        }
    }

    /// Least upper bound of attainable tips.
    pub fn tip_supremum(&self) -> f64 {
        match *self {
            Self::Linear { .. } | Self::Power { .. } => f64::INFINITY,
            Self::Saturating { beta, gamma } => beta / gamma,
        }
    }

    /// Evaluates the tip for a nonnegative value.
    pub fn tip(&self, v: f64) -> f64 {
        assert!(v >= 0.0 && v.is_finite(), "value must be finite and nonnegative");
        match *self {
            Self::Linear { beta } => beta * v,
            Self::Power { beta, alpha } => beta * v.powf(alpha),
            Self::Saturating { beta, gamma } => beta * v / (1.0 + gamma * v),
        }
    }

    /// Finds the value whose tip is `t`, within [`INVERT_TOL`] relative error.
    /// Linear and power invert in closed form; the saturating family is
    /// inverted by bracketed bisection.
    pub fn invert(&self, t: f64) -> Result<f64> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::UnattainableTip { tip: t, family: self.family_name() });
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        match *self {
            Self::Linear { beta } => Ok(t / beta),
            Self::Power { beta, alpha } => Ok((t / beta).powf(1.0 / alpha)),
            Self::Saturating { .. } => {
                if t >= self.tip_supremum() {
                    return Err(Error::UnattainableTip { tip: t, family: self.family_name() });
                }
                self.bisect(t)
            }
        }
    }

    fn bisect(&self, t: f64) -> Result<f64> {
        // Grow the bracket until the tip clears t. Monotone continuity
        // guarantees a bracket exists for attainable targets.
        let mut hi = 1.0;
        let mut doublings = 0u32;
        while self.tip(hi) < t {
            hi *= 2.0;
            doublings += 1;
            if doublings > 4096 || !hi.is_finite() {
                return Err(Error::UnattainableTip { tip: t, family: self.family_name() });
            }
        }
        let mut lo = 0.0;
        let tol = INVERT_TOL * t.max(1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = self.tip(mid);
            if (f - t).abs() <= tol {
                return Ok(mid);
            }
            if f < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NoConvergence)
    }
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

/// Axiom diagnostics for a tipping rule over a value grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvReport {
    pub zero_at_zero: bool,
    pub positive_for_positive: bool,
    pub strictly_increasing: bool,
    pub round_trip_ok: bool,
    pub max_round_trip_error: f64,
}

impl FvReport {
    pub fn passed(&self) -> bool {
        self.zero_at_zero
            && self.positive_for_positive
            && self.strictly_increasing
            && self.round_trip_ok
    }
}

/// Checks the family axioms for an arbitrary tip function and optional
/// inverse over an ascending grid that starts at zero. Kept generic so tests
/// can feed deliberately broken functions as negative controls.
pub fn check_axioms_with(
    f: impl Fn(f64) -> f64,
    inverse: impl Fn(f64) -> Option<f64>,
    grid: &[f64],
) -> FvReport {
    assert!(!grid.is_empty() && grid[0] == 0.0, "grid must be ascending from zero");
    let zero_at_zero = f(0.0) == 0.0;
    let positive_for_positive = grid.iter().skip(1).all(|&v| f(v) > 0.0);
    let strictly_increasing = grid.windows(2).all(|w| f(w[1]) > f(w[0]));

    let mut max_err: f64 = 0.0;
    let mut round_trip_ok = true;
    for &v in grid {
        match inverse(f(v)) {
            Some(back) => {
                let err = (back - v).abs() / v.abs().max(1.0);
                max_err = max_err.max(err);
                if err > INVERT_TOL {
                    round_trip_ok = false;
                }
            }
            None => round_trip_ok = false,
        }
    }
    FvReport {
        zero_at_zero,
        positive_for_positive,
        strictly_increasing,
        round_trip_ok,
        max_round_trip_error: max_err,
    }
}

/// Axiom diagnostics for a [`TippingSpec`].
pub fn check_fv_axioms(spec: &TippingSpec, grid: &[f64]) -> FvReport {
    check_axioms_with(|v| spec.tip(v), |t| spec.invert(t).ok(), grid)
}

/// A revenue maximization instance: pick transactions maximizing the total
/// tip under per-resource bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RMInstance {
    pub dims: usize,
    pub prices: Vec<f64>,
    pub bounds: Vec<f64>,
    pub tipping: TippingSpec,
    pub transactions: Vec<(f64, ResourceVector)>,
}

impl RMInstance {
    pub fn new(
        prices: Vec<f64>,
        bounds: Vec<f64>,
        tipping: TippingSpec,
        transactions: Vec<(f64, ResourceVector)>,
    ) -> Result<Self> {
        tipping.validate()?;
        if prices.len() != bounds.len() {
            return Err(Error::DimensionMismatch { expected: bounds.len(), got: prices.len() });
        }
        let dims = bounds.len();
        for (v, c) in &transactions {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "transaction value must be nonnegative, got {v}"
                )));
            }
            if c.len() != dims {
                return Err(Error::DimensionMismatch { expected: dims, got: c.len() });
            }
        }
        Ok(Self { dims, prices, bounds, tipping, transactions })
    }
}

/// Solves revenue maximization by scoring each transaction with the tipping
/// rule and delegating to a knapsack solver over the same constraints.
pub fn solve_rm(inst: &RMInstance, choice: SolverChoice) -> Result<KnapsackSolution> {
    let items = inst
        .transactions
        .iter()
        .map(|(v, c)| KnapsackItem { value: inst.tipping.tip(*v), consumption: c.clone() })
        .collect();
    let knapsack = KnapsackInstance::new(inst.bounds.clone(), items)?;
    solve(&knapsack, choice)
}

/// Builds a revenue maximization instance equivalent to a knapsack instance.
///
/// Values are scaled by `C = range_cap / max_j v_j` so every target tip lands
/// in `[0, range_cap]`, then each transaction value is chosen by inversion so
/// its tip equals `C * v_j` exactly (within the inversion tolerance).
/// Consumption vectors and bounds are copied unchanged, so both problems have
/// the same feasible region and proportional objectives, and the optimal
/// subset is preserved. Returns the instance and the scale `C`.
pub fn reduce_mdk_to_rm(
    mdk: &KnapsackInstance,
    spec: &TippingSpec,
    prices: Vec<f64>,
    range_cap: f64,
) -> Result<(RMInstance, f64)> {
    spec.validate()?;
    if !(range_cap > 0.0 && range_cap < spec.tip_supremum()) {
        return Err(Error::InvalidParameter(format!(
            "range cap {range_cap} outside the attainable tip range of the {} family",
            spec.family_name()
        )));
    }
    let max_value = mdk.items.iter().map(|it| it.value).fold(0.0, f64::max);
    if max_value == 0.0 {
        return Err(Error::InvalidParameter(
            "reduction requires at least one positive item value".into(),
        ));
    }
    let scale = range_cap / max_value;
    let transactions = mdk
        .items
        .iter()
        .map(|it| Ok((spec.invert(scale * it.value)?, it.consumption.clone())))
        .collect::<Result<Vec<_>>>()?;
    let rm = RMInstance::new(prices, mdk.capacities.clone(), spec.clone(), transactions)?;
    Ok((rm, scale))
}

/// Default range cap: any positive value for unbounded families, half the
/// supremum for the saturating family.
pub fn default_range_cap(spec: &TippingSpec) -> f64 {
    let sup = spec.tip_supremum();
    if sup.is_finite() {
        sup / 2.0
    } else {
        1.0
    }
}
