//! Chain simulation: mechanisms, per-block stepping, demand-shock
//! stabilization experiments, and the stable-state welfare comparison.
//!
//! Every run is deterministic given its seed. Independent runs fan out across
//! threads; traces are write-once.

pub mod demand;
pub mod stats;
pub mod trace;

pub use demand::{generate_mempool, DemandModel, ResourceDemand};
pub use stats::estimate_stat_distance;
pub use trace::{summarize_trace, BlockRecord, ChainTrace, TraceSummary};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{build_block_1d, build_block_md, solve, KnapsackInstance, KnapsackItem, SolverChoice};
use crate::error::{Error, Result};
use crate::mechanism::{
    check_safety_gas_cap, gas_of, update_base_fee_1d, update_base_fee_md, update_weights_adaptive,
    BaseFeeState, Block, GasConfig, ResourceBounds, ResourceVector, SyntheticProjection,
    Transaction, FEE_FLOOR,
};

const EMA_SMOOTHING: f64 = 0.3;

/// The pricing regime a chain runs under.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism {
    /// Single gas price over weighted resources.
    OneDim { gas: GasConfig, bounds: ResourceBounds },
    /// One price per resource.
    MultiDim { bounds: ResourceBounds },
    /// Prices on `k` synthetic gas-like dimensions projected from the real
    /// resources.
    Synthetic { projection: SyntheticProjection, bounds: ResourceBounds },
    /// One-dimensional pricing whose weights drift slowly toward balanced
    /// resource utilization, re-validated against the safety bound each epoch.
    Adaptive {
        gas: GasConfig,
        bounds: ResourceBounds,
        eta: f64,
        clip: f64,
        epoch_blocks: u32,
    },
}

impl Mechanism {
    pub fn resource_dims(&self) -> usize {
        self.bounds().dims()
    }

    pub fn fee_dims(&self) -> usize {
        match self {
            Self::OneDim { .. } | Self::Adaptive { .. } => 1,
            Self::MultiDim { bounds } => bounds.dims(),
            Self::Synthetic { projection, .. } => projection.synthetic_dims(),
        }
    }

    pub fn bounds(&self) -> &ResourceBounds {
        match self {
            Self::OneDim { bounds, .. }
            | Self::MultiDim { bounds }
            | Self::Synthetic { bounds, .. }
            | Self::Adaptive { bounds, .. } => bounds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::OneDim { gas, bounds } | Self::Adaptive { gas, bounds, .. } => {
                if gas.dims() != bounds.dims() {
                    return Err(Error::DimensionMismatch {
                        expected: bounds.dims(),
                        got: gas.dims(),
                    });
                }
                if !check_safety_gas_cap(gas, bounds) {
                    let i = gas
                        .weights()
                        .iter()
                        .zip(bounds.caps())
                        .position(|(w, g)| gas.gas_cap() > w * g)
                        .unwrap_or(0);
                    return Err(Error::Precondition(format!(
                        "gas cap {} exceeds weight {} times cap {} for resource {i}",
                        gas.gas_cap(),
                        gas.weights()[i],
                        bounds.caps()[i]
                    )));
                }
                if let Self::Adaptive { eta, clip, epoch_blocks, .. } = self {
                    if !(*eta > 0.0 && *eta <= 0.1) {
                        return Err(Error::InvalidParameter(format!(
                            "eta must be in (0, 0.1], got {eta}"
                        )));
                    }
                    if *clip < 1.0 {
                        return Err(Error::InvalidParameter(format!(
                            "clip must be at least 1, got {clip}"
                        )));
                    }
                    if *epoch_blocks == 0 {
                        return Err(Error::InvalidParameter("epoch must be positive".into()));
                    }
                }
                Ok(())
            }
            Self::MultiDim { .. } => Ok(()),
            Self::Synthetic { projection, bounds } => {
                if projection.real_dims() != bounds.dims() {
                    return Err(Error::DimensionMismatch {
                        expected: bounds.dims(),
                        got: projection.real_dims(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Price seen per unit of each real resource under the given fees. Demand
    /// and eligibility both act through these.
    pub fn effective_resource_prices(&self, fees: &BaseFeeState) -> Result<Vec<f64>> {
        if fees.len() != self.fee_dims() {
            return Err(Error::DimensionMismatch { expected: self.fee_dims(), got: fees.len() });
        }
        Ok(match self {
            Self::OneDim { gas, .. } | Self::Adaptive { gas, .. } => {
                gas.weights().iter().map(|w| w * fees.get(0)).collect()
            }
            Self::MultiDim { .. } => fees.fees().to_vec(),
            Self::Synthetic { projection, .. } => {
                let m = projection.real_dims();
                (0..m)
                    .map(|i| {
                        projection
                            .matrix()
                            .iter()
                            .zip(fees.fees())
                            .map(|(row, r)| row[i] * r)
                            .sum()
                    })
                    .collect()
            }
        })
    }
}

fn build_block_synthetic(
    mempool: &[Transaction],
    fees: &BaseFeeState,
    projection: &SyntheticProjection,
    choice: SolverChoice,
) -> Result<Block> {
    let mut eligible: Vec<(&Transaction, f64, ResourceVector)> = Vec::new();
    for tx in mempool {
        let projected = projection.project(&tx.consumption)?;
        let cost = projected.dot(fees.fees())?;
        let tip = tx.bid - cost;
        if tip >= 0.0 {
            eligible.push((tx, tip, projected));
        }
    }
    eligible.sort_by_key(|(tx, _, _)| tx.id);

    let items = eligible
        .iter()
        .map(|(_, tip, projected)| KnapsackItem { value: *tip, consumption: projected.clone() })
        .collect();
    let inst = KnapsackInstance::new(projection.caps().to_vec(), items)?;
    let sol = solve(&inst, choice)?;

    let mut block = Block::empty(projection.real_dims());
    for &j in &sol.chosen {
        let (tx, tip, projected) = &eligible[j];
        block.tx_ids.push(tx.id);
        block.consumption_total.add_assign(&tx.consumption)?;
        block.tip_total += tip;
        block.burn_total += projected.dot(fees.fees())?;
        block.value_total += tx.value;
    }
    Ok(block)
}

/// A running chain: current fees, the mechanism (mutable only for adaptive
/// weights), and the accumulated trace.
pub struct Chain {
    mechanism: Mechanism,
    fees: BaseFeeState,
    solver: SolverChoice,
    trace: ChainTrace,
    next_block: u32,
    epoch_consumption: Vec<f64>,
    epoch_blocks_done: u32,
    utilization_ema: Vec<f64>,
}

impl Chain {
    pub fn new(mechanism: Mechanism, fees: BaseFeeState, solver: SolverChoice) -> Result<Self> {
        mechanism.validate()?;
        if fees.len() != mechanism.fee_dims() {
            return Err(Error::DimensionMismatch {
                expected: mechanism.fee_dims(),
                got: fees.len(),
            });
        }
        let m = mechanism.resource_dims();
        let trace = ChainTrace::new(mechanism.fee_dims(), m);
        Ok(Self {
            mechanism,
            fees,
            solver,
            trace,
            next_block: 0,
            epoch_consumption: vec![0.0; m],
            epoch_blocks_done: 0,
            utilization_ema: vec![1.0; m],
        })
    }

    pub fn fees(&self) -> &BaseFeeState {
        &self.fees
    }

    pub fn mechanism(&self) -> &Mechanism {
        &self.mechanism
    }

    pub fn trace(&self) -> &ChainTrace {
        &self.trace
    }

    pub fn into_trace(self) -> ChainTrace {
        self.trace
    }

    /// Builds the next block from the mempool, records it, and advances the
    /// fees by one update step.
    pub fn step(&mut self, mempool: &[Transaction]) -> Result<Block> {
        let block = match &self.mechanism {
            Mechanism::OneDim { gas, .. } | Mechanism::Adaptive { gas, .. } => {
                build_block_1d(mempool, &self.fees, gas, self.solver)?
            }
            Mechanism::MultiDim { bounds } => {
                build_block_md(mempool, &self.fees, bounds, self.solver)?
            }
            Mechanism::Synthetic { projection, .. } => {
                build_block_synthetic(mempool, &self.fees, projection, self.solver)?
            }
        };
        debug_assert!(
            block.consumption_total.fits_within(self.mechanism.bounds().caps()),
            "safety bound violated by built block"
        );

        let next_fees = match &self.mechanism {
            Mechanism::OneDim { gas, .. } | Mechanism::Adaptive { gas, .. } => {
                BaseFeeState::single(update_base_fee_1d(
                    self.fees.get(0),
                    block.gas_total.min(gas.gas_cap()),
                    gas.gas_target(),
                )?)?
            }
            Mechanism::MultiDim { bounds } => {
                update_base_fee_md(&self.fees, &block.consumption_total, bounds)?
            }
            Mechanism::Synthetic { projection, .. } => {
                let projected = projection.project(&block.consumption_total)?;
                let mut next = Vec::with_capacity(projection.synthetic_dims());
                for s in 0..projection.synthetic_dims() {
                    next.push(update_base_fee_1d(
                        self.fees.get(s),
                        projected.get(s).min(projection.caps()[s]),
                        projection.targets()[s],
                    )?);
                }
                BaseFeeState::new(next)?
            }
        };

        self.trace.records.push(BlockRecord {
            block: self.next_block,
            fees: self.fees.fees().to_vec(),
            consumption: block.consumption_total.entries().to_vec(),
            gas: block.gas_total,
            welfare: block.value_total,
            tips: block.tip_total,
            burn: block.burn_total,
            mempool: mempool.len(),
        });
        self.next_block += 1;
        self.fees = next_fees;
        self.advance_epoch(&block)?;
        Ok(block)
    }

    fn advance_epoch(&mut self, block: &Block) -> Result<()> {
        let Mechanism::Adaptive { gas, bounds, eta, clip, epoch_blocks } = &self.mechanism else {
            return Ok(());
        };
        for (acc, c) in self.epoch_consumption.iter_mut().zip(block.consumption_total.entries()) {
            *acc += c;
        }
        self.epoch_blocks_done += 1;
        if self.epoch_blocks_done < *epoch_blocks {
            return Ok(());
        }
        let blocks = self.epoch_blocks_done as f64;
        for (ema, (acc, target)) in self
            .utilization_ema
            .iter_mut()
            .zip(self.epoch_consumption.iter().zip(bounds.targets()))
        {
            let utilization = acc / (target * blocks);
            *ema = EMA_SMOOTHING * utilization + (1.0 - EMA_SMOOTHING) * *ema;
        }
        let next_gas = update_weights_adaptive(gas, bounds, &self.utilization_ema, *eta, *clip)?;
        self.mechanism = Mechanism::Adaptive {
            gas: next_gas,
            bounds: bounds.clone(),
            eta: *eta,
            clip: *clip,
            epoch_blocks: *epoch_blocks,
        };
        self.epoch_consumption.fill(0.0);
        self.epoch_blocks_done = 0;
        Ok(())
    }
}

/// Stable prices of a mechanism under a demand model: the fee state the
/// update rule maps to itself, where consumption meets every target.
///
/// Multi-dimensional prices come in closed form from the demand curves. The
/// one-dimensional gas price solves aggregate weighted demand equal to the
/// gas target by bisection. Synthetic prices are solved coordinate-wise by
/// repeated bisection sweeps until the sweep converges.
pub fn find_stable_prices(model: &DemandModel, mechanism: &Mechanism) -> Result<BaseFeeState> {
    model.validate()?;
    mechanism.validate()?;
    if model.dims() != mechanism.resource_dims() {
        return Err(Error::DimensionMismatch {
            expected: mechanism.resource_dims(),
            got: model.dims(),
        });
    }
    match mechanism {
        Mechanism::MultiDim { bounds } => {
            let fees = model
                .resources
                .iter()
                .zip(bounds.targets())
                .map(|(r, t)| (r.amplitude / t).powf(1.0 / r.elasticity).max(FEE_FLOOR))
                .collect();
            BaseFeeState::new(fees)
        }
        Mechanism::OneDim { gas, .. } | Mechanism::Adaptive { gas, .. } => {
            let aggregate = |r: f64| -> f64 {
                gas.weights()
                    .iter()
                    .zip(&model.resources)
                    .map(|(w, d)| w * d.demand_at(w * r))
                    .sum()
            };
            let r = demand::bisect_decreasing(aggregate, gas.gas_target())?;
            BaseFeeState::single(r.max(FEE_FLOOR))
        }
        Mechanism::Synthetic { projection, .. } => {
            let k = projection.synthetic_dims();
            let mut fees = vec![1.0f64; k];
            for _ in 0..1000 {
                let mut largest_change = 0.0f64;
                for s in 0..k {
                    let others = fees.clone();
                    let demand_s = |r_s: f64| -> f64 {
                        let mut f = others.clone();
                        f[s] = r_s;
                        synthetic_demand(model, projection, &f, s)
                    };
                    let next = demand::bisect_decreasing(demand_s, projection.targets()[s])
                        .map(|r| r.max(FEE_FLOOR))?;
                    largest_change = largest_change.max((next - fees[s]).abs() / fees[s]);
                    fees[s] = next;
                }
                if largest_change < 1e-12 {
                    return BaseFeeState::new(fees);
                }
            }
            Err(Error::NoConvergence)
        }
    }
}

fn synthetic_demand(
    model: &DemandModel,
    projection: &SyntheticProjection,
    fees: &[f64],
    s: usize,
) -> f64 {
    let m = projection.real_dims();
    (0..m)
        .map(|i| {
            let price: f64 =
                projection.matrix().iter().zip(fees).map(|(row, r)| row[i] * r).sum();
            projection.matrix()[s][i] * model.resources[i].demand_at(price)
        })
        .sum()
}

/// One noiseless step from the given fees; true when every fee moves by at
/// most `tol` relatively, the fixed-point check for stable prices.
pub fn verify_stable(
    model: &DemandModel,
    mechanism: &Mechanism,
    fees: &BaseFeeState,
    tol: f64,
) -> Result<bool> {
    let mut noiseless = model.clone();
    noiseless.noise_sigma = 0.0;
    let mut chain = Chain::new(mechanism.clone(), fees.clone(), SolverChoice::Greedy)?;
    let prices = mechanism.effective_resource_prices(fees)?;
    let mut rng = ChaCha12Rng::seed_from_u64(0);
    let mut next_id = 0;
    let pool = generate_mempool(&noiseless, &prices, &mut next_id, &mut rng)?;
    chain.step(&pool)?;
    Ok(fees
        .fees()
        .iter()
        .zip(chain.fees().fees())
        .all(|(before, after)| (after - before).abs() <= tol * before))
}

/// A full shock experiment setup: which mechanism, the demand before and
/// after the shock, and how stability is detected.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub mechanism: Mechanism,
    pub demand_before: DemandModel,
    pub demand_after: DemandModel,
    pub shock_block: u32,
    pub horizon: u32,
    pub stability_tol: f64,
    pub stability_window: u32,
    pub seed: u64,
    pub solver: SolverChoice,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.mechanism.validate()?;
        self.demand_before.validate()?;
        self.demand_after.validate()?;
        let m = self.mechanism.resource_dims();
        if self.demand_before.dims() != m || self.demand_after.dims() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.demand_before.dims() });
        }
        if self.stability_window == 0 {
            return Err(Error::InvalidParameter("stability window must be positive".into()));
        }
        if self.shock_block < self.stability_window {
            return Err(Error::InvalidParameter(
                "shock block must be at least the stability window".into(),
            ));
        }
        if self.horizon <= self.shock_block {
            return Err(Error::InvalidParameter("horizon must exceed the shock block".into()));
        }
        if !(self.stability_tol > 0.0) {
            return Err(Error::InvalidParameter("stability tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Runs one seeded scenario: starts at the pre-shock stable prices, switches
/// the demand model at the shock block, and returns the full trace.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ChainTrace> {
    cfg.validate()?;
    let initial = find_stable_prices(&cfg.demand_before, &cfg.mechanism)?;
    let mut chain = Chain::new(cfg.mechanism.clone(), initial, cfg.solver)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut next_id = 0u64;
    for t in 0..cfg.horizon {
        let model = if t < cfg.shock_block { &cfg.demand_before } else { &cfg.demand_after };
        let prices = chain.mechanism().effective_resource_prices(chain.fees())?;
        let pool = generate_mempool(model, &prices, &mut next_id, &mut rng)?;
        chain.step(&pool)?;
    }
    Ok(chain.into_trace())
}

/// Per-price stabilization times measured on a trace; `None` marks a price
/// that never stabilized within the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationTimes {
    pub per_price: Vec<Option<u64>>,
    /// Blocks until every price is stable, the maximum of the coordinates.
    pub overall: Option<u64>,
}

/// For each price coordinate, the smallest `k` such that the relative fee
/// change per block stays within `tol` for `window` consecutive blocks
/// starting at `shock_block + k`.
pub fn measure_stabilization(
    trace: &ChainTrace,
    shock_block: u32,
    tol: f64,
    window: u32,
) -> StabilizationTimes {
    let fee_dims = trace.fee_dims;
    let records = &trace.records;
    let shock = shock_block as usize;
    let window = window as usize;
    let mut per_price = Vec::with_capacity(fee_dims);
    for i in 0..fee_dims {
        let quiet: Vec<bool> = records
            .windows(2)
            .map(|w| {
                let before = w[0].fees[i];
                let after = w[1].fees[i];
                (after - before).abs() <= tol * before
            })
            .collect();
        let mut found = None;
        if quiet.len() >= shock + window {
            for k in 0..=(quiet.len() - shock - window) {
                if quiet[shock + k..shock + k + window].iter().all(|&q| q) {
                    found = Some(k as u64);
                    break;
                }
            }
        }
        per_price.push(found);
    }
    let overall = per_price.iter().copied().collect::<Option<Vec<u64>>>().map(|zs| {
        zs.into_iter().max().unwrap_or(0)
    });
    StabilizationTimes { per_price, overall }
}

/// Stabilization samples over independent seeded runs. Unstabilized runs are
/// excluded from the samples and reported in `unstabilized`; censoring them
/// at the horizon would silently bias the means downward.
#[derive(Debug, Clone, Serialize)]
pub struct ShockSamples {
    pub fee_dims: usize,
    pub runs: u32,
    pub unstabilized: u32,
    /// Max-over-coordinates stabilization time per stabilized run.
    pub overall: Vec<u64>,
    /// Per-coordinate stabilization times, aligned with `overall`.
    pub per_price: Vec<Vec<u64>>,
    pub mean_overall: f64,
    pub ci_overall: (f64, f64),
}

impl ShockSamples {
    pub fn overall_f64(&self) -> Vec<f64> {
        self.overall.iter().map(|&z| z as f64).collect()
    }
}

/// Runs `n_runs` independent seeded scenarios and collects stabilization
/// samples with a bootstrap confidence interval on the mean.
pub fn shock_experiment(cfg: &ScenarioConfig, n_runs: u32) -> Result<ShockSamples> {
    if n_runs < 1 {
        return Err(Error::InvalidParameter("at least one run required".into()));
    }
    cfg.validate()?;
    let times: Vec<StabilizationTimes> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let mut run_cfg = cfg.clone();
            run_cfg.seed = per_run_seed(cfg.seed, i);
            let trace = run_scenario(&run_cfg)?;
            Ok(measure_stabilization(
                &trace,
                cfg.shock_block,
                cfg.stability_tol,
                cfg.stability_window,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let fee_dims = cfg.mechanism.fee_dims();
    let mut overall = Vec::new();
    let mut per_price = vec![Vec::new(); fee_dims];
    let mut unstabilized = 0;
    for t in &times {
        match t.overall {
            Some(z) => {
                overall.push(z);
                for (col, z_i) in per_price.iter_mut().zip(&t.per_price) {
                    col.push(z_i.expect("coordinate stabilized when overall did"));
                }
            }
            None => unstabilized += 1,
        }
    }
    if overall.is_empty() {
        return Err(Error::Precondition("every run failed to stabilize".into()));
    }
    let overall_f64: Vec<f64> = overall.iter().map(|&z| z as f64).collect();
    let mean_overall = stats::mean(&overall_f64);
    let ci_overall = stats::bootstrap_mean_ci(&overall_f64, 2000, cfg.seed ^ 0xb00f);
    Ok(ShockSamples {
        fee_dims,
        runs: n_runs,
        unstabilized,
        overall,
        per_price,
        mean_overall,
        ci_overall,
    })
}

fn per_run_seed(master: u64, run: u32) -> u64 {
    master ^ (run as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Parameters shared by the one-dimensional baseline and the symmetric
/// multi-dimensional scenarios of a shock comparison. Every resource gets the
/// same demand curve, target, and noise, so each coordinate's stabilization
/// time has the same law as the baseline's.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetricShockParams {
    pub amplitude: f64,
    pub elasticity: f64,
    pub noise_sigma: f64,
    /// Post-shock amplitudes are the pre-shock ones times this factor.
    pub shock_factor: f64,
    /// Per-resource target; the cap is twice this.
    pub target: f64,
    pub tx_size_mean: f64,
    pub tx_size_jitter: f64,
    pub margin_lo: f64,
    pub margin_hi: f64,
    pub shock_block: u32,
    pub horizon: u32,
    pub stability_tol: f64,
    pub stability_window: u32,
}

impl SymmetricShockParams {
    fn demand(&self, m: usize) -> DemandModel {
        DemandModel {
            resources: vec![
                ResourceDemand { amplitude: self.amplitude, elasticity: self.elasticity };
                m
            ],
            noise_sigma: self.noise_sigma,
            tx_size_mean: self.tx_size_mean,
            tx_size_jitter: self.tx_size_jitter,
            margin_lo: self.margin_lo,
            margin_hi: self.margin_hi,
        }
    }

    /// The scenario for `m` symmetric resources: the gas mechanism over a
    /// single resource for `m = 1`, independent per-resource pricing above.
    pub fn scenario(&self, m: usize, seed: u64) -> Result<ScenarioConfig> {
        let bounds = ResourceBounds::from_caps(vec![2.0 * self.target; m])?;
        let mechanism = if m == 1 {
            let gas = GasConfig::with_max_safe_cap(vec![1.0], &bounds)?;
            Mechanism::OneDim { gas, bounds }
        } else {
            Mechanism::MultiDim { bounds }
        };
        let cfg = ScenarioConfig {
            mechanism,
            demand_before: self.demand(m),
            demand_after: self.demand(m).scaled_amplitudes(self.shock_factor),
            shock_block: self.shock_block,
            horizon: self.horizon,
            stability_tol: self.stability_tol,
            stability_window: self.stability_window,
            seed,
            solver: SolverChoice::Greedy,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Inputs for one stable-state welfare comparison.
#[derive(Debug, Clone)]
pub struct WelfareConfig {
    pub gas: GasConfig,
    pub bounds: ResourceBounds,
    pub demand: DemandModel,
    /// Fraction of the gas target filled by transactions eligible under both
    /// mechanisms, in (0, 1).
    pub shared_gas_fill: f64,
    /// Both-ineligible transactions added for realism.
    pub chaff: usize,
}

/// Outcome of one welfare comparison run.
#[derive(Debug, Clone, Serialize)]
pub struct WelfareOutcome {
    pub welfare_one: f64,
    pub welfare_multi: f64,
    pub block_one: Block,
    pub block_multi: Block,
    /// The multi-dimensional block strictly contains the one-dimensional one.
    pub strict_extension: bool,
    /// Preconditions held: both mechanisms stable on this mempool and the
    /// eligible consumption covers every target.
    pub sustainable: bool,
    pub stable_fee_one: f64,
    pub stable_fees_multi: Vec<f64>,
    pub flags: Vec<String>,
}

/// Builds both mechanisms' blocks from one shared mempool at the given stable
/// prices and verifies the stable-state preconditions post hoc.
pub fn welfare_from_mempool(
    pool: &[Transaction],
    gas: &GasConfig,
    bounds: &ResourceBounds,
    fee_one: &BaseFeeState,
    fees_multi: &BaseFeeState,
) -> Result<WelfareOutcome> {
    let block_one = build_block_1d(pool, fee_one, gas, SolverChoice::Exact)?;
    let block_multi = build_block_md(pool, fees_multi, bounds, SolverChoice::Exact)?;

    let mut flags = Vec::new();
    let gas_dev = (block_one.gas_total - gas.gas_target()).abs();
    if gas_dev > 1e-6 * gas.gas_target() {
        flags.push(format!(
            "one-dimensional consumption {} off the gas target {}",
            block_one.gas_total,
            gas.gas_target()
        ));
    }
    for (i, (c, t)) in
        block_multi.consumption_total.entries().iter().zip(bounds.targets()).enumerate()
    {
        if (c - t).abs() > 1e-6 * t {
            flags.push(format!("resource {i} consumption {c} off its target {t}"));
        }
    }
    let one_ids: std::collections::BTreeSet<u64> = block_one.tx_ids.iter().copied().collect();
    let multi_ids: std::collections::BTreeSet<u64> = block_multi.tx_ids.iter().copied().collect();
    if !one_ids.is_subset(&multi_ids) {
        flags.push("one-dimensional block is not contained in the multi-dimensional block".into());
    }
    let strict_extension = one_ids.is_subset(&multi_ids) && multi_ids.len() > one_ids.len();

    Ok(WelfareOutcome {
        welfare_one: block_one.value_total,
        welfare_multi: block_multi.value_total,
        strict_extension,
        sustainable: flags.is_empty(),
        stable_fee_one: fee_one.get(0),
        stable_fees_multi: fees_multi.fees().to_vec(),
        flags,
        block_one,
        block_multi,
    })
}

/// Runs one seeded stable-state welfare comparison.
///
/// Both mechanisms sit at their stable prices and see an identical mempool
/// with truthful bids, constructed so that the transactions eligible under
/// the gas mechanism consume exactly the gas target and the transactions
/// eligible under per-resource pricing consume exactly every resource target.
/// Under the demand family here the one-dimensional stable price weakly
/// overprices every resource, so the one-dimensional block is contained in
/// the multi-dimensional one and the welfare gap is carried by the
/// transactions only the multi-dimensional mechanism can afford to admit.
pub fn welfare_experiment(cfg: &WelfareConfig, seed: u64) -> Result<WelfareOutcome> {
    cfg.demand.validate()?;
    let m = cfg.bounds.dims();
    if cfg.gas.dims() != m || cfg.demand.dims() != m {
        return Err(Error::DimensionMismatch { expected: m, got: cfg.gas.dims() });
    }
    if !check_safety_gas_cap(&cfg.gas, &cfg.bounds) {
        return Err(Error::Precondition("gas cap violates the safety bound".into()));
    }
    if !(cfg.shared_gas_fill > 0.0 && cfg.shared_gas_fill < 1.0) {
        return Err(Error::InvalidParameter("shared gas fill must be in (0, 1)".into()));
    }

    let one_dim =
        Mechanism::OneDim { gas: cfg.gas.clone(), bounds: cfg.bounds.clone() };
    let multi = Mechanism::MultiDim { bounds: cfg.bounds.clone() };
    let fee_one = find_stable_prices(&cfg.demand, &one_dim)?;
    let fees_multi = find_stable_prices(&cfg.demand, &multi)?;
    let r_gas = fee_one.get(0);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut next_id = 0u64;
    let mut pool: Vec<Transaction> = Vec::new();
    let weights = cfg.gas.weights();
    let targets = cfg.bounds.targets();

    // Transactions eligible under both mechanisms, mixing all resources, with
    // total gas exactly `shared_gas_fill` of the gas target.
    let mut shared_totals = vec![0.0; m];
    {
        let mut remaining_gas = cfg.shared_gas_fill * cfg.gas.gas_target();
        let mean_gas = cfg.demand.tx_size_mean;
        while remaining_gas > 1e-12 * cfg.gas.gas_target() {
            let mut direction: Vec<f64> = targets
                .iter()
                .map(|t| t * rand::Rng::gen_range(&mut rng, 0.5..=1.5))
                .collect();
            let dir_gas: f64 = direction.iter().zip(weights).map(|(d, w)| d * w).sum();
            for d in &mut direction {
                *d /= dir_gas;
            }
            let gas_size = (mean_gas
                * rand::Rng::gen_range(
                    &mut rng,
                    1.0 - cfg.demand.tx_size_jitter..=1.0 + cfg.demand.tx_size_jitter,
                ))
            .min(remaining_gas);
            let consumption: Vec<f64> = direction.iter().map(|d| d * gas_size).collect();
            let cost_gas = r_gas * gas_size;
            let margin = rand::Rng::gen_range(&mut rng, 1.05..=2.0);
            let tx = Transaction::truthful(
                next_id,
                margin * cost_gas,
                ResourceVector::new(consumption.clone())?,
            )?;
            next_id += 1;
            for (s, c) in shared_totals.iter_mut().zip(&consumption) {
                *s += c;
            }
            remaining_gas -= gas_size;
            pool.push(tx);
        }
    }

    // Per-resource filler up to each target. Where the one-dimensional price
    // strictly overprices the resource, values are placed between the two
    // base costs, eligible only under per-resource pricing. Where the prices
    // coincide (the single-resource degenerate case) the filler is eligible
    // under both, which keeps both mechanisms stable.
    for i in 0..m {
        let price_md = fees_multi.get(i);
        let price_gas = r_gas * weights[i];
        let theta = price_gas / price_md;
        let mut remaining = targets[i] - shared_totals[i];
        if remaining < 0.0 {
            return Err(Error::Precondition(format!(
                "shared fill exceeded the target of resource {i}"
            )));
        }
        let mean_size = cfg.demand.tx_size_mean / weights[i];
        while remaining > 1e-12 * targets[i] {
            let size = (mean_size
                * rand::Rng::gen_range(
                    &mut rng,
                    1.0 - cfg.demand.tx_size_jitter..=1.0 + cfg.demand.tx_size_jitter,
                ))
            .min(remaining);
            let cost_md = price_md * size;
            let value = if theta > 1.0 + 1e-9 {
                let margin = rand::Rng::gen_range(&mut rng, 0.05..=0.9);
                cost_md * (1.0 + margin * (theta - 1.0))
            } else {
                cost_md * rand::Rng::gen_range(&mut rng, 1.05..=2.0)
            };
            let tx = Transaction::truthful(next_id, value, ResourceVector::single(m, i, size)?)?;
            next_id += 1;
            remaining -= size;
            pool.push(tx);
        }
    }

    // Both-ineligible chaff.
    for _ in 0..cfg.chaff {
        let i = rand::Rng::gen_range(&mut rng, 0..m);
        let size = cfg.demand.tx_size_mean / weights[i];
        let cost_md = fees_multi.get(i) * size;
        let value = cost_md * rand::Rng::gen_range(&mut rng, 0.3..=0.95);
        let tx = Transaction::truthful(next_id, value, ResourceVector::single(m, i, size)?)?;
        next_id += 1;
        pool.push(tx);
    }

    welfare_from_mempool(&pool, &cfg.gas, &cfg.bounds, &fee_one, &fees_multi)
}
