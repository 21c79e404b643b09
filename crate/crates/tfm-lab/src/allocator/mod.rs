//! Knapsack solvers backing the allocation rules: exact and approximate
//! maximization of total tips subject to a gas cap (one dimension) or
//! per-resource caps (m dimensions).
//!
//! Every deterministic solver breaks ties between equal-value feasible
//! subsets the same way: higher total value first, then fewer items, then the
//! lexicographically smallest sorted index sequence. This makes chosen sets,
//! not just values, comparable across solvers, and means zero-value items are
//! never chosen. Set-level reproducibility across solvers assumes value sums
//! are exact in floating point, which holds for integer-grid values.

mod branch_bound;
mod bruteforce;
mod dp;
mod fptas;
mod greedy;

pub use branch_bound::{solve_mdk_exact, solve_mdk_exact_with, BranchBoundConfig};
pub use bruteforce::solve_bruteforce;
pub use dp::solve_1d_dp;
pub use fptas::solve_1d_fptas;
pub use greedy::solve_greedy_density;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{
    gas_of, tip_1d, tip_md, BaseFeeState, Block, GasConfig, ResourceBounds, ResourceVector,
    Transaction,
};

/// A knapsack item: a value and an m-dimensional consumption vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackItem {
    pub value: f64,
    pub consumption: ResourceVector,
}

/// A multidimensional 0/1 knapsack instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnapsackInstance {
    pub dims: usize,
    pub capacities: Vec<f64>,
    pub items: Vec<KnapsackItem>,
}

impl KnapsackInstance {
    pub fn new(capacities: Vec<f64>, items: Vec<KnapsackItem>) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::InvalidParameter("at least one capacity required".into()));
        }
        for (i, &c) in capacities.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "capacity {i} must be finite and nonnegative, got {c}"
                )));
            }
        }
        let dims = capacities.len();
        for (j, item) in items.iter().enumerate() {
            if item.consumption.len() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    got: item.consumption.len(),
                });
            }
            if !item.value.is_finite() || item.value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "item {j} value must be finite and nonnegative, got {}",
                    item.value
                )));
            }
        }
        Ok(Self { dims, capacities, items })
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    /// Validates a deserialized instance.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.capacities.clone(), self.items.clone()).map(|_| ())
    }
}

/// How a solution was produced, and with what guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    /// True optimum.
    Exact,
    /// Total value at least `(1 - epsilon)` times the optimum.
    Fptas { epsilon: f64 },
    /// Density heuristic, no guarantee beyond feasibility.
    Greedy,
}

/// A certified solution: chosen item indices (ascending) and recomputed totals.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    pub chosen: Vec<usize>,
    pub total_value: f64,
    pub totals: ResourceVector,
    pub kind: SolutionKind,
    /// Search nodes visited (branch and bound only, zero otherwise).
    pub nodes: u64,
}

/// Which solver a caller wants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SolverChoice {
    BruteForce,
    Exact,
    Dp { unit: f64 },
    Fptas { epsilon: f64 },
    Greedy,
}

/// Dispatches to the chosen solver.
pub fn solve(inst: &KnapsackInstance, choice: SolverChoice) -> Result<KnapsackSolution> {
    match choice {
        SolverChoice::BruteForce => solve_bruteforce(inst),
        SolverChoice::Exact => solve_mdk_exact(inst),
        SolverChoice::Dp { unit } => solve_1d_dp(inst, unit),
        SolverChoice::Fptas { epsilon } => solve_1d_fptas(inst, epsilon),
        SolverChoice::Greedy => Ok(solve_greedy_density(inst)),
    }
}

/// Independent feasibility and bookkeeping check for a solution against its
/// instance: indices valid and ascending, totals recomputed and within the
/// capacities, total value equal to the recomputed sum.
pub fn verify_solution(inst: &KnapsackInstance, sol: &KnapsackSolution) -> bool {
    if sol.chosen.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    if sol.chosen.iter().any(|&j| j >= inst.n()) {
        return false;
    }
    let (value, totals) = match recompute(inst, &sol.chosen) {
        Ok(v) => v,
        Err(_) => return false,
    };
    value == sol.total_value
        && totals == sol.totals
        && totals.fits_within(&inst.capacities)
}

/// Recomputes value and consumption totals of a chosen index set in ascending
/// index order. All solvers funnel their final answer through this so cached
/// totals are bitwise reproducible.
pub(crate) fn recompute(
    inst: &KnapsackInstance,
    chosen: &[usize],
) -> Result<(f64, ResourceVector)> {
    let mut value = 0.0;
    let mut totals = ResourceVector::zeros(inst.dims);
    for &j in chosen {
        value += inst.items[j].value;
        totals.add_assign(&inst.items[j].consumption)?;
    }
    Ok((value, totals))
}

/// Builds a finished solution from a chosen set, recomputing totals in index
/// order. If reordered summation pushed a total over a capacity by rounding,
/// highest-index items are dropped until the recomputed totals fit.
pub(crate) fn finalize(
    inst: &KnapsackInstance,
    mut chosen: Vec<usize>,
    kind: SolutionKind,
    nodes: u64,
) -> Result<KnapsackSolution> {
    chosen.sort_unstable();
    let (mut value, mut totals) = recompute(inst, &chosen)?;
    while !totals.fits_within(&inst.capacities) && !chosen.is_empty() {
        chosen.pop();
        let r = recompute(inst, &chosen)?;
        value = r.0;
        totals = r.1;
    }
    Ok(KnapsackSolution { chosen, total_value: value, totals, kind, nodes })
}

/// The canonical preference between two candidate subsets: higher value, then
/// fewer items, then lexicographically smaller sorted index sequence. Both
/// slices must be sorted ascending.
pub(crate) fn prefer(a_value: f64, a_set: &[usize], b_value: f64, b_set: &[usize]) -> bool {
    if a_value != b_value {
        return a_value > b_value;
    }
    if a_set.len() != b_set.len() {
        return a_set.len() < b_set.len();
    }
    a_set < b_set
}

fn block_from_selection(
    mempool: &[Transaction],
    selected: &[&Transaction],
    dims: usize,
    tip_of: impl Fn(&Transaction) -> f64,
    base_cost_of: impl Fn(&Transaction) -> f64,
) -> Result<Block> {
    let _ = mempool;
    let mut block = Block::empty(dims);
    for tx in selected {
        block.tx_ids.push(tx.id);
        block.consumption_total.add_assign(&tx.consumption)?;
        block.tip_total += tip_of(tx);
        block.burn_total += base_cost_of(tx);
        block.value_total += tx.value;
    }
    Ok(block)
}

/// Builds a block under the gas mechanism: keeps transactions that can pay
/// the base fee, maximizes total tips subject to the gas cap with the chosen
/// solver, and returns a block whose totals are recomputed from its members.
/// Ties between equal-tip selections resolve toward lower transaction ids.
pub fn build_block_1d(
    mempool: &[Transaction],
    fee: &BaseFeeState,
    cfg: &GasConfig,
    choice: SolverChoice,
) -> Result<Block> {
    if fee.len() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: fee.len() });
    }
    let mut eligible: Vec<(&Transaction, f64, f64)> = Vec::new();
    for tx in mempool {
        let g = gas_of(tx, cfg)?;
        let tip = tip_1d(tx, fee, cfg)?;
        if tip >= 0.0 {
            eligible.push((tx, tip, g));
        }
    }
    eligible.sort_by_key(|(tx, _, _)| tx.id);

    let items = eligible
        .iter()
        .map(|(_, tip, g)| {
            Ok(KnapsackItem { value: *tip, consumption: ResourceVector::new(vec![*g])? })
        })
        .collect::<Result<Vec<_>>>()?;
    let inst = KnapsackInstance::new(vec![cfg.gas_cap()], items)?;
    let sol = solve(&inst, choice)?;

    let selected: Vec<&Transaction> = sol.chosen.iter().map(|&j| eligible[j].0).collect();
    let mut block = block_from_selection(
        mempool,
        &selected,
        cfg.dims(),
        |tx| tip_1d(tx, fee, cfg).expect("eligible tx"),
        |tx| fee.get(0) * gas_of(tx, cfg).expect("eligible tx"),
    )?;
    block.gas_total = selected
        .iter()
        .map(|tx| gas_of(tx, cfg).expect("eligible tx"))
        .sum();
    Ok(block)
}

/// Builds a block under the multi-dimensional mechanism; the analogue of
/// [`build_block_1d`] with per-resource capacities and priced consumption.
pub fn build_block_md(
    mempool: &[Transaction],
    fees: &BaseFeeState,
    bounds: &ResourceBounds,
    choice: SolverChoice,
) -> Result<Block> {
    if fees.len() != bounds.dims() {
        return Err(Error::DimensionMismatch { expected: bounds.dims(), got: fees.len() });
    }
    let mut eligible: Vec<(&Transaction, f64)> = Vec::new();
    for tx in mempool {
        if tx.consumption.len() != bounds.dims() {
            return Err(Error::DimensionMismatch {
                expected: bounds.dims(),
                got: tx.consumption.len(),
            });
        }
        let tip = tip_md(tx, fees)?;
        if tip >= 0.0 {
            eligible.push((tx, tip));
        }
    }
    eligible.sort_by_key(|(tx, _)| tx.id);

    let items = eligible
        .iter()
        .map(|(tx, tip)| KnapsackItem { value: *tip, consumption: tx.consumption.clone() })
        .collect();
    let inst = KnapsackInstance::new(bounds.caps().to_vec(), items)?;
    let sol = solve(&inst, choice)?;

    let selected: Vec<&Transaction> = sol.chosen.iter().map(|&j| eligible[j].0).collect();
    block_from_selection(
        mempool,
        &selected,
        bounds.dims(),
        |tx| tip_md(tx, fees).expect("eligible tx"),
        |tx| tx.consumption.dot(fees.fees()).expect("eligible tx"),
    )
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand::Rng;

    pub fn item(value: f64, consumption: Vec<f64>) -> KnapsackItem {
        KnapsackItem { value, consumption: ResourceVector::new(consumption).unwrap() }
    }

    /// Random instance on an integer value grid so subset sums are exact.
    pub fn random_instance(
        rng: &mut impl Rng,
        max_n: usize,
        max_dims: usize,
    ) -> KnapsackInstance {
        let n = rng.gen_range(1..=max_n);
        let dims = rng.gen_range(1..=max_dims);
        let capacities: Vec<f64> = (0..dims).map(|_| rng.gen_range(5..=30) as f64).collect();
        let items = (0..n)
            .map(|_| {
                let value = rng.gen_range(0..=100) as f64;
                let consumption: Vec<f64> =
                    (0..dims).map(|_| rng.gen_range(0..=15) as f64).collect();
                item(value, consumption)
            })
            .collect();
        KnapsackInstance::new(capacities, items).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use crate::mechanism::tip_1d;

    #[test]
    fn prefer_orders_value_then_cardinality_then_lex() {
        assert!(prefer(5.0, &[0], 4.0, &[]));
        assert!(prefer(4.0, &[1], 4.0, &[0, 2]));
        assert!(prefer(4.0, &[0, 2], 4.0, &[1, 2]));
        assert!(!prefer(4.0, &[0, 2], 4.0, &[0, 1]));
    }

    #[test]
    fn verify_rejects_bad_solutions() {
        let inst =
            KnapsackInstance::new(vec![2.0], vec![item(1.0, vec![1.0]), item(1.0, vec![2.0])])
                .unwrap();
        let good = finalize(&inst, vec![0], SolutionKind::Exact, 0).unwrap();
        assert!(verify_solution(&inst, &good));

        let mut wrong_value = good.clone();
        wrong_value.total_value = 2.0;
        assert!(!verify_solution(&inst, &wrong_value));

        let over = KnapsackSolution {
            chosen: vec![0, 1],
            total_value: 2.0,
            totals: ResourceVector::new(vec![3.0]).unwrap(),
            kind: SolutionKind::Exact,
            nodes: 0,
        };
        assert!(!verify_solution(&inst, &over));
    }

    fn tx(id: u64, bid: f64, consumption: Vec<f64>) -> Transaction {
        Transaction::new(id, bid, bid, ResourceVector::new(consumption).unwrap()).unwrap()
    }

    #[test]
    fn build_block_1d_empty_mempool() {
        let cfg = GasConfig::new(vec![1.0], 10.0).unwrap();
        let fee = BaseFeeState::single(1.0).unwrap();
        let block = build_block_1d(&[], &fee, &cfg, SolverChoice::Exact).unwrap();
        assert!(block.is_empty());
        assert_eq!(block.gas_total, 0.0);
    }

    #[test]
    fn build_block_1d_includes_single_eligible() {
        let cfg = GasConfig::new(vec![1.0], 10.0).unwrap();
        let fee = BaseFeeState::single(1.0).unwrap();
        let pool = vec![tx(7, 5.0, vec![3.0])];
        let block = build_block_1d(&pool, &fee, &cfg, SolverChoice::Exact).unwrap();
        assert_eq!(block.tx_ids, vec![7]);
        assert_eq!(block.gas_total, 3.0);
        assert_eq!(block.tip_total, 2.0);
        assert_eq!(block.burn_total, 3.0);
    }

    #[test]
    fn build_block_excludes_negative_tips() {
        let cfg = GasConfig::new(vec![1.0], 10.0).unwrap();
        let fee = BaseFeeState::single(2.0).unwrap();
        let pool = vec![tx(0, 1.0, vec![3.0]), tx(1, 20.0, vec![3.0])];
        let block = build_block_1d(&pool, &fee, &cfg, SolverChoice::Exact).unwrap();
        assert_eq!(block.tx_ids, vec![1]);

        let bounds = ResourceBounds::from_caps(vec![10.0]).unwrap();
        let fees = BaseFeeState::new(vec![2.0]).unwrap();
        let block = build_block_md(&pool, &fees, &bounds, SolverChoice::Exact).unwrap();
        assert_eq!(block.tx_ids, vec![1]);
    }

    #[test]
    fn build_block_1d_matches_bruteforce() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let cfg = GasConfig::new(vec![1.0], 12.0).unwrap();
        let fee = BaseFeeState::single(1.0).unwrap();
        for _ in 0..50 {
            let pool: Vec<Transaction> = (0..12)
                .map(|id| {
                    let g = rand::Rng::gen_range(&mut rng, 1..=8) as f64;
                    let bid = rand::Rng::gen_range(&mut rng, 0..=20) as f64;
                    tx(id, bid, vec![g])
                })
                .collect();
            let exact = build_block_1d(&pool, &fee, &cfg, SolverChoice::Exact).unwrap();
            let brute = build_block_1d(&pool, &fee, &cfg, SolverChoice::BruteForce).unwrap();
            assert_eq!(exact.tx_ids, brute.tx_ids);
            assert!(exact.tx_ids.iter().all(|&id| {
                tip_1d(&pool[id as usize], &fee, &cfg).unwrap() >= 0.0
            }));
        }
    }

    #[test]
    fn build_block_md_restricts_to_1d() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let cfg = GasConfig::new(vec![1.0], 9.0).unwrap();
        let bounds = ResourceBounds::from_caps(vec![9.0]).unwrap();
        let fee = BaseFeeState::single(1.5).unwrap();
        for _ in 0..30 {
            let pool: Vec<Transaction> = (0..10)
                .map(|id| {
                    let g = rand::Rng::gen_range(&mut rng, 1..=6) as f64;
                    let bid = rand::Rng::gen_range(&mut rng, 0..=15) as f64;
                    tx(id, bid, vec![g])
                })
                .collect();
            let one = build_block_1d(&pool, &fee, &cfg, SolverChoice::Exact).unwrap();
            let md = build_block_md(&pool, &fee, &bounds, SolverChoice::Exact).unwrap();
            assert_eq!(one.tx_ids, md.tx_ids);
        }
    }

    #[test]
    fn build_block_md_matches_bruteforce() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        let bounds = ResourceBounds::from_caps(vec![8.0, 6.0, 10.0]).unwrap();
        let fees = BaseFeeState::new(vec![1.0, 2.0, 0.5]).unwrap();
        for _ in 0..30 {
            let pool: Vec<Transaction> = (0..12)
                .map(|id| {
                    let c: Vec<f64> =
                        (0..3).map(|_| rand::Rng::gen_range(&mut rng, 0..=5) as f64).collect();
                    let bid = rand::Rng::gen_range(&mut rng, 0..=25) as f64;
                    tx(id, bid, c)
                })
                .collect();
            let exact = build_block_md(&pool, &fees, &bounds, SolverChoice::Exact).unwrap();
            let brute = build_block_md(&pool, &fees, &bounds, SolverChoice::BruteForce).unwrap();
            assert_eq!(exact.tx_ids, brute.tx_ids);
        }
    }
}
