//! Depth-first branch and bound for the multidimensional knapsack.
//!
//! Branching follows index order with the include branch first. A subtree is
//! pruned only when its upper bound is strictly below the incumbent value, so
//! every optimal-value leaf is still visited and the canonical tie-breaking
//! matches exhaustive enumeration exactly.

use super::{finalize, prefer, KnapsackInstance, KnapsackSolution, SolutionKind};
use crate::error::{Error, Result};
use crate::mechanism::ResourceVector;

/// Search limits for [`solve_mdk_exact_with`].
#[derive(Debug, Clone, Copy)]
pub struct BranchBoundConfig {
    /// Abort with an explicit error after this many visited nodes. The
    /// problem is exponentially hard in general, so a safety valve is
    /// mandatory; a truncated search is never reported as exact.
    pub node_budget: u64,
}

impl Default for BranchBoundConfig {
    fn default() -> Self {
        Self { node_budget: 10_000_000 }
    }
}

struct Search<'a> {
    inst: &'a KnapsackInstance,
    // Per dimension, usable item indices sorted by value density, zero
    // consumption first. Individually infeasible items are excluded, they can
    // never appear in a feasible subset.
    density_order: Vec<Vec<usize>>,
    usable: Vec<bool>,
    budget: u64,
    nodes: u64,
    best: Vec<usize>,
    best_value: f64,
}

impl<'a> Search<'a> {
    fn new(inst: &'a KnapsackInstance, budget: u64) -> Self {
        let usable: Vec<bool> = inst
            .items
            .iter()
            .map(|it| it.consumption.fits_within(&inst.capacities))
            .collect();
        let mut density_order = Vec::with_capacity(inst.dims);
        for d in 0..inst.dims {
            let mut order: Vec<usize> = (0..inst.n()).filter(|&j| usable[j]).collect();
            order.sort_by(|&a, &b| {
                let da = density(inst, a, d);
                let db = density(inst, b, d);
                db.partial_cmp(&da).unwrap().then(a.cmp(&b))
            });
            density_order.push(order);
        }
        Self { inst, density_order, usable, budget, nodes: 0, best: Vec::new(), best_value: 0.0 }
    }

    /// Fractional single-dimension relaxation: for each dimension, greedily
    /// fill the remaining capacity with the undecided suffix by density and
    /// take the tightest of the resulting bounds.
    fn upper_bound(&self, idx: usize, value: f64, totals: &ResourceVector) -> f64 {
        let mut bound = f64::INFINITY;
        for d in 0..self.inst.dims {
            let mut fill = 0.0;
            let mut rem = self.inst.capacities[d] - totals.get(d);
            for &j in &self.density_order[d] {
                if j < idx {
                    continue;
                }
                let item = &self.inst.items[j];
                let c = item.consumption.get(d);
                if c == 0.0 {
                    fill += item.value;
                } else if c <= rem {
                    fill += item.value;
                    rem -= c;
                } else {
                    if rem > 0.0 {
                        fill += item.value * rem / c;
                    }
                    break;
                }
            }
            bound = bound.min(value + fill);
            if bound < self.best_value {
                return bound;
            }
        }
        bound
    }

    fn descend(
        &mut self,
        idx: usize,
        value: f64,
        totals: &ResourceVector,
        current: &mut Vec<usize>,
    ) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExhausted { budget: self.budget });
        }
        if idx == self.inst.n() {
            if prefer(value, current, self.best_value, &self.best) {
                self.best_value = value;
                self.best.clear();
                self.best.extend_from_slice(current);
            }
            return Ok(());
        }
        if self.upper_bound(idx, value, totals) < self.best_value {
            return Ok(());
        }

        let item = &self.inst.items[idx];
        if self.usable[idx] {
            let mut with_item = totals.clone();
            with_item.add_assign(&item.consumption)?;
            if with_item.fits_within(&self.inst.capacities) {
                current.push(idx);
                self.descend(idx + 1, value + item.value, &with_item, current)?;
                current.pop();
            }
        }
        self.descend(idx + 1, value, totals, current)
    }
}

fn density(inst: &KnapsackInstance, j: usize, d: usize) -> f64 {
    let c = inst.items[j].consumption.get(d);
    if c == 0.0 {
        f64::INFINITY
    } else {
        inst.items[j].value / c
    }
}

/// Exact optimum with the default node budget.
pub fn solve_mdk_exact(inst: &KnapsackInstance) -> Result<KnapsackSolution> {
    solve_mdk_exact_with(inst, &BranchBoundConfig::default())
}

/// Exact optimum via branch and bound; fails explicitly when the node budget
/// is exhausted.
pub fn solve_mdk_exact_with(
    inst: &KnapsackInstance,
    cfg: &BranchBoundConfig,
) -> Result<KnapsackSolution> {
    let mut search = Search::new(inst, cfg.node_budget);
    let totals = ResourceVector::zeros(inst.dims);
    let mut current = Vec::new();
    search.descend(0, 0.0, &totals, &mut current)?;
    finalize(inst, search.best, SolutionKind::Exact, search.nodes)
}
