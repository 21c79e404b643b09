//! Pseudo-polynomial dynamic program for one-dimensional instances whose
//! consumptions sit on a caller-supplied quantization grid.

use super::{finalize, KnapsackInstance, KnapsackSolution, SolutionKind};
use crate::error::{Error, Result};

const MAX_TABLE_WIDTH: u64 = 10_000_000;
const MAX_BLOCK_CELLS: usize = 4_000_000;
const GRID_TOL: f64 = 1e-9;

#[derive(Clone)]
struct Row {
    value: Vec<f64>,
    count: Vec<u32>,
}

impl Row {
    fn zeros(width: usize) -> Self {
        Self { value: vec![0.0; width], count: vec![0; width] }
    }
}

/// Computes `dp[i]` from `dp[i+1]` for one item: the best of excluding the
/// item and, where it fits, including it. Ties on value keep the smaller
/// cardinality.
fn combine(next: &Row, weight: usize, value: f64) -> Row {
    let width = next.value.len();
    let mut row = next.clone();
    for w in weight..width {
        let inc_v = value + next.value[w - weight];
        let inc_k = 1 + next.count[w - weight];
        if inc_v > row.value[w] || (inc_v == row.value[w] && inc_k < row.count[w]) {
            row.value[w] = inc_v;
            row.count[w] = inc_k;
        }
    }
    row
}

/// Exact optimum by dynamic programming over the integer capacity grid.
///
/// Every consumption must be within `1e-9` of an integer multiple of `unit`
/// and the capacity may span at most `1e7` grid cells. The reconstruction
/// walks items in index order and keeps an item exactly when the optimal
/// value and minimal cardinality remain achievable with it, which yields the
/// same canonical solution as exhaustive enumeration: preferring an early
/// index whenever it still reaches the target produces the lexicographically
/// smallest optimal index set.
pub fn solve_1d_dp(inst: &KnapsackInstance, unit: f64) -> Result<KnapsackSolution> {
    if inst.dims != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: inst.dims });
    }
    if !unit.is_finite() || unit <= 0.0 {
        return Err(Error::InvalidParameter(format!("unit must be positive, got {unit}")));
    }

    let cap_cells = (inst.capacities[0] / unit + GRID_TOL).floor();
    if cap_cells as u64 > MAX_TABLE_WIDTH {
        return Err(Error::InstanceTooLarge {
            solver: "dp",
            detail: format!(
                "capacity spans {cap_cells} grid cells, limit is {MAX_TABLE_WIDTH}"
            ),
        });
    }
    let capacity = cap_cells as usize;
    let width = capacity + 1;
    let n = inst.n();

    let mut weights = Vec::with_capacity(n);
    for (j, item) in inst.items.iter().enumerate() {
        let cells = item.consumption.get(0) / unit;
        let rounded = cells.round();
        if (cells - rounded).abs() > GRID_TOL {
            return Err(Error::InvalidParameter(format!(
                "item {j} consumption {} is not a multiple of unit {unit}",
                item.consumption.get(0)
            )));
        }
        // Oversized items get a sentinel weight one past the capacity.
        let w = if rounded > capacity as f64 { capacity + 1 } else { rounded as usize };
        weights.push(w);
    }

    // Suffix table dp[i][w] built from i = n down to 0, with rows snapshotted
    // every `stride` items so reconstruction can re-derive any row from the
    // nearest checkpoint above it in O(stride * width).
    let stride = (MAX_BLOCK_CELLS / width).clamp(1, n.max(1));
    let mut checkpoints: Vec<(usize, Row)> = Vec::new();
    let mut row = Row::zeros(width);
    checkpoints.push((n, row.clone()));
    for i in (0..n).rev() {
        if weights[i] <= capacity {
            row = combine(&row, weights[i], inst.items[i].value);
        }
        if i % stride == 0 && i != 0 {
            checkpoints.push((i, row.clone()));
        }
    }
    checkpoints.sort_by_key(|(idx, _)| *idx);
    let root = row;

    let mut target_v = root.value[capacity];
    let mut target_k = root.count[capacity];
    let mut w = capacity;
    let mut chosen = Vec::with_capacity(target_k as usize);

    // Rows dp[i+1] are consumed in ascending i; rebuild them block by block
    // between consecutive checkpoints.
    let mut block: Vec<Row> = Vec::new();
    let mut block_lo = usize::MAX;
    for i in 0..n {
        let need = i + 1;
        if block_lo == usize::MAX || need < block_lo || need >= block_lo + block.len() {
            let &(ck_idx, ref ck_row) =
                checkpoints.iter().find(|(idx, _)| *idx >= need).expect("checkpoint exists");
            block.clear();
            block.push(ck_row.clone());
            for j in (need..ck_idx).rev() {
                let prev = block.last().unwrap();
                let next = if weights[j] <= capacity {
                    combine(prev, weights[j], inst.items[j].value)
                } else {
                    prev.clone()
                };
                block.push(next);
            }
            block.reverse(); // block[k] is dp[need + k]
            block_lo = need;
        }
        let next_row = &block[need - block_lo];

        let weight = weights[i];
        let include = weight <= w
            && inst.items[i].value + next_row.value[w - weight] == target_v
            && 1 + next_row.count[w - weight] == target_k;
        if include {
            chosen.push(i);
            w -= weight;
            target_v = next_row.value[w];
            target_k = next_row.count[w];
        }
    }

    finalize(inst, chosen, SolutionKind::Exact, 0)
}
