//! Value-scaling approximation scheme for one-dimensional instances.

use super::{finalize, recompute, KnapsackInstance, KnapsackSolution, SolutionKind};
use crate::error::{Error, Result};

const MAX_TABLE_CELLS: u64 = 200_000_000;

/// `(1 - epsilon)`-approximation in time polynomial in `n` and `1 / epsilon`.
///
/// Values are rounded down to multiples of `epsilon * v_max / n` and an exact
/// dynamic program runs over scaled value sums, tracking the minimum weight
/// for each achievable scaled value. The rounding forfeits at most
/// `epsilon * v_max <= epsilon * OPT`. The result is compared against the
/// best single item and the better of the two is returned, so an optimum
/// consisting of one item is always recovered at its exact value.
pub fn solve_1d_fptas(inst: &KnapsackInstance, epsilon: f64) -> Result<KnapsackSolution> {
    if inst.dims != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: inst.dims });
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0, 1), got {epsilon}"
        )));
    }

    let cap = inst.capacities[0];
    let kind = SolutionKind::Fptas { epsilon };
    let feasible: Vec<usize> =
        (0..inst.n()).filter(|&j| inst.items[j].consumption.get(0) <= cap).collect();
    let v_max = feasible.iter().map(|&j| inst.items[j].value).fold(0.0, f64::max);
    if v_max == 0.0 {
        return finalize(inst, Vec::new(), kind, 0);
    }

    let scale = epsilon * v_max / inst.n() as f64;
    let scaled: Vec<u64> =
        feasible.iter().map(|&j| (inst.items[j].value / scale).floor() as u64).collect();
    let total_scaled: u64 = scaled.iter().sum();

    let cells = (feasible.len() as u64 + 1) * (total_scaled + 1);
    if cells > MAX_TABLE_CELLS {
        return Err(Error::InstanceTooLarge {
            solver: "fptas",
            detail: format!("{cells} table cells exceed the {MAX_TABLE_CELLS} limit"),
        });
    }

    // min_weight[v] = least weight achieving scaled value exactly v.
    let width = total_scaled as usize + 1;
    let mut min_weight = vec![f64::INFINITY; width];
    min_weight[0] = 0.0;
    let mut keep = vec![false; feasible.len() * width];
    for (row, &j) in feasible.iter().enumerate() {
        let sv = scaled[row] as usize;
        let w = inst.items[j].consumption.get(0);
        for v in (sv..width).rev() {
            let candidate = min_weight[v - sv] + w;
            if candidate < min_weight[v] && candidate <= cap {
                min_weight[v] = candidate;
                keep[row * width + v] = true;
            }
        }
    }

    let best_scaled = (0..width).rev().find(|&v| min_weight[v] <= cap).unwrap_or(0);
    let mut chosen = Vec::new();
    let mut v = best_scaled;
    for row in (0..feasible.len()).rev() {
        if keep[row * width + v] {
            chosen.push(feasible[row]);
            v -= scaled[row] as usize;
        }
    }
    chosen.reverse();

    let (dp_value, _) = recompute(inst, &chosen)?;
    let best_single = feasible
        .iter()
        .copied()
        .max_by(|&a, &b| inst.items[a].value.partial_cmp(&inst.items[b].value).unwrap());
    if let Some(j) = best_single {
        if inst.items[j].value > dp_value {
            return finalize(inst, vec![j], kind, 0);
        }
    }
    finalize(inst, chosen, kind, 0)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::item;
    use super::super::{solve_1d_dp, verify_solution};
    use super::*;
    use rand::{Rng, SeedableRng};

    fn one_dim(cap: f64, items: Vec<(f64, f64)>) -> KnapsackInstance {
        let items = items.into_iter().map(|(v, c)| item(v, vec![c])).collect();
        KnapsackInstance::new(vec![cap], items).unwrap()
    }

    #[test]
    fn achieves_guarantee_against_dp() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..60 {
            let n = rng.gen_range(1..=60);
            let cap = rng.gen_range(20..=200) as f64;
            let items: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(0..=500) as f64, rng.gen_range(1..=60) as f64))
                .collect();
            let inst = one_dim(cap, items);
            let opt = solve_1d_dp(&inst, 1.0).unwrap().total_value;
            let approx = solve_1d_fptas(&inst, 0.1).unwrap();
            assert!(verify_solution(&inst, &approx));
            assert!(
                approx.total_value >= 0.9 * opt,
                "approx {} below 0.9 * {opt}",
                approx.total_value
            );
        }
    }

    #[test]
    fn single_item_optimum_exact() {
        let inst = one_dim(10.0, vec![(100.0, 10.0), (30.0, 5.0), (30.0, 5.0)]);
        let sol = solve_1d_fptas(&inst, 0.3).unwrap();
        assert_eq!(sol.total_value, 100.0);
    }

    #[test]
    fn symmetric_items_fill_like_exact() {
        let inst = one_dim(6.0, vec![(2.0, 2.0); 5]);
        let sol = solve_1d_fptas(&inst, 0.1).unwrap();
        let opt = solve_1d_dp(&inst, 1.0).unwrap();
        assert_eq!(sol.chosen.len(), opt.chosen.len());
        assert_eq!(sol.total_value, opt.total_value);
    }

    #[test]
    fn epsilon_out_of_range_rejected() {
        let inst = one_dim(1.0, vec![(1.0, 1.0)]);
        assert!(solve_1d_fptas(&inst, 0.0).is_err());
        assert!(solve_1d_fptas(&inst, 1.0).is_err());
    }
}
