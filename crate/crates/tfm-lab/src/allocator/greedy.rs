//! Density heuristic, the baseline for the solver benchmark.

use super::{finalize, KnapsackInstance, KnapsackSolution, SolutionKind};
use crate::mechanism::ResourceVector;

/// Inserts items in order of value per normalized consumption, skipping any
/// that no longer fit. Ties resolve toward the lower index; zero-value items
/// are skipped. For one-dimensional instances the better of this and the best
/// single item is a 1/2-approximation.
pub fn solve_greedy_density(inst: &KnapsackInstance) -> KnapsackSolution {
    let mut order: Vec<usize> = (0..inst.n()).filter(|&j| inst.items[j].value > 0.0).collect();
    let density = |j: usize| -> f64 {
        let load: f64 = inst.items[j]
            .consumption
            .entries()
            .iter()
            .zip(&inst.capacities)
            .map(|(c, cap)| if *cap > 0.0 { c / cap } else { f64::INFINITY })
            .sum();
        if load == 0.0 {
            f64::INFINITY
        } else {
            inst.items[j].value / load
        }
    };
    order.sort_by(|&a, &b| density(b).partial_cmp(&density(a)).unwrap().then(a.cmp(&b)));

    let mut totals = ResourceVector::zeros(inst.dims);
    let mut chosen = Vec::new();
    for j in order {
        let mut with_item = totals.clone();
        with_item.add_assign(&inst.items[j].consumption).expect("dims checked");
        if with_item.fits_within(&inst.capacities) {
            totals = with_item;
            chosen.push(j);
        }
    }
    finalize(inst, chosen, SolutionKind::Greedy, 0).expect("greedy selection is feasible")
}

#[cfg(test)]
mod tests {
    use super::super::test_support::item;
    use super::super::{solve_1d_dp, verify_solution};
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn empty_instance() {
        let inst = KnapsackInstance::new(vec![5.0], vec![]).unwrap();
        let sol = solve_greedy_density(&inst);
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.total_value, 0.0);
    }

    #[test]
    fn identical_items_fill_capacity_exactly() {
        let inst = KnapsackInstance::new(vec![6.0], vec![item(2.0, vec![2.0]); 3]).unwrap();
        let sol = solve_greedy_density(&inst);
        assert_eq!(sol.chosen, vec![0, 1, 2]);
        assert_eq!(sol.totals.get(0), 6.0);
    }

    #[test]
    fn combined_with_best_single_is_half_of_optimum() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4);
        for _ in 0..60 {
            let n = rng.gen_range(1..=40);
            let cap = rng.gen_range(10..=120) as f64;
            let items: Vec<_> = (0..n)
                .map(|_| {
                    item(rng.gen_range(0..=200) as f64, vec![rng.gen_range(1..=40) as f64])
                })
                .collect();
            let inst = KnapsackInstance::new(vec![cap], items).unwrap();
            let opt = solve_1d_dp(&inst, 1.0).unwrap().total_value;
            let greedy = solve_greedy_density(&inst);
            assert!(verify_solution(&inst, &greedy));
            let best_single = (0..inst.n())
                .filter(|&j| inst.items[j].consumption.get(0) <= cap)
                .map(|j| inst.items[j].value)
                .fold(0.0, f64::max);
            let combined = greedy.total_value.max(best_single);
            assert!(combined * 2.0 >= opt, "combined {combined} below half of {opt}");
        }
    }
}
