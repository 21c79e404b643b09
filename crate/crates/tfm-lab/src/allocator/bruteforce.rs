//! Exhaustive subset enumeration. The test oracle for every other solver.

use super::{finalize, prefer, KnapsackInstance, KnapsackSolution, SolutionKind};
use crate::error::{Error, Result};
use crate::mechanism::ResourceVector;

const MAX_ITEMS: usize = 25;

/// Enumerates all feasible subsets and returns the canonical best one.
pub fn solve_bruteforce(inst: &KnapsackInstance) -> Result<KnapsackSolution> {
    if inst.n() > MAX_ITEMS {
        return Err(Error::InstanceTooLarge {
            solver: "bruteforce",
            detail: format!("{} items exceeds the {MAX_ITEMS}-item enumeration limit", inst.n()),
        });
    }

    let mut best: Vec<usize> = Vec::new();
    let mut best_value = 0.0;
    let mut current: Vec<usize> = Vec::new();
    let mut totals = ResourceVector::zeros(inst.dims);

    // Depth-first over include/exclude decisions in index order. Consumption
    // only grows along the include branch, so an infeasible prefix prunes its
    // whole subtree without skipping any feasible subset.
    fn descend(
        inst: &KnapsackInstance,
        idx: usize,
        value: f64,
        totals: &mut ResourceVector,
        current: &mut Vec<usize>,
        best: &mut Vec<usize>,
        best_value: &mut f64,
    ) {
        if idx == inst.n() {
            if prefer(value, current, *best_value, best) {
                *best_value = value;
                best.clear();
                best.extend_from_slice(current);
            }
            return;
        }

        let item = &inst.items[idx];
        let mut with_item = totals.clone();
        with_item.add_assign(&item.consumption).expect("dims checked at construction");
        if with_item.fits_within(&inst.capacities) {
            current.push(idx);
            descend(inst, idx + 1, value + item.value, &mut with_item, current, best, best_value);
            current.pop();
        }
        descend(inst, idx + 1, value, totals, current, best, best_value);
    }

    descend(inst, 0, 0.0, &mut totals, &mut current, &mut best, &mut best_value);
    finalize(inst, best, SolutionKind::Exact, 0)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::item;
    use super::super::verify_solution;
    use super::*;

    #[test]
    fn empty_instance() {
        let inst = KnapsackInstance::new(vec![1.0], vec![]).unwrap();
        let sol = solve_bruteforce(&inst).unwrap();
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.total_value, 0.0);
    }

    #[test]
    fn two_small_beat_one_big() {
        // {A, B} and {A, C} both break the second capacity, so the best
        // feasible subset is {B, C} with value 4.
        let inst = KnapsackInstance::new(
            vec![2.0, 2.0],
            vec![
                item(3.0, vec![1.0, 2.0]),
                item(2.0, vec![1.0, 1.0]),
                item(2.0, vec![1.0, 1.0]),
            ],
        )
        .unwrap();
        let sol = solve_bruteforce(&inst).unwrap();
        assert_eq!(sol.chosen, vec![1, 2]);
        assert_eq!(sol.total_value, 4.0);
        assert!(verify_solution(&inst, &sol));
    }

    #[test]
    fn single_feasible_item() {
        let inst = KnapsackInstance::new(
            vec![2.0],
            vec![item(1.0, vec![5.0]), item(3.0, vec![2.0])],
        )
        .unwrap();
        let sol = solve_bruteforce(&inst).unwrap();
        assert_eq!(sol.chosen, vec![1]);
    }

    #[test]
    fn zero_value_items_left_out() {
        let inst = KnapsackInstance::new(
            vec![10.0],
            vec![item(0.0, vec![1.0]), item(2.0, vec![1.0]), item(0.0, vec![0.0])],
        )
        .unwrap();
        let sol = solve_bruteforce(&inst).unwrap();
        assert_eq!(sol.chosen, vec![1]);
    }

    #[test]
    fn too_many_items_rejected() {
        let items = vec![item(1.0, vec![1.0]); 26];
        let inst = KnapsackInstance::new(vec![1.0], items).unwrap();
        assert!(matches!(solve_bruteforce(&inst), Err(Error::InstanceTooLarge { .. })));
    }
}
