use crate::error::{Error, Result};
use crate::model::Item;
use crate::rank::desc_then_id;

/// Optimal fractional knapsack.
#[derive(Clone, Debug, PartialEq)]
pub struct KnapsackSolution {
    /// Fill level per input position.
    pub x: Vec<f64>,
    pub value: f64,
    /// Input positions that are fully included, in density order.
    pub prefix: Vec<usize>,
}

impl KnapsackSolution {
    /// Value of the fully included items only.
    pub fn prefix_value(&self, values: &[f64]) -> f64 {
        self.prefix.iter().map(|&j| values[j]).sum()
    }
}

/// Greedy by `value / weight` (ties by position), the last item fractional.
pub fn fractional_knapsack(values: &[f64], weights: &[f64], budget: f64) -> Result<KnapsackSolution> {
    if values.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(j) = weights.iter().position(|w| !(*w > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "weight {} at {j} is not positive",
            weights[j]
        )));
    }
    if !(budget >= 0.0) {
        return Err(Error::InvalidArgument(format!("budget {budget} is negative")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| desc_then_id(values[a] / weights[a], a, values[b] / weights[b], b));

    let mut x = vec![0.0; values.len()];
    let mut prefix = Vec::new();
    let mut remaining = budget;
    let mut value = 0.0;
    for j in order {
        if remaining <= 0.0 {
            break;
        }
        if weights[j] <= remaining {
            x[j] = 1.0;
            remaining -= weights[j];
            value += values[j];
            prefix.push(j);
        } else {
            let f = remaining / weights[j];
            x[j] = f;
            value += f * values[j];
            break;
        }
    }
    Ok(KnapsackSolution { x, value, prefix })
}

/// Minimal prefix, in non-increasing `value / duration` order (ties by id),
/// whose durations sum to at least `lambda`. Returns item ids in that order;
/// the whole pool when its total duration falls short.
pub fn greedy_round_up(items: &[Item], lambda: f64) -> Result<Vec<usize>> {
    if let Some(it) = items.iter().find(|it| !(it.duration > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "item {} has nonpositive duration {}",
            it.id, it.duration
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!("budget {lambda} is negative")));
    }
    let mut sorted: Vec<&Item> = items.iter().collect();
    sorted.sort_unstable_by(|a, b| desc_then_id(a.value / a.duration, a.id, b.value / b.duration, b.id));
    let mut out = Vec::new();
    let mut covered = 0.0;
    for it in sorted {
        if covered >= lambda {
            break;
        }
        covered += it.duration;
        out.push(it.id);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn items(spec: &[(f64, f64)]) -> Vec<Item> {
        spec.iter()
            .enumerate()
            .map(|(id, &(value, duration))| Item { id, value, duration })
            .collect()
    }

    #[test]
    fn knapsack_unit_weights() {
        let s = fractional_knapsack(&[10.0, 6.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(s.x, vec![1.0, 0.0]);
        assert_eq!(s.prefix, vec![0]);
    }

    #[test]
    fn knapsack_density_order() {
        // densities 5 and 6: the second item goes first
        let s = fractional_knapsack(&[10.0, 6.0], &[2.0, 1.0], 2.0).unwrap();
        assert_eq!(s.x, vec![0.5, 1.0]);
        assert_eq!(s.value, 11.0);
        assert_eq!(s.prefix, vec![1]);
    }

    #[test]
    fn knapsack_budget_covers_everything() {
        let s = fractional_knapsack(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 10.0).unwrap();
        assert_eq!(s.x, vec![1.0; 3]);
        assert_eq!(s.value, 6.0);
    }

    #[test]
    fn knapsack_rejects_bad_weights() {
        assert!(fractional_knapsack(&[1.0], &[0.0], 1.0).is_err());
        assert!(fractional_knapsack(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn round_up_examples() {
        let pool = items(&[(4.0, 0.1), (3.0, 0.1), (1.0, 0.1)]);
        assert!(greedy_round_up(&pool, 0.0).unwrap().is_empty());
        assert_eq!(greedy_round_up(&pool, 0.15).unwrap(), vec![0, 1]);
        assert_eq!(greedy_round_up(&pool, 5.0).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn round_up_ties_by_id() {
        let pool = items(&[(2.0, 0.2), (1.0, 0.1)]);
        assert_eq!(greedy_round_up(&pool, 0.05).unwrap(), vec![0]);
    }

    #[test]
    fn round_up_rejects_nonpositive_duration() {
        let pool = vec![Item {
            id: 0,
            value: 1.0,
            duration: 0.0,
        }];
        assert!(greedy_round_up(&pool, 0.1).is_err());
    }
}
