//! Offline benchmarks: the denominators of every competitive ratio.

mod brute;
pub mod check;
mod flow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{fractional_knapsack, solve_packing_lp, PackingLp, DEFAULT_TOL};
use crate::model::{ArrivalRealization, Instance};

/// Largest instance the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_ITEMS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    Flow,
    Brute,
    Knapsack,
    Lp,
    Topk,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OfflineSelection {
    /// Selected item ids, ascending.
    Set(Vec<usize>),
    /// Fractional solution indexed by item id.
    Fractional(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OfflineResult {
    pub value: f64,
    pub selection: OfflineSelection,
    pub method: OracleMethod,
}

/// `⌈1/γ⌉`, robust to `1/γ` landing a hair above an integer.
pub fn windows_per_horizon(gamma: f64) -> f64 {
    (1.0 / gamma - 1e-9).ceil()
}

fn sum_values(instance: &Instance, ids: &[usize]) -> f64 {
    ids.iter().map(|&j| instance.items()[j].value).sum()
}

fn set_result(instance: &Instance, mut ids: Vec<usize>, method: OracleMethod) -> OfflineResult {
    ids.sort_unstable();
    OfflineResult {
        value: sum_values(instance, &ids),
        selection: OfflineSelection::Set(ids),
        method,
    }
}

/// Sum of the `B⌈1/γ⌉` largest values: no realization lets OPT hold more.
pub fn opt_star_cardinality(instance: &Instance) -> Result<OfflineResult> {
    let b = instance.cardinality_capacity()? as f64;
    let budget = b * windows_per_horizon(instance.gamma());
    let values = instance.values();
    let ks = fractional_knapsack(&values, &vec![1.0; values.len()], budget)?;
    Ok(set_result(instance, ks.prefix, OracleMethod::Topk))
}

/// Fractional knapsack over durations with budget `B(1+γ)`; bounds the value
/// of any schedule since selected durations sum to at most `B(1+γ)`.
pub fn opt_star_lengths(instance: &Instance) -> Result<OfflineResult> {
    let b = instance.cardinality_capacity()? as f64;
    let values = instance.values();
    let weights: Vec<f64> = instance.items().iter().map(|i| i.duration).collect();
    let ks = fractional_knapsack(&values, &weights, b * (1.0 + instance.gamma()))?;
    Ok(OfflineResult {
        value: ks.value,
        selection: OfflineSelection::Fractional(ks.x),
        method: OracleMethod::Knapsack,
    })
}

fn intervals(instance: &Instance, arrivals: &ArrivalRealization) -> Result<Vec<(f64, f64, f64)>> {
    if arrivals.len() != instance.len() {
        return Err(Error::InvalidArgument(format!(
            "{} arrival times for {} items",
            arrivals.len(),
            instance.len()
        )));
    }
    if instance.constraints().is_some() {
        return Err(Error::InvalidArgument(
            "exact offline optimum is only defined for cardinality instances".into(),
        ));
    }
    Ok(instance
        .items()
        .iter()
        .zip(arrivals.times())
        .map(|(it, &t)| (t, t + it.duration, it.value))
        .collect())
}

/// Exact optimum for a realization: max-weight selection with at most `B`
/// items active at any instant, via min-cost flow.
pub fn opt_offline_exact(instance: &Instance, arrivals: &ArrivalRealization) -> Result<OfflineResult> {
    let b = instance.cardinality_capacity()?;
    let iv = intervals(instance, arrivals)?;
    Ok(set_result(
        instance,
        flow::max_weight_b_overlap(&iv, b),
        OracleMethod::Flow,
    ))
}

/// Exhaustive-search counterpart of [`opt_offline_exact`] for small `n`.
pub fn opt_offline_brute(instance: &Instance, arrivals: &ArrivalRealization) -> Result<OfflineResult> {
    if instance.len() > BRUTE_FORCE_MAX_ITEMS {
        return Err(Error::InvalidArgument(format!(
            "brute force limited to {BRUTE_FORCE_MAX_ITEMS} items, got {}",
            instance.len()
        )));
    }
    let b = instance.cardinality_capacity()?;
    let iv = intervals(instance, arrivals)?;
    Ok(set_result(instance, brute::best_subset(&iv, b), OracleMethod::Brute))
}

/// Optimum of `max v·x  s.t.  A x <= ⌈1/γ⌉ b, 0 <= x <= 1`.
pub fn lp_relaxation_opt(instance: &Instance) -> Result<OfflineResult> {
    let c = instance
        .constraints()
        .ok_or_else(|| Error::InvalidArgument("LP relaxation needs packing constraints".into()))?;
    let scale = windows_per_horizon(instance.gamma());
    let lp = PackingLp::new(
        instance.values(),
        c.dense(),
        c.capacities().iter().map(|b| b * scale).collect(),
    )?;
    let sol = solve_packing_lp(&lp, DEFAULT_TOL)?;
    Ok(OfflineResult {
        value: sol.value,
        selection: OfflineSelection::Fractional(sol.x),
        method: OracleMethod::Lp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Item, PackingConstraints};

    fn real(times: &[f64]) -> ArrivalRealization {
        ArrivalRealization::from_times(times.to_vec()).unwrap()
    }

    #[test]
    fn opt_star_cardinality_examples() {
        let i = Instance::with_uniform_durations(&[5.0, 4.0, 3.0], 0.5, 1.0).unwrap();
        assert_eq!(opt_star_cardinality(&i).unwrap().value, 9.0);

        let vals: Vec<f64> = (1..=10).map(f64::from).collect();
        let i = Instance::with_uniform_durations(&vals, 0.3, 2.0).unwrap();
        let r = opt_star_cardinality(&i).unwrap();
        assert_eq!(r.value, 52.0);
        assert_eq!(r.selection, OfflineSelection::Set((2..10).collect()));

        let i = Instance::with_uniform_durations(&[1.0, 2.0], 0.1, 1.0).unwrap();
        assert_eq!(opt_star_cardinality(&i).unwrap().value, 3.0);
    }

    #[test]
    fn opt_star_lengths_examples() {
        let items = vec![
            Item {
                id: 0,
                value: 4.0,
                duration: 0.6,
            },
            Item {
                id: 1,
                value: 3.0,
                duration: 0.5,
            },
            Item {
                id: 2,
                value: 1.0,
                duration: 0.2,
            },
        ];
        // No integral B and γ in (0, 1] give budget B(1+γ) = 1 exactly, so the
        // budget-1 case is checked on the kernel, the oracle at γ = 0.6.
        let ks = fractional_knapsack(&[4.0, 3.0, 1.0], &[0.6, 0.5, 0.2], 1.0).unwrap();
        assert!((ks.value - 6.4).abs() < 1e-12);
        let inst = Instance::new(items.clone(), 0.6, 1.0, None).unwrap();
        // budget 1.6 holds all three items
        assert!((opt_star_lengths(&inst).unwrap().value - 8.0).abs() < 1e-12);
        let mut items = items;
        items.push(Item {
            id: 3,
            value: 0.5,
            duration: 0.6,
        });
        let inst = Instance::new(items, 0.6, 1.0, None).unwrap();
        // densities 6.67, 6, 5, 0.83: 4 + 3 + 1 + 0.5 * 0.5
        assert!((opt_star_lengths(&inst).unwrap().value - 8.25).abs() < 1e-12);

        let single = Instance::new(
            vec![Item {
                id: 0,
                value: 2.5,
                duration: 0.3,
            }],
            0.3,
            1.0,
            None,
        )
        .unwrap();
        assert_eq!(opt_star_lengths(&single).unwrap().value, 2.5);
    }

    #[test]
    fn opt_star_lengths_reduces_to_uniform_case() {
        let vals = [9.0, 7.0, 5.0, 3.0, 1.0];
        let gamma = 0.3;
        let i = Instance::with_uniform_durations(&vals, gamma, 1.0).unwrap();
        // budget 1.3 = 4 full items of 0.3 plus 1/3 of the fifth
        let expected = 9.0 + 7.0 + 5.0 + 3.0 + (1.3 - 1.2) / 0.3 * 1.0;
        assert!((opt_star_lengths(&i).unwrap().value - expected).abs() < 1e-9);
    }

    #[test]
    fn exact_disjoint_and_overlap() {
        let i = Instance::with_uniform_durations(&[1.0, 2.0, 3.0], 0.1, 1.0).unwrap();
        let r = real(&[0.1, 0.3, 0.5]);
        assert_eq!(opt_offline_exact(&i, &r).unwrap().value, 6.0);

        let i = Instance::with_uniform_durations(&[5.0, 3.0], 0.5, 1.0).unwrap();
        let r = real(&[0.2, 0.2]);
        assert_eq!(opt_offline_exact(&i, &r).unwrap().value, 5.0);
    }

    #[test]
    fn exact_three_item_chain() {
        let i = Instance::with_uniform_durations(&[5.0, 4.0, 6.0], 0.3, 1.0).unwrap();
        let r = real(&[0.10, 0.25, 0.60]);
        let flow = opt_offline_exact(&i, &r).unwrap();
        let brute = opt_offline_brute(&i, &r).unwrap();
        assert_eq!(flow.value, 11.0);
        assert_eq!(brute.value, 11.0);
        assert_eq!(flow.selection, OfflineSelection::Set(vec![0, 2]));
    }

    #[test]
    fn exact_rejects_length_mismatch() {
        let i = Instance::with_uniform_durations(&[1.0, 2.0], 0.1, 1.0).unwrap();
        assert!(opt_offline_exact(&i, &real(&[0.5])).is_err());
    }

    #[test]
    fn lp_relaxation_encodes_cardinality() {
        let vals = [5.0, 4.0, 3.0, 2.0, 1.0];
        let c = PackingConstraints::cardinality(5, 1.0).unwrap();
        let items: Vec<Item> = vals
            .iter()
            .enumerate()
            .map(|(id, &value)| Item {
                id,
                value,
                duration: 0.4,
            })
            .collect();
        let i = Instance::new(items, 0.4, 1.0, Some(c)).unwrap();
        // budget B⌈1/γ⌉ = 3
        assert!((lp_relaxation_opt(&i).unwrap().value - 12.0).abs() < 1e-9);

        let c0 = PackingConstraints::new(vec![0.0], (0..5).map(|_| vec![(0, 1.0)]).collect()).unwrap();
        let items: Vec<Item> = (0..5)
            .map(|id| Item {
                id,
                value: 1.0,
                duration: 0.4,
            })
            .collect();
        let i0 = Instance::new(items, 0.4, 1.0, Some(c0)).unwrap();
        assert_eq!(lp_relaxation_opt(&i0).unwrap().value, 0.0);

        let plain = Instance::with_uniform_durations(&vals, 0.4, 1.0).unwrap();
        assert!(lp_relaxation_opt(&plain).is_err());
    }

    #[test]
    fn lp_relaxation_two_rows_matches_vertices() {
        let c = PackingConstraints::new(
            vec![0.7, 0.9],
            vec![vec![(0, 0.5), (1, 0.2)], vec![(0, 0.4), (1, 0.9)], vec![(0, 0.8)]],
        )
        .unwrap();
        let items: Vec<Item> = [3.0, 2.0, 4.0]
            .iter()
            .enumerate()
            .map(|(id, &value)| Item {
                id,
                value,
                duration: 0.5,
            })
            .collect();
        let i = Instance::new(items, 0.5, 1.0, Some(c.clone())).unwrap();
        let doubled = PackingLp::new(vec![3.0, 2.0, 4.0], c.dense(), vec![1.4, 1.8]).unwrap();
        let brute = crate::lp::vertex::enumerate(&doubled).unwrap();
        assert!((lp_relaxation_opt(&i).unwrap().value - brute.value).abs() < 1e-9);
    }
}
