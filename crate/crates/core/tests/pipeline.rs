//! Cross-module invariants: online runs never beat the offline optimum and
//! their traces always pass the independent checker.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempsec::arrivals::{sample_arrivals, ArrivalDistribution};
use tempsec::experiments::{run_trials, ExperimentConfig, GeneratorSpec};
use tempsec::online::{check_trace, run_scaling_cardinality, run_scaling_lengths, run_scaling_packing};
use tempsec::oracles::{lp_relaxation_opt, opt_offline_brute, opt_offline_exact, opt_star_cardinality};
use tempsec::{ArrivalRealization, Instance, Item, PackingConstraints};

fn instance_strategy() -> impl Strategy<Value = (Instance, ArrivalRealization)> {
    (1usize..12, 1u32..4, 0.05f64..0.6).prop_flat_map(|(n, b, gamma)| {
        (
            prop::collection::vec(0u32..50, n),
            prop::collection::vec(0.0f64..1.0, n),
        )
            .prop_map(move |(vals, times)| {
                let vals: Vec<f64> = vals.into_iter().map(f64::from).collect();
                (
                    Instance::with_uniform_durations(&vals, gamma, f64::from(b)).unwrap(),
                    ArrivalRealization::from_times(times).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn cardinality_is_dominated_by_offline((inst, real) in instance_strategy()) {
        let trace = run_scaling_cardinality(&inst, &real).unwrap();
        prop_assert!(check_trace(&trace, &inst, &real).ok());
        let exact = opt_offline_exact(&inst, &real).unwrap().value;
        prop_assert_eq!(exact, opt_offline_brute(&inst, &real).unwrap().value);
        prop_assert!(trace.alg_value <= exact + 1e-9);
    }

    #[test]
    fn lengths_is_feasible(
        (inst, real) in instance_strategy(),
        shrink in prop::collection::vec(0.01f64..=1.0, 12),
        alpha in 0.05f64..=1.0,
    ) {
        let items: Vec<Item> = inst
            .items()
            .iter()
            .map(|it| Item { duration: it.duration * shrink[it.id], ..*it })
            .collect();
        let inst = Instance::new(items, inst.gamma(), inst.capacity(), None).unwrap();
        let trace = run_scaling_lengths(&inst, &real, alpha).unwrap();
        prop_assert!(check_trace(&trace, &inst, &real).ok());
        prop_assert!(trace.alg_value <= opt_offline_brute(&inst, &real).unwrap().value + 1e-9);
    }

    #[test]
    fn packing_respects_capacities(
        (inst, real) in instance_strategy(),
        coefs in prop::collection::vec(0.05f64..=1.0, 12),
        seed in any::<u64>(),
    ) {
        let n = inst.len();
        let c = PackingConstraints::new(vec![inst.capacity()], (0..n).map(|j| vec![(0, coefs[j])]).collect()).unwrap();
        let inst = Instance::new(inst.items().to_vec(), inst.gamma(), inst.capacity(), Some(c)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = run_scaling_packing(&inst, &real, Some(0.2), &mut rng).unwrap();
        prop_assert!(check_trace(&trace, &inst, &real).ok());
        prop_assert!(trace.alg_value <= lp_relaxation_opt(&inst).unwrap().value + 1e-9);
    }
}

#[test]
fn opt_star_bounds_every_realization() {
    let inst = GeneratorSpec {
        n: 60,
        gamma: 0.1,
        capacity: 2.0,
        values: tempsec::experiments::generators::ValueGenerator::UniformValues {},
        durations: Default::default(),
        constraints: None,
        seed: 4,
    }
    .generate()
    .unwrap();
    let star = opt_star_cardinality(&inst).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let real = sample_arrivals(inst.len(), &ArrivalDistribution::Uniform {}, &mut rng).unwrap();
        assert!(opt_offline_exact(&inst, &real).unwrap().value <= star + 1e-9);
    }
}

#[test]
fn config_round_trips_through_json() {
    let text = r#"{
      "instance": {"generator": {"n": 30, "gamma": 0.2, "capacity": 1,
                                 "values": {"kind": "planted-heavy", "heavy": 2, "heavy_value": 10},
                                 "durations": {"kind": "uniform"}}},
      "algorithm": {"variant": "lengths", "alpha": 0.5},
      "arrivals": {"kind": "general", "inverse_cdf": [[0, 0], [0.5, 0.2], [1, 1]]},
      "trials": 40,
      "seed": 3,
      "oracle": "exact"
    }"#;
    let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
    cfg.validate().unwrap();
    let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(cfg, back);
    let inst = cfg.instance.load(std::path::Path::new(".")).unwrap();
    let agg = run_trials(&cfg, &inst, 2).unwrap();
    assert_eq!(agg.trials, 40);
    assert_eq!(agg.invariant_failures, 0);
    assert!(agg.ratio > 0.0 && agg.ratio <= 1.0);
    assert!(serde_json::from_str::<ArrivalDistribution>(r#"{"kind": "uniform", "x": 1}"#).is_err());
}
