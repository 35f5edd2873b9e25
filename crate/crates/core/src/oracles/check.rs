//! Randomized self-check of the oracles against their brute-force
//! counterparts: flow vs. subset search, and the LP solver vs. vertex
//! enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::lp::{self, PackingLp};
use crate::model::{ArrivalRealization, Instance, InstanceFile};

use super::{opt_offline_brute, opt_offline_exact};

/// Largest `n` the check accepts.
pub const MAX_N: usize = 20;

/// Absolute tolerance for LP objective agreement.
pub const LP_TOL: f64 = 1e-8;

/// The implementations under test. Tests substitute faulty doubles.
pub struct Solvers<'a> {
    pub exact: &'a dyn Fn(&Instance, &ArrivalRealization) -> Result<f64>,
    pub lp: &'a dyn Fn(&PackingLp) -> Result<f64>,
}

impl Default for Solvers<'static> {
    fn default() -> Self {
        Self {
            exact: &|i, r| Ok(opt_offline_exact(i, r)?.value),
            lp: &|p| Ok(lp::solve_packing_lp(p, lp::DEFAULT_TOL)?.value),
        }
    }
}

/// A failing case, serializable for replay.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mismatch {
    Exact {
        case: usize,
        instance: InstanceFile,
        arrival_times: Vec<f64>,
        expected: f64,
        got: f64,
    },
    Lp {
        case: usize,
        objective: Vec<f64>,
        matrix: Vec<Vec<f64>>,
        capacities: Vec<f64>,
        expected: f64,
        got: f64,
    },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CheckReport {
    pub exact_cases: usize,
    pub lp_cases: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Random cardinality instance with integer values (sums are exact) and
/// random arrivals.
pub fn random_exact_case<R: Rng>(rng: &mut R, n_max: usize) -> Result<(Instance, ArrivalRealization)> {
    let n = rng.gen_range(1..=n_max.max(1));
    let gamma = [0.1, 0.3][rng.gen_range(0..2)];
    let b = rng.gen_range(1..=3) as f64;
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(0..100) as f64).collect();
    let instance = Instance::with_uniform_durations(&values, gamma, b)?;
    let times = (0..n).map(|_| rng.gen::<f64>()).collect();
    Ok((instance, ArrivalRealization::from_times(times)?))
}

/// Random packing LP with `k <= 6` columns and `m <= 4` rows.
pub fn random_lp<R: Rng>(rng: &mut R) -> Result<PackingLp> {
    let k = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=4);
    let objective = (0..k).map(|_| rng.gen_range(0.0..10.0)).collect();
    let matrix = (0..m)
        .map(|_| {
            (0..k)
                .map(|_| {
                    if rng.gen_bool(0.25) {
                        0.0
                    } else {
                        rng.gen_range(0.0..3.0)
                    }
                })
                .collect()
        })
        .collect();
    let capacities = (0..m).map(|_| rng.gen_range(0.0..4.0)).collect();
    PackingLp::new(objective, matrix, capacities)
}

pub fn run(n_max: usize, count: usize, seed: u64, solvers: &Solvers<'_>) -> Result<CheckReport> {
    let n_max = n_max.clamp(1, MAX_N);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::default();
    for case in 0..count {
        let (instance, arrivals) = random_exact_case(&mut rng, n_max)?;
        let expected = opt_offline_brute(&instance, &arrivals)?.value;
        let got = (solvers.exact)(&instance, &arrivals)?;
        report.exact_cases += 1;
        if got != expected {
            report.mismatches.push(Mismatch::Exact {
                case,
                instance: InstanceFile::from(&instance),
                arrival_times: arrivals.times().to_vec(),
                expected,
                got,
            });
        }

        let lp = random_lp(&mut rng)?;
        let expected = lp::vertex::enumerate(&lp)?.value;
        let got = (solvers.lp)(&lp)?;
        report.lp_cases += 1;
        if (got - expected).abs() > LP_TOL {
            report.mismatches.push(Mismatch::Lp {
                case,
                objective: lp.objective.clone(),
                matrix: lp.matrix.clone(),
                capacities: lp.capacities.clone(),
                expected,
                got,
            });
        }
    }
    Ok(report)
}
