//! Seeded instance generators. Values are drawn once and then frozen; only
//! arrival times vary between trials.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrivals::{trial_rng, Stream};
use crate::error::{Error, Result};
use crate::model::{Instance, Item, PackingConstraints};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ValueGenerator {
    /// `v_j ~ U[0, 1]` i.i.d.
    UniformValues {},
    /// `v_j = rho^j`.
    GeometricValues { rho: f64 },
    /// `U[0, 1]` background with `heavy` items of value `heavy_value` at
    /// random positions.
    PlantedHeavy { heavy: usize, heavy_value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DurationGenerator {
    /// Every duration equals `gamma`.
    Fixed {},
    /// `λ_j ~ U(0, gamma]` i.i.d.
    Uniform {},
}

impl Default for DurationGenerator {
    fn default() -> Self {
        DurationGenerator::Fixed {}
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientGenerator {
    #[default]
    Ones,
    /// `U(0, 1]` i.i.d.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConstraintGenerator {
    /// One row containing every item.
    SingleRow {
        #[serde(default)]
        coefficients: CoefficientGenerator,
    },
    /// Each item joins `per_item` distinct rows chosen uniformly.
    RandomSparse {
        rows: usize,
        per_item: usize,
        #[serde(default)]
        coefficients: CoefficientGenerator,
    },
}

/// Full description of a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: usize,
    pub gamma: f64,
    /// `B`; also every row's capacity when constraints are generated.
    pub capacity: f64,
    pub values: ValueGenerator,
    #[serde(default)]
    pub durations: DurationGenerator,
    #[serde(default)]
    pub constraints: Option<ConstraintGenerator>,
    /// Seed for the instance only; arrivals use the experiment seed.
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Instance> {
        let mut rng = trial_rng(self.seed, 0, Stream::Instance);
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInstance("generator needs n >= 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidInstance(format!("gamma {} not in (0, 1]", self.gamma)));
        }
        let values: Vec<f64> = match &self.values {
            ValueGenerator::UniformValues {} => (0..n).map(|_| rng.gen::<f64>()).collect(),
            ValueGenerator::GeometricValues { rho } => {
                if !(*rho > 0.0) {
                    return Err(Error::InvalidInstance(format!("rho {rho} must be positive")));
                }
                (0..n).map(|j| rho.powi(j as i32)).collect()
            }
            ValueGenerator::PlantedHeavy { heavy, heavy_value } => {
                if *heavy > n {
                    return Err(Error::InvalidInstance(format!("{heavy} heavy items among {n}")));
                }
                let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                for j in index::sample(&mut rng, n, *heavy) {
                    v[j] = *heavy_value;
                }
                v
            }
        };
        let gamma = self.gamma;
        let items = values
            .into_iter()
            .enumerate()
            .map(|(id, value)| {
                let duration = match self.durations {
                    DurationGenerator::Fixed {} => gamma,
                    DurationGenerator::Uniform {} => gamma * (1.0 - rng.gen::<f64>()),
                };
                Item { id, value, duration }
            })
            .collect();
        let constraints = match &self.constraints {
            None => None,
            Some(g) => Some(self.constraints(g, &mut rng)?),
        };
        Instance::new(items, gamma, self.capacity, constraints)
    }

    fn constraints(&self, g: &ConstraintGenerator, rng: &mut ChaCha8Rng) -> Result<PackingConstraints> {
        let coef = |c: CoefficientGenerator, rng: &mut ChaCha8Rng| match c {
            CoefficientGenerator::Ones => 1.0,
            CoefficientGenerator::Uniform => 1.0 - rng.gen::<f64>(),
        };
        match *g {
            ConstraintGenerator::SingleRow { coefficients } => {
                let columns = (0..self.n).map(|_| vec![(0, coef(coefficients, rng))]).collect();
                PackingConstraints::new(vec![self.capacity], columns)
            }
            ConstraintGenerator::RandomSparse {
                rows,
                per_item,
                coefficients,
            } => {
                if per_item == 0 || per_item > rows {
                    return Err(Error::InvalidConstraints(format!(
                        "per_item {per_item} must lie in 1..={rows}"
                    )));
                }
                let columns = (0..self.n)
                    .map(|_| {
                        let mut rs = index::sample(rng, rows, per_item).into_vec();
                        rs.sort_unstable();
                        rs.into_iter().map(|r| (r, coef(coefficients, rng))).collect()
                    })
                    .collect();
                PackingConstraints::new(vec![self.capacity; rows], columns)
            }
        }
    }
}
