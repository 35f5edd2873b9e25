//! Monte Carlo estimation of competitive ratios.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrivals::{sample_arrivals, trial_rng, ArrivalDistribution, Stream};
use crate::error::{Error, Result};
use crate::model::{capacity_ratio, sparsity, ArrivalRealization, Instance};
use crate::online::{check_trace, AlgorithmParams, AlgorithmTrace, Epsilon, Runner, Variant};
use crate::oracles::{self, OracleMethod};

use super::bounds::{theoretical_bound, Bound, BoundFlag, Theorem};
use super::generators::GeneratorSpec;
use super::stats::{mean, ratio_of_means};

/// Denominator of the measured ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleChoice {
    /// Realization-independent relaxation (top values or duration knapsack).
    OptStar,
    /// Exact optimum of each realization.
    Exact,
    /// LP relaxation with capacities scaled by `⌈1/γ⌉`.
    Lp,
}

/// Exactly one of `file` and `generator`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
}

impl InstanceSource {
    /// Loads or generates the instance; relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<Instance> {
        match (&self.file, &self.generator) {
            (Some(f), None) => Instance::from_json_file(&base.join(f)),
            (None, Some(g)) => g.generate(),
            _ => Err(Error::Config(
                "instance needs exactly one of \"file\" and \"generator\"".into(),
            )),
        }
    }
}

/// Settings for the lemma-level diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Round count `N`; defaults to `100 n`.
    #[serde(default)]
    pub rounds: Option<u64>,
    /// Trial count; defaults to the experiment's.
    #[serde(default)]
    pub trials: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be omitted when the caller supplies the instance directly.
    #[serde(default)]
    pub instance: InstanceSource,
    pub algorithm: AlgorithmParams,
    #[serde(default)]
    pub arrivals: ArrivalDistribution,
    pub trials: usize,
    pub seed: u64,
    pub oracle: OracleChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

impl ExperimentConfig {
    /// Checks everything that does not need the instance.
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.algorithm.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.arrivals.validate().map_err(|e| Error::Config(e.to_string()))?;
        let ok = matches!(
            (self.algorithm.variant, self.oracle),
            (Variant::Packing, OracleChoice::Lp)
                | (
                    Variant::Cardinality | Variant::Lengths,
                    OracleChoice::OptStar | OracleChoice::Exact
                )
        );
        if !ok {
            return Err(Error::Config(format!(
                "oracle {:?} is incompatible with the {} variant",
                self.oracle, self.algorithm.variant
            )));
        }
        Ok(())
    }

    pub fn params(&self) -> AlgorithmParams {
        AlgorithmParams {
            seed: self.seed,
            ..self.algorithm
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub alg_value: f64,
    pub opt_value: f64,
    /// Number of trace invariants broken in this trial.
    pub invariant_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialAggregate {
    pub trials: usize,
    pub mean_alg: f64,
    pub mean_opt: f64,
    pub stderr_alg: f64,
    pub stderr_opt: f64,
    /// `mean_alg / mean_opt`.
    pub ratio: f64,
    pub stderr_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Mean of per-trial ratios, over trials with a positive denominator.
    pub mean_of_ratios: f64,
    /// Trials with at least one broken trace invariant.
    pub invariant_failures: usize,
    pub oracle_method: OracleMethod,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Instance-level quantities reported next to each trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InstanceSummary {
    pub n: usize,
    pub gamma: f64,
    /// `B`: the capacity, or the capacity ratio for packing instances.
    pub capacity: f64,
    /// Sparsity; 1 without packing constraints.
    pub d: usize,
    pub epsilon: Option<Epsilon>,
}

/// A prepared experiment: the instance, its runner, and any
/// realization-independent denominator.
pub struct Experiment {
    config: ExperimentConfig,
    instance: Instance,
    runner: Runner,
    fixed_opt: Option<(f64, OracleMethod)>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig, instance: Instance) -> Result<Self> {
        config.validate()?;
        let runner = Runner::new(&instance, &config.params())?;
        let fixed_opt = match (config.oracle, config.algorithm.variant) {
            (OracleChoice::Exact, _) => None,
            (OracleChoice::Lp, _) => {
                let r = oracles::lp_relaxation_opt(runner.instance())?;
                Some((r.value, r.method))
            }
            (OracleChoice::OptStar, Variant::Lengths) => {
                let r = oracles::opt_star_lengths(&instance)?;
                Some((r.value, r.method))
            }
            (OracleChoice::OptStar, _) => {
                let r = oracles::opt_star_cardinality(&instance)?;
                Some((r.value, r.method))
            }
        };
        Ok(Self {
            config,
            instance,
            runner,
            fixed_opt,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn runner(&self) -> &Runner {
        &self.runner
    }

    pub fn instance_summary(&self) -> Result<InstanceSummary> {
        let (capacity, d) = match self.runner.instance().constraints() {
            Some(c) => (capacity_ratio(c)?, sparsity(c).max(1)),
            None => (self.instance.capacity(), 1),
        };
        Ok(InstanceSummary {
            n: self.instance.len(),
            gamma: self.instance.gamma(),
            capacity,
            d,
            epsilon: self.runner.epsilon(),
        })
    }

    pub fn bound(&self) -> Result<Bound> {
        let s = self.instance_summary()?;
        theoretical_bound(self.config.algorithm.variant, s.gamma, s.capacity, s.d)
    }

    /// Arrivals and trace of one trial.
    pub fn trace(&self, trial: usize) -> Result<(ArrivalRealization, AlgorithmTrace)> {
        let seed = self.config.seed;
        let arrivals = sample_arrivals(
            self.instance.len(),
            &self.config.arrivals,
            &mut trial_rng(seed, trial as u64, Stream::Arrivals),
        )?;
        let trace = self
            .runner
            .run(&arrivals, &mut trial_rng(seed, trial as u64, Stream::Rounding))?;
        Ok((arrivals, trace))
    }

    fn trial(&self, trial: usize) -> Result<TrialRecord> {
        let (arrivals, trace) = self.trace(trial)?;
        let opt_value = match self.fixed_opt {
            Some((v, _)) => v,
            None => oracles::opt_offline_exact(&self.instance, &arrivals)?.value,
        };
        let check = check_trace(&trace, self.runner.instance(), &arrivals);
        Ok(TrialRecord {
            trial,
            alg_value: trace.alg_value,
            opt_value,
            invariant_violations: check.violations(),
        })
    }

    /// Runs every trial on a pool of `threads` workers. Results do not depend
    /// on the thread count.
    pub fn run(&self, threads: usize) -> Result<TrialAggregate> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        let records = pool.install(|| {
            (0..self.config.trials)
                .into_par_iter()
                .map(|t| self.trial(t))
                .collect::<Result<Vec<_>>>()
        })?;
        let method = self.fixed_opt.map_or(OracleMethod::Flow, |(_, m)| m);
        Ok(aggregate(records, method))
    }

    pub fn write_trials_csv<W: Write>(&self, agg: &TrialAggregate, mut w: W) -> Result<()> {
        let s = self.instance_summary()?;
        let eps = s.epsilon.map_or(String::new(), |e| e.value.to_string());
        let variant = self.config.algorithm.variant;
        writeln!(w, "trial,alg_value,opt_value,variant,gamma,B,d,epsilon,alpha,seed")?;
        for r in &agg.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.trial,
                r.alg_value,
                r.opt_value,
                variant,
                s.gamma,
                s.capacity,
                s.d,
                eps,
                self.config.algorithm.alpha,
                self.config.seed
            )?;
        }
        Ok(())
    }

    pub fn summary(&self, agg: &TrialAggregate) -> Result<Summary> {
        let s = self.instance_summary()?;
        let bound = self.bound()?;
        Ok(Summary {
            ratio: agg.ratio,
            ci_low: agg.ci_low,
            ci_high: agg.ci_high,
            bound: bound.value,
            bound_flags: bound.flags.clone(),
            bound_theorem: bound.theorem,
            bound_leading: bound.leading,
            bound_epsilon_term: bound.epsilon_term,
            mean_alg: agg.mean_alg,
            mean_opt: agg.mean_opt,
            stderr_alg: agg.stderr_alg,
            stderr_opt: agg.stderr_opt,
            stderr_ratio: agg.stderr_ratio,
            mean_of_ratios: agg.mean_of_ratios,
            trials: agg.trials,
            invariant_failures: agg.invariant_failures,
            variant: self.config.algorithm.variant,
            oracle: agg.oracle_method,
            n: s.n,
            gamma: s.gamma,
            capacity: s.capacity,
            d: s.d,
            epsilon: s.epsilon.map(|e| e.value),
            epsilon_clamped: s.epsilon.map(|e| e.clamped),
            alpha: self.config.algorithm.alpha,
            seed: self.config.seed,
        })
    }
}

fn aggregate(records: Vec<TrialRecord>, oracle_method: OracleMethod) -> TrialAggregate {
    let alg: Vec<f64> = records.iter().map(|r| r.alg_value).collect();
    let opt: Vec<f64> = records.iter().map(|r| r.opt_value).collect();
    let est = ratio_of_means(&alg, &opt);
    let per_trial: Vec<f64> = records
        .iter()
        .filter(|r| r.opt_value > 0.0)
        .map(|r| r.alg_value / r.opt_value)
        .collect();
    TrialAggregate {
        trials: records.len(),
        mean_alg: est.mean_num,
        mean_opt: est.mean_den,
        stderr_alg: est.stderr_num,
        stderr_opt: est.stderr_den,
        ratio: est.ratio,
        stderr_ratio: est.stderr_ratio,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        mean_of_ratios: mean(&per_trial),
        invariant_failures: records.iter().filter(|r| r.invariant_violations > 0).count(),
        oracle_method,
        records,
    }
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub bound_flags: Vec<BoundFlag>,
    pub bound_theorem: Theorem,
    pub bound_leading: Option<f64>,
    pub bound_epsilon_term: Option<f64>,
    pub mean_alg: f64,
    pub mean_opt: f64,
    pub stderr_alg: f64,
    pub stderr_opt: f64,
    pub stderr_ratio: f64,
    pub mean_of_ratios: f64,
    pub trials: usize,
    pub invariant_failures: usize,
    pub variant: Variant,
    pub oracle: OracleMethod,
    pub n: usize,
    pub gamma: f64,
    pub capacity: f64,
    pub d: usize,
    pub epsilon: Option<f64>,
    pub epsilon_clamped: Option<bool>,
    pub alpha: f64,
    pub seed: u64,
}

/// Runs `config` on `instance` with `threads` workers.
pub fn run_trials(config: &ExperimentConfig, instance: &Instance, threads: usize) -> Result<TrialAggregate> {
    Experiment::new(config.clone(), instance.clone())?.run(threads)
}
