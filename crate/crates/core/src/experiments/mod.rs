//! Monte Carlo harness, guarantee calculators and lemma diagnostics.

pub mod bounds;
pub mod diagnostics;
pub mod generators;
pub mod harness;
pub mod stats;

pub use bounds::{theorem_bound, theoretical_bound, Bound, BoundFlag, Theorem};
pub use diagnostics::{
    block_feasibility_diagnostic, coupled_walk_diagnostic, packing_violation_diagnostic, BlockRow, ViolationReport,
    WalkStats,
};
pub use generators::GeneratorSpec;
pub use harness::{
    run_trials, Experiment, ExperimentConfig, InstanceSource, OracleChoice, Summary, TrialAggregate, TrialRecord,
};
