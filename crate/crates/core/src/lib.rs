//! Online algorithms for the temp secretary problem.
//!
//! Items with adversarial values arrive at independent uniformly random times
//! in `[0, 1]`. A selected item stays active for its duration, and the number
//! (or packing-constraint load) of simultaneously active items is bounded.
//! This crate provides:
//!
//! * the scaling algorithms for identical durations, packing constraints and
//!   heterogeneous durations ([`online`]),
//! * exact and relaxed offline benchmarks ([`oracles`]),
//! * the LP and knapsack kernels they share ([`lp`]),
//! * a seeded Monte Carlo harness, closed-form guarantee calculators and
//!   statistical diagnostics ([`experiments`]),
//! * the `tempsec` command-line front end ([`cli`]).

// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arrivals;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod lp;
pub mod model;
pub mod online;
pub mod oracles;
pub mod rank;

pub use error::{Error, Result};
pub use model::{ArrivalRealization, Instance, Item, PackingConstraints, ScheduleState};
