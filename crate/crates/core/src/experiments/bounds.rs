//! Closed-form competitive-ratio guarantees.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::online::{epsilon_default, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Identical durations, any `B`.
    SmallCapacity,
    /// Identical durations, large `B`.
    LargeCapacity,
    /// Packing constraints.
    Packing,
    /// Heterogeneous durations.
    Lengths,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFlag {
    /// The bound is below zero and says nothing.
    Vacuous,
    /// A lower-order `O(1/B)` term is dropped.
    Asymptotic,
    /// The hidden constant in front of the error term is taken as one.
    ConstantFree,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub theorem: Theorem,
    pub value: f64,
    /// `1/(1+γ)` for the packing guarantee.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leading: Option<f64>,
    /// `√(6(1 + ln d + ln B)/B)` for the packing guarantee.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_term: Option<f64>,
    pub flags: Vec<BoundFlag>,
}

fn check(gamma: f64, b: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} not in (0, 1]")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("capacity {b} must be positive")));
    }
    Ok(())
}

fn finish(theorem: Theorem, value: f64, mut flags: Vec<BoundFlag>) -> Bound {
    if value < 0.0 {
        flags.insert(0, BoundFlag::Vacuous);
    }
    Bound {
        theorem,
        value,
        leading: None,
        epsilon_term: None,
        flags,
    }
}

/// Guarantee of one theorem. `d` is only used by the packing guarantee.
pub fn theorem_bound(theorem: Theorem, gamma: f64, b: f64, d: usize) -> Result<Bound> {
    check(gamma, b)?;
    let sg = gamma.sqrt();
    let sgb = (gamma / b).sqrt();
    Ok(match theorem {
        Theorem::SmallCapacity => finish(theorem, 0.5 * (1.0 - 3.5 * sg - 18.5 * sgb - gamma), vec![]),
        Theorem::LargeCapacity => finish(
            theorem,
            1.0 - 4.0 / b.sqrt() - 20.5 * sgb - 3.0 * gamma,
            vec![BoundFlag::Asymptotic],
        ),
        Theorem::Lengths => finish(theorem, 0.25 - 5.0 * sg - 1.5 * gamma * (1.0 / sg).ln(), vec![]),
        Theorem::Packing => {
            let leading = 1.0 / (1.0 + gamma);
            let eps = epsilon_default(d, b)?.raw;
            let mut bound = finish(theorem, leading - eps, vec![BoundFlag::ConstantFree]);
            bound.leading = Some(leading);
            bound.epsilon_term = Some(eps);
            bound
        }
    })
}

/// The guarantee matching a variant. For identical durations both the
/// small- and large-capacity guarantees apply; the larger is returned.
pub fn theoretical_bound(variant: Variant, gamma: f64, b: f64, d: usize) -> Result<Bound> {
    match variant {
        Variant::Cardinality => {
            let small = theorem_bound(Theorem::SmallCapacity, gamma, b, d)?;
            let large = theorem_bound(Theorem::LargeCapacity, gamma, b, d)?;
            Ok(if large.value > small.value { large } else { small })
        }
        Variant::Packing => theorem_bound(Theorem::Packing, gamma, b, d),
        Variant::Lengths => theorem_bound(Theorem::Lengths, gamma, b, d),
    }
}

/// Per-block lower bound on the feasible fraction of tentative selections,
/// `1/2 − √γ − 1/(4√γN)` for `N` rounds.
pub fn block_feasibility_bound(gamma: f64, rounds: f64) -> f64 {
    0.5 - gamma.sqrt() - 1.0 / (4.0 * gamma.sqrt() * rounds)
}
