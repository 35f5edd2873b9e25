//! Arrival-time sampling and seeded random streams.
//!
//! Arrival times are i.i.d. draws from a distribution on `[0, 1]`: uniform, or
//! a general `F` given by a piecewise-linear inverse CDF. Sampling a general
//! `F` draws `u ~ U[0, 1]` and returns `F^{-1}(u)`, so the same seed yields
//! the same underlying uniforms for every distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ArrivalRealization;

/// Arrival-time distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ArrivalDistribution {
    Uniform {},
    /// Breakpoints `(u, F^{-1}(u))`, strictly increasing in both coordinates,
    /// from `(0, 0)` to `(1, 1)`.
    General {
        inverse_cdf: Vec<(f64, f64)>,
    },
}

impl Default for ArrivalDistribution {
    fn default() -> Self {
        Self::Uniform {}
    }
}

impl ArrivalDistribution {
    pub fn general(inverse_cdf: Vec<(f64, f64)>) -> Result<Self> {
        let d = Self::General { inverse_cdf };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let Self::General { inverse_cdf: table } = self else {
            return Ok(());
        };
        if table.len() < 2 {
            return Err(Error::InvalidArgument(
                "inverse_cdf table needs at least two breakpoints".into(),
            ));
        }
        if table[0] != (0.0, 0.0) || table[table.len() - 1] != (1.0, 1.0) {
            return Err(Error::InvalidArgument(
                "inverse_cdf table must start at (0, 0) and end at (1, 1)".into(),
            ));
        }
        for w in table.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::InvalidArgument(format!(
                    "inverse_cdf table not strictly increasing at {:?} -> {:?}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    /// `F^{-1}(u)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match self {
            Self::Uniform {} => u,
            Self::General { inverse_cdf } => interpolate(inverse_cdf, u, |p| p.0, |p| p.1),
        }
    }

    /// `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform {} => x.clamp(0.0, 1.0),
            Self::General { inverse_cdf } => interpolate(inverse_cdf, x, |p| p.1, |p| p.0),
        }
    }
}

fn interpolate(
    table: &[(f64, f64)],
    at: f64,
    key: impl Fn(&(f64, f64)) -> f64,
    val: impl Fn(&(f64, f64)) -> f64,
) -> f64 {
    let at = at.clamp(0.0, 1.0);
    // first breakpoint with key >= at
    let hi = table.partition_point(|p| key(p) < at).max(1).min(table.len() - 1);
    let (a, b) = (&table[hi - 1], &table[hi]);
    let w = (at - key(a)) / (key(b) - key(a));
    (val(a) + w * (val(b) - val(a))).clamp(0.0, 1.0)
}

/// Draws `n` i.i.d. arrival times from `dist`.
pub fn sample_arrivals<R: Rng + ?Sized>(
    n: usize,
    dist: &ArrivalDistribution,
    rng: &mut R,
) -> Result<ArrivalRealization> {
    dist.validate()?;
    let times = (0..n).map(|_| dist.inverse_cdf(rng.gen::<f64>())).collect();
    ArrivalRealization::from_times(times)
}

/// [`sample_arrivals`] with a dedicated generator seeded from `seed`.
pub fn sample_arrivals_seeded(n: usize, dist: &ArrivalDistribution, seed: u64) -> Result<ArrivalRealization> {
    sample_arrivals(n, dist, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Maps arrival times through `F`, giving uniform-distributed quantiles.
pub fn quantile_transform(dist: &ArrivalDistribution, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| dist.cdf(t)).collect()
}

/// `sup_{θ in [0, 1-α]} F(θ + α) - F(θ)`: the largest probability mass any
/// window of length `alpha` carries.
///
/// `F` is piecewise linear, so the supremum is attained where `θ` or
/// `θ + α` sits on a breakpoint (or at an end of the range).
pub fn quantile_gamma_bound(dist: &ArrivalDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} not in (0, 1]")));
    }
    dist.validate()?;
    let table = match dist {
        ArrivalDistribution::Uniform {} => return Ok(alpha),
        ArrivalDistribution::General { inverse_cdf } => inverse_cdf,
    };
    let hi = 1.0 - alpha;
    let mut best = 0.0f64;
    let mut eval = |theta: f64| {
        if (0.0..=hi).contains(&theta) {
            best = best.max(dist.cdf(theta + alpha) - dist.cdf(theta));
        }
    };
    eval(0.0);
    eval(hi);
    for &(_, x) in table {
        eval(x);
        eval(x - alpha);
    }
    Ok(best)
}

/// Purposes for which a trial draws an independent random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Arrivals = 0,
    Rounding = 1,
    Diagnostic = 2,
    /// Instance generation; used with trial 0 only.
    Instance = 3,
}

/// Generator for `(master seed, trial, purpose)`. Streams never overlap, so
/// trials can run on any thread in any order.
pub fn trial_rng(master_seed: u64, trial: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial.wrapping_mul(4).wrapping_add(stream as u64));
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-sided Kolmogorov–Smirnov distance of a sample to U[0, 1].
    fn ks_uniform(sample: &[f64]) -> f64 {
        let mut s = sample.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        s.iter()
            .enumerate()
            .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
            .fold(0.0, f64::max)
    }

    #[test]
    fn empty_sample() {
        let r = sample_arrivals_seeded(0, &ArrivalDistribution::Uniform {}, 1).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn uniform_sample_passes_ks() {
        let r = sample_arrivals_seeded(100_000, &ArrivalDistribution::Uniform {}, 42).unwrap();
        assert!(ks_uniform(r.times()) < 0.01);
    }

    #[test]
    fn identity_table_matches_uniform() {
        let id = ArrivalDistribution::general(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let a = sample_arrivals_seeded(1000, &ArrivalDistribution::Uniform {}, 9).unwrap();
        let b = sample_arrivals_seeded(1000, &id, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn deterministic_given_seed() {
        let d = ArrivalDistribution::general(vec![(0.0, 0.0), (0.7, 0.2), (1.0, 1.0)]).unwrap();
        assert_eq!(
            sample_arrivals_seeded(500, &d, 3).unwrap(),
            sample_arrivals_seeded(500, &d, 3).unwrap()
        );
    }

    #[test]
    fn general_quantiles_are_uniform() {
        let d = ArrivalDistribution::general(vec![(0.0, 0.0), (0.5, 0.1), (0.9, 0.6), (1.0, 1.0)]).unwrap();
        let r = sample_arrivals_seeded(100_000, &d, 11).unwrap();
        let q = quantile_transform(&d, r.times());
        // critical value at level 1e-3 is about 1.95 / sqrt(n)
        assert!(ks_uniform(&q) < 1.95 / (100_000f64).sqrt());
    }

    #[test]
    fn malformed_tables_rejected() {
        assert!(ArrivalDistribution::general(vec![(0.0, 0.0)]).is_err());
        assert!(ArrivalDistribution::general(vec![(0.0, 0.0), (0.5, 0.5), (0.5, 0.7), (1.0, 1.0)]).is_err());
        assert!(ArrivalDistribution::general(vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        let bad = ArrivalDistribution::General {
            inverse_cdf: vec![(0.0, 0.0), (1.0, 0.9)],
        };
        assert!(sample_arrivals_seeded(3, &bad, 0).is_err());
    }

    #[test]
    fn gamma_bound_uniform_and_full_window() {
        assert_eq!(
            quantile_gamma_bound(&ArrivalDistribution::Uniform {}, 0.05).unwrap(),
            0.05
        );
        let d = ArrivalDistribution::general(vec![(0.0, 0.0), (0.3, 0.5), (1.0, 1.0)]).unwrap();
        assert!((quantile_gamma_bound(&d, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(quantile_gamma_bound(&d, 0.0).is_err());
    }

    /// Independent grid search over θ at step 1e-4.
    fn grid_sup(d: &ArrivalDistribution, alpha: f64) -> f64 {
        let steps = ((1.0 - alpha) / 1e-4).round() as usize;
        (0..=steps)
            .map(|k| {
                let th = k as f64 * 1e-4;
                d.cdf(th + alpha) - d.cdf(th)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gamma_bound_dense_half() {
        // Nearly all mass on [0, 0.5): density ~2 there.
        let dense = ArrivalDistribution::general(vec![(0.0, 0.0), (0.99, 0.495), (1.0, 1.0)]).unwrap();
        let got = quantile_gamma_bound(&dense, 0.1).unwrap();
        assert!((got - grid_sup(&dense, 0.1)).abs() < 1e-9);
        assert!((got - 0.2).abs() < 1e-9);

        // Density on [0, 0.5] twice the density on [0.5, 1]: F(0.5) = 2/3.
        let twice = ArrivalDistribution::general(vec![(0.0, 0.0), (2.0 / 3.0, 0.5), (1.0, 1.0)]).unwrap();
        let got = quantile_gamma_bound(&twice, 0.1).unwrap();
        assert!((got - grid_sup(&twice, 0.1)).abs() < 1e-9);
        assert!((got - 0.4 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn trial_streams_are_distinct() {
        let mut a = trial_rng(5, 0, Stream::Arrivals);
        let mut b = trial_rng(5, 0, Stream::Rounding);
        let mut c = trial_rng(5, 1, Stream::Arrivals);
        let (x, y, z): (u64, u64, u64) = (a.gen(), b.gen(), c.gen());
        assert!(x != y && x != z && y != z);
        assert_eq!(x, trial_rng(5, 0, Stream::Arrivals).gen::<u64>());
    }
}
