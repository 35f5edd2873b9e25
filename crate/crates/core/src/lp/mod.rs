//! Optimization kernels: the packing LP solver, fractional knapsack,
//! `GreedyRoundUp` and single-coordinate randomized rounding.

mod knapsack;
mod simplex;
pub mod vertex;

pub use knapsack::{fractional_knapsack, greedy_round_up, KnapsackSolution};

use rand::Rng;

use crate::error::{Error, Result};

/// Default absolute tolerance on feasibility and objective.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `max v·x  s.t.  A x <= b,  0 <= x_j <= 1` with nonnegative data.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingLp {
    pub objective: Vec<f64>,
    /// Dense `m x k` matrix, row-major.
    pub matrix: Vec<Vec<f64>>,
    pub capacities: Vec<f64>,
}

impl PackingLp {
    pub fn new(objective: Vec<f64>, matrix: Vec<Vec<f64>>, capacities: Vec<f64>) -> Result<Self> {
        let lp = Self {
            objective,
            matrix,
            capacities,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.objective.len();
        if self.matrix.len() != self.capacities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} matrix rows but {} capacities",
                self.matrix.len(),
                self.capacities.len()
            )));
        }
        if let Some(i) = self.matrix.iter().position(|r| r.len() != k) {
            return Err(Error::InvalidArgument(format!(
                "matrix row {i} has {} entries, expected {k}",
                self.matrix[i].len()
            )));
        }
        let nonneg = |v: &f64| v.is_finite() && *v >= 0.0;
        if !self.objective.iter().all(nonneg)
            || !self.capacities.iter().all(nonneg)
            || !self.matrix.iter().flatten().all(nonneg)
        {
            return Err(Error::InvalidArgument(
                "packing LP data must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.capacities.len()
    }

    pub fn cols(&self) -> usize {
        self.objective.len()
    }

    /// `max_i (A x - b)_i`, the worst constraint violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.matrix
            .iter()
            .zip(&self.capacities)
            .map(|(row, b)| row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// An LP solution.
#[derive(Clone, Debug, PartialEq)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Structural variables in the final basis (fractional candidates).
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl FractionalSolution {
    fn checked(lp: &PackingLp, x: Vec<f64>, basis: Vec<usize>, iterations: usize, tol: f64) -> Result<Self> {
        let scale = 1.0 + lp.capacities.iter().cloned().fold(0.0, f64::max);
        if lp.rows() > 0 && lp.max_violation(&x) > tol * scale * 10.0 {
            return Err(Error::Solver(format!(
                "solution violates a constraint by {}",
                lp.max_violation(&x)
            )));
        }
        let value = lp.objective.iter().zip(&x).map(|(v, x)| v * x).sum();
        Ok(Self {
            x,
            value,
            basis,
            iterations,
        })
    }
}

/// Solves a packing LP exactly (to `tol`).
///
/// Single-row LPs are fractional knapsacks and are solved by the density
/// greedy; everything else goes through the dense simplex. Both paths are
/// deterministic.
pub fn solve_packing_lp(lp: &PackingLp, tol: f64) -> Result<FractionalSolution> {
    lp.validate()?;
    if lp.rows() == 1 {
        solve_single_row(lp, tol)
    } else {
        simplex::solve(lp, tol)
    }
}

/// The simplex path regardless of shape.
pub fn solve_packing_lp_simplex(lp: &PackingLp, tol: f64) -> Result<FractionalSolution> {
    lp.validate()?;
    simplex::solve(lp, tol)
}

fn solve_single_row(lp: &PackingLp, tol: f64) -> Result<FractionalSolution> {
    let row = &lp.matrix[0];
    let budget = lp.capacities[0];
    // Zero-coefficient columns are free; the rest form a knapsack.
    let mut x = vec![0.0; lp.cols()];
    let mut ids = Vec::new();
    for (j, &a) in row.iter().enumerate() {
        if a > 0.0 {
            ids.push(j);
        } else {
            x[j] = 1.0;
        }
    }
    let values: Vec<f64> = ids.iter().map(|&j| lp.objective[j]).collect();
    let weights: Vec<f64> = ids.iter().map(|&j| row[j]).collect();
    let ks = fractional_knapsack(&values, &weights, budget)?;
    let mut basis = Vec::new();
    for (pos, &j) in ids.iter().enumerate() {
        x[j] = ks.x[pos];
        if ks.x[pos] > 0.0 && ks.x[pos] < 1.0 {
            basis.push(j);
        }
    }
    FractionalSolution::checked(lp, x, basis, 1, tol)
}

/// Rounds `x` to one with probability `x`. Always consumes exactly one
/// uniform draw so that random streams stay aligned across runs.
pub fn randomized_round<R: Rng + ?Sized>(x: f64, rng: &mut R) -> Result<bool> {
    if !(-DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "rounding probability {x} outside [0, 1]"
        )));
    }
    let u: f64 = rng.gen();
    Ok(u < x.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lp(v: &[f64], a: &[&[f64]], b: &[f64]) -> PackingLp {
        PackingLp::new(v.to_vec(), a.iter().map(|r| r.to_vec()).collect(), b.to_vec()).unwrap()
    }

    #[test]
    fn dominant_item_fits() {
        let p = lp(&[3.0, 2.0], &[&[1.0, 1.0]], &[1.0]);
        for s in [
            solve_packing_lp(&p, DEFAULT_TOL),
            solve_packing_lp_simplex(&p, DEFAULT_TOL),
        ] {
            let s = s.unwrap();
            assert_eq!(s.x, vec![1.0, 0.0]);
            assert!((s.value - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fractional_second_item() {
        let p = lp(&[3.0, 2.0], &[&[1.0, 1.0]], &[1.5]);
        for s in [
            solve_packing_lp(&p, DEFAULT_TOL),
            solve_packing_lp_simplex(&p, DEFAULT_TOL),
        ] {
            let s = s.unwrap();
            assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
            assert!((s.value - 4.0).abs() < 1e-12);
            let brute = vertex::enumerate(&p).unwrap();
            assert!((brute.value - s.value).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_capacity_gives_zero() {
        let p = lp(&[3.0, 2.0, 1.0], &[&[1.0, 2.0, 0.5], &[0.5, 0.1, 1.0]], &[0.0, 0.0]);
        let s = solve_packing_lp(&p, DEFAULT_TOL).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.x.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_inconsistent_dimensions() {
        let bad = PackingLp {
            objective: vec![1.0, 2.0],
            matrix: vec![vec![1.0]],
            capacities: vec![1.0],
        };
        assert!(matches!(
            solve_packing_lp(&bad, DEFAULT_TOL),
            Err(Error::InvalidArgument(_))
        ));
        assert!(PackingLp::new(vec![1.0], vec![vec![1.0]], vec![1.0, 2.0]).is_err());
        assert!(PackingLp::new(vec![1.0], vec![vec![-1.0]], vec![1.0]).is_err());
    }

    #[test]
    fn rounding_extremes_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| !randomized_round(0.0, &mut rng).unwrap()));
        assert!((0..1000).all(|_| randomized_round(1.0, &mut rng).unwrap()));
        let hits = (0..100_000)
            .filter(|_| randomized_round(0.3, &mut rng).unwrap())
            .count();
        assert!((hits as f64 / 1e5 - 0.3).abs() < 0.01);
        assert!(randomized_round(1.1, &mut rng).is_err());
        assert!(randomized_round(-0.2, &mut rng).is_err());
    }
}
