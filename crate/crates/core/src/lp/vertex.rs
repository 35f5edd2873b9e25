//! Brute-force vertex enumeration for tiny packing LPs.
//!
//! Every vertex of `{A x <= b, 0 <= x <= 1}` is the unique solution of some
//! `k` tight constraints. Enumerating all `k`-subsets of the `m + 2k`
//! constraints, solving each system, and keeping the best feasible point is
//! exponential but shares no code with the simplex, which makes it a usable
//! cross-check.

use crate::error::{Error, Result};

use super::PackingLp;

/// Largest column count accepted.
pub const MAX_COLUMNS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct VertexOptimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub vertices_checked: usize,
}

pub fn enumerate(lp: &PackingLp) -> Result<VertexOptimum> {
    lp.validate()?;
    let k = lp.cols();
    let m = lp.rows();
    if k > MAX_COLUMNS {
        return Err(Error::InvalidArgument(format!(
            "vertex enumeration limited to {MAX_COLUMNS} columns, got {k}"
        )));
    }
    // Constraint c as (coefficients, rhs) of `coef · x = rhs` when tight.
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 2 * k);
    for i in 0..m {
        cons.push((lp.matrix[i].clone(), lp.capacities[i]));
    }
    for j in 0..k {
        let mut e = vec![0.0; k];
        e[j] = 1.0;
        cons.push((e.clone(), 0.0));
        cons.push((e, 1.0));
    }

    let mut best = VertexOptimum {
        x: vec![0.0; k],
        value: 0.0,
        vertices_checked: 0,
    };
    if k == 0 {
        return Ok(best);
    }
    let feasible = |x: &[f64]| {
        x.iter().all(|&v| (-1e-9..=1.0 + 1e-9).contains(&v))
            && lp.max_violation(x) <= 1e-9 * (1.0 + lp.capacities.iter().cloned().fold(0.0, f64::max))
    };
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let a: Vec<Vec<f64>> = subset.iter().map(|&c| cons[c].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&c| cons[c].1).collect();
        if let Some(x) = solve_square(a, b) {
            best.vertices_checked += 1;
            if feasible(&x) {
                let x: Vec<f64> = x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
                let value: f64 = lp.objective.iter().zip(&x).map(|(v, x)| v * x).sum();
                if value > best.value {
                    best.value = value;
                    best.x = x;
                }
            }
        }
        if !next_combination(&mut subset, cons.len()) {
            break;
        }
    }
    Ok(best)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (off, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                b[col + 1 + off] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        let lp = PackingLp::new(vec![3.0, 2.0], vec![vec![1.0, 1.0]], vec![1.5]).unwrap();
        let v = enumerate(&lp).unwrap();
        assert!((v.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn combinations_cover_all_subsets() {
        let mut c = vec![0, 1];
        let mut count = 1;
        while next_combination(&mut c, 5) {
            count += 1;
        }
        assert_eq!(count, 10);
    }
}
