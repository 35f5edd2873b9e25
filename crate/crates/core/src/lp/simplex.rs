//! Dense bounded-variable primal simplex for packing LPs
//! `max v·x  s.t.  A x <= b,  0 <= x <= 1` with `A, b, v >= 0`.
//!
//! Slack columns form the starting basis; `x = 0` is feasible, so no phase 1
//! is required. Upper bounds on the structural variables are handled by bound
//! flips instead of extra rows. Pricing is Dantzig's largest reduced cost;
//! after a run of degenerate pivots the solver switches to Bland's rule for
//! the rest of the solve, which rules out cycling.

use crate::error::{Error, Result};

use super::{FractionalSolution, PackingLp};

const DEGENERATE_RUN_BEFORE_BLAND: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

pub(crate) fn solve(lp: &PackingLp, tol: f64) -> Result<FractionalSolution> {
    let m = lp.rows();
    let k = lp.cols();
    let total = k + m;
    let upper = |var: usize| if var < k { 1.0 } else { f64::INFINITY };

    // tableau rows: B^{-1} [A | I]
    let mut tab: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(total);
            row.extend_from_slice(&lp.matrix[i]);
            row.extend((0..m).map(|s| if s == i { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    let mut reduced: Vec<f64> = lp.objective.iter().copied().chain((0..m).map(|_| 0.0)).collect();
    let mut value = vec![0.0; total];
    value[k..total].copy_from_slice(&lp.capacities);
    let mut basis: Vec<usize> = (k..total).collect();
    let mut status = vec![Status::AtLower; total];
    for &b in &basis {
        status[b] = Status::Basic;
    }

    let max_iter = 50 * (total + 10) + 1000;
    let mut degenerate_run = 0usize;
    let mut bland = false;
    let mut iterations = 0usize;

    loop {
        if iterations >= max_iter {
            return Err(Error::Solver(format!(
                "iteration limit {max_iter} reached ({m} rows, {k} columns)"
            )));
        }
        iterations += 1;

        // pricing
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..total {
            let score = match status[j] {
                Status::AtLower if reduced[j] > tol => reduced[j],
                Status::AtUpper if reduced[j] < -tol => -reduced[j],
                _ => continue,
            };
            if bland {
                entering = Some((j, score));
                break;
            }
            if entering.is_none_or(|(_, best)| score > best) {
                entering = Some((j, score));
            }
        }
        let Some((enter, _)) = entering else { break };
        let dir = if status[enter] == Status::AtLower { 1.0 } else { -1.0 };

        // ratio test; leaving row and whether it leaves at its upper bound
        let mut step = upper(enter);
        let mut leave: Option<(usize, bool)> = None;
        for i in 0..m {
            let rate = dir * tab[i][enter];
            let var = basis[i];
            let (limit, to_upper) = if rate > tol {
                ((value[var] / rate).max(0.0), false)
            } else if rate < -tol && upper(var).is_finite() {
                (((upper(var) - value[var]) / -rate).max(0.0), true)
            } else {
                continue;
            };
            let take = if (limit - step).abs() <= tol {
                // tie: a blocking row beats the bound flip; Bland prefers the
                // smallest leaving index
                match leave {
                    None => true,
                    Some((r, _)) => {
                        if bland {
                            var < basis[r]
                        } else {
                            limit < step
                        }
                    }
                }
            } else {
                limit < step
            };
            if take {
                step = limit;
                leave = Some((i, to_upper));
            }
        }
        if step.is_infinite() {
            return Err(Error::Solver("unbounded direction in a packing LP".into()));
        }

        if step <= tol {
            degenerate_run += 1;
            if degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }

        for i in 0..m {
            let var = basis[i];
            value[var] -= dir * step * tab[i][enter];
        }
        value[enter] += dir * step;

        match leave {
            None => {
                // bound flip
                status[enter] = if dir > 0.0 { Status::AtUpper } else { Status::AtLower };
                value[enter] = if dir > 0.0 { 1.0 } else { 0.0 };
            }
            Some((r, to_upper)) => {
                let out = basis[r];
                value[out] = if to_upper { upper(out) } else { 0.0 };
                status[out] = if to_upper { Status::AtUpper } else { Status::AtLower };
                status[enter] = Status::Basic;
                basis[r] = enter;

                let pivot = tab[r][enter];
                for v in tab[r].iter_mut() {
                    *v /= pivot;
                }
                let pivot_row = tab[r].clone();
                for (i, row) in tab.iter_mut().enumerate() {
                    if i == r {
                        continue;
                    }
                    let f = row[enter];
                    if f != 0.0 {
                        for (a, p) in row.iter_mut().zip(&pivot_row) {
                            *a -= f * p;
                        }
                        row[enter] = 0.0;
                    }
                }
                let f = reduced[enter];
                for (a, p) in reduced.iter_mut().zip(&pivot_row) {
                    *a -= f * p;
                }
                reduced[enter] = 0.0;
            }
        }
    }

    let x: Vec<f64> = value[..k].iter().map(|v| v.clamp(0.0, 1.0)).collect();
    FractionalSolution::checked(lp, x, basis.into_iter().filter(|&v| v < k).collect(), iterations, tol)
}
