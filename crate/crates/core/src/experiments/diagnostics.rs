//! Direct Monte Carlo checks of the lemma-level quantities behind the
//! guarantees: per-block feasibility of tentative selections, the coupled
//! random walk, and constraint violations of the tentative packing load.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrivals::{sample_arrivals, trial_rng, ArrivalDistribution, Stream};
use crate::error::{Error, Result};
use crate::model::{capacity_ratio, sparsity, Instance};
use crate::online::{CardinalityRunner, Epsilon, PackingRunner};

use super::bounds::block_feasibility_bound;
use super::stats::{mean, stderr};

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// One `√γ`-block of the feasibility table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockRow {
    pub block: usize,
    pub start: f64,
    pub end: f64,
    pub tentative: u64,
    pub tentative_feasible: u64,
    /// `tentative_feasible / tentative`; NaN without tentative events.
    pub ratio: f64,
    pub bound: f64,
    /// Blocks starting before `2√(γ/B)`, where the bound is not claimed.
    pub excluded: bool,
}

/// Fraction of tentative selections that were feasible, per block of length
/// `√γ`, pooled over `trials` realizations. `rounds` is the discretization
/// `N` entering the bound.
pub fn block_feasibility_diagnostic(
    instance: &Instance,
    arrivals: &ArrivalDistribution,
    trials: usize,
    seed: u64,
    rounds: f64,
    threads: usize,
) -> Result<Vec<BlockRow>> {
    let runner = CardinalityRunner::new(instance)?;
    let gamma = instance.gamma();
    let b = instance.capacity();
    let width = gamma.sqrt();
    let rows = ((1.0 / width + 1e-9).floor() as usize).max(1);
    let counts = pool(threads)?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let real = sample_arrivals(
                    instance.len(),
                    arrivals,
                    &mut trial_rng(seed, trial as u64, Stream::Arrivals),
                )?;
                let trace = runner.run(&real)?;
                let mut c = vec![(0u64, 0u64); rows];
                for r in trace.records.iter().filter(|r| r.tentative) {
                    let block = ((r.time / width) as usize).min(rows - 1);
                    c[block].0 += 1;
                    c[block].1 += r.feasible as u64;
                }
                Ok(c)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let bound = block_feasibility_bound(gamma, rounds);
    let threshold = 2.0 * (gamma / b).sqrt();
    Ok((0..rows)
        .map(|k| {
            let (tentative, feasible) = counts.iter().fold((0, 0), |acc, c| (acc.0 + c[k].0, acc.1 + c[k].1));
            let start = k as f64 * width;
            BlockRow {
                block: k,
                start,
                end: if k + 1 == rows { 1.0 } else { start + width },
                tentative,
                tentative_feasible: feasible,
                ratio: if tentative > 0 {
                    feasible as f64 / tentative as f64
                } else {
                    f64::NAN
                },
                bound,
                excluded: start < threshold,
            }
        })
        .collect())
}

/// Statistics of the coupled walk quantity `Q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkStats {
    pub capacity: u64,
    pub window: u64,
    pub trials: usize,
    pub mean_q: f64,
    pub stderr_q: f64,
    /// `4√B`.
    pub bound: f64,
    /// `√B + π²/6 √B + 2√(4B/3π)`, before the additive constant.
    pub lemma_bound: f64,
    #[serde(skip)]
    pub q: Vec<f64>,
}

/// Sorted positions of ones in `len` i.i.d. Bernoulli(`p`) draws, sampled by
/// geometric skipping.
pub fn bernoulli_ones<R: Rng + ?Sized>(rng: &mut R, len: u64, p: f64) -> Vec<u64> {
    if p >= 1.0 {
        return (0..len).collect();
    }
    if p <= 0.0 {
        return Vec::new();
    }
    let log_q = (1.0 - p).ln();
    let mut ones = Vec::new();
    let mut pos = 0u64;
    loop {
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_q).floor();
        if skip >= (len - pos) as f64 {
            break;
        }
        pos += skip as u64;
        ones.push(pos);
        pos += 1;
        if pos >= len {
            break;
        }
    }
    ones
}

/// `max_k (cur[..=k] − prev[..=k]) + |Σ prev − B|` from the positions of
/// ones in the previous and current windows.
pub fn walk_q(prev: &[u64], cur: &[u64], window: u64, capacity: u64) -> f64 {
    let deviation = (prev.len() as f64 - capacity as f64).abs();
    if window == 0 {
        return deviation;
    }
    let (mut i, mut j) = (0, 0);
    let mut level = 0i64;
    let first = prev
        .first()
        .copied()
        .unwrap_or(u64::MAX)
        .min(cur.first().copied().unwrap_or(u64::MAX));
    let mut best = if first > 0 { 0 } else { i64::MIN };
    while i < prev.len() || j < cur.len() {
        let at = prev
            .get(i)
            .copied()
            .unwrap_or(u64::MAX)
            .min(cur.get(j).copied().unwrap_or(u64::MAX));
        while i < prev.len() && prev[i] == at {
            level -= 1;
            i += 1;
        }
        while j < cur.len() && cur[j] == at {
            level += 1;
            j += 1;
        }
        best = best.max(level);
    }
    best as f64 + deviation
}

/// Simulates `Q` for i.i.d. Bernoulli(`B/(γN)`) indicators over two
/// consecutive windows of `γN` rounds, once per trial.
pub fn coupled_walk_diagnostic(capacity: u64, gamma: f64, rounds: f64, trials: usize, seed: u64) -> Result<WalkStats> {
    let window_f = gamma * rounds;
    let window = window_f.round();
    if !(window >= 1.0) || (window_f - window).abs() > 1e-6 * window.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma * N = {window_f} must be a positive integer"
        )));
    }
    let window = window as u64;
    if capacity > window {
        return Err(Error::InvalidArgument(format!(
            "B = {capacity} exceeds gamma * N = {window}"
        )));
    }
    let p = capacity as f64 / window as f64;
    let q: Vec<f64> = (0..trials)
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64, Stream::Diagnostic);
            let prev = bernoulli_ones(&mut rng, window, p);
            let cur = bernoulli_ones(&mut rng, window, p);
            walk_q(&prev, &cur, window, capacity)
        })
        .collect();
    let b = capacity as f64;
    Ok(WalkStats {
        capacity,
        window,
        trials,
        mean_q: mean(&q),
        stderr_q: stderr(&q),
        bound: 4.0 * b.sqrt(),
        lemma_bound: b.sqrt() + PI * PI / 6.0 * b.sqrt() + 2.0 * (4.0 * b / (3.0 * PI)).sqrt(),
        q,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowViolation {
    pub row: usize,
    /// Arrivals of items with a nonzero coefficient in this row.
    pub pairs: u64,
    pub violations: u64,
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolationReport {
    pub rows: Vec<RowViolation>,
    pub max_rate: f64,
    /// Binomial standard error of the row attaining `max_rate`.
    pub max_rate_stderr: f64,
    /// `1/(dB)`.
    pub bound: f64,
    pub tentative: u64,
    pub selected: u64,
    /// `selected / tentative`.
    pub commit_ratio: f64,
    /// `1 − 1/B`.
    pub commit_bound: f64,
    pub d: usize,
    pub capacity_ratio: f64,
    pub epsilon: Epsilon,
}

/// At each arrival, checks every row the arriving item uses: does the
/// tentative consumption of the arrivals in `[t − γ, t)` exceed `b_i − 1`?
pub fn packing_violation_diagnostic(
    instance: &Instance,
    epsilon: Option<f64>,
    arrivals: &ArrivalDistribution,
    trials: usize,
    seed: u64,
    threads: usize,
) -> Result<ViolationReport> {
    let runner = PackingRunner::new(instance, epsilon)?;
    let eps = runner.epsilon();
    if eps.value > 0.5 {
        return Err(Error::InvalidArgument("epsilon above 1/2".into()));
    }
    let inst = runner.instance();
    let c = inst.constraints().expect("packing runner holds constraints");
    let m = c.rows();
    let gamma = inst.gamma();
    let per_trial = pool(threads)?.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let real = sample_arrivals(
                    inst.len(),
                    arrivals,
                    &mut trial_rng(seed, trial as u64, Stream::Arrivals),
                )?;
                let trace = runner.run(&real, &mut trial_rng(seed, trial as u64, Stream::Rounding))?;
                let mut pairs = vec![0u64; m];
                let mut hits = vec![0u64; m];
                let mut load = vec![0.0f64; m];
                let mut window: VecDeque<(f64, usize)> = VecDeque::new();
                let (mut tentative, mut selected) = (0u64, 0u64);
                for r in &trace.records {
                    while let Some(&(t0, j0)) = window.front() {
                        if t0 >= r.time - gamma {
                            break;
                        }
                        window.pop_front();
                        for &(row, a) in c.column(j0) {
                            load[row] -= a;
                        }
                    }
                    if window.is_empty() {
                        load.iter_mut().for_each(|l| *l = 0.0);
                    }
                    for &(row, _) in c.column(r.item) {
                        pairs[row] += 1;
                        hits[row] += (load[row] > c.capacities()[row] - 1.0) as u64;
                    }
                    if r.tentative {
                        tentative += 1;
                        selected += r.selected as u64;
                        window.push_back((r.time, r.item));
                        for &(row, a) in c.column(r.item) {
                            load[row] += a;
                        }
                    }
                }
                Ok((pairs, hits, tentative, selected))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut rows: Vec<RowViolation> = (0..m)
        .map(|row| RowViolation {
            row,
            pairs: 0,
            violations: 0,
            rate: 0.0,
            stderr: 0.0,
        })
        .collect();
    let (mut tentative, mut selected) = (0u64, 0u64);
    for (pairs, hits, t, s) in per_trial {
        for row in 0..m {
            rows[row].pairs += pairs[row];
            rows[row].violations += hits[row];
        }
        tentative += t;
        selected += s;
    }
    for r in &mut rows {
        if r.pairs > 0 {
            r.rate = r.violations as f64 / r.pairs as f64;
            r.stderr = (r.rate * (1.0 - r.rate) / r.pairs as f64).sqrt();
        }
    }
    let worst = rows
        .iter()
        .max_by(|a, b| a.rate.total_cmp(&b.rate).then(b.row.cmp(&a.row)))
        .cloned();
    let d = sparsity(c).max(1);
    let b = capacity_ratio(c)?;
    Ok(ViolationReport {
        max_rate: worst.as_ref().map_or(0.0, |w| w.rate),
        max_rate_stderr: worst.as_ref().map_or(0.0, |w| w.stderr),
        rows,
        bound: 1.0 / (d as f64 * b),
        tentative,
        selected,
        commit_ratio: if tentative > 0 {
            selected as f64 / tentative as f64
        } else {
            f64::NAN
        },
        commit_bound: 1.0 - 1.0 / b,
        d,
        capacity_ratio: b,
        epsilon: eps,
    })
}
