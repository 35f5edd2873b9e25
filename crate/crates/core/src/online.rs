//! The three scaling algorithms.
//!
//! Each runner is prepared once per instance (global value or density ranks
//! are realization independent) and then run on any number of arrival
//! realizations. At every arrival the runner decides whether the item is
//! tentatively selected by the offline rule restricted to the arrived items
//! and a budget that grows linearly in time, then commits it if the running
//! schedule has room.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, PackingLp};
use crate::model::{
    capacity_ratio, normalize_constraints, sparsity, ArrivalRealization, Instance, PackingConstraints, ScheduleState,
    FEASIBILITY_TOL,
};
use crate::rank::{CountFenwick, Fenwick, Ranking};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Cardinality,
    Packing,
    Lengths,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Cardinality => "cardinality",
            Variant::Packing => "packing",
            Variant::Lengths => "lengths",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmParams {
    pub variant: Variant,
    /// Budget scaling for the lengths variant.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Capacity shrink for the packing variant; `None` uses [`epsilon_default`].
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Master seed; configs carry it at the top level.
    #[serde(skip)]
    pub seed: u64,
}

fn default_alpha() -> f64 {
    0.5
}

impl AlgorithmParams {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            alpha: default_alpha(),
            epsilon: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if let Some(e) = self.epsilon {
            if !(0.0..=0.5).contains(&e) {
                return Err(Error::InvalidArgument(format!("epsilon {e} outside [0, 1/2]")));
            }
        }
        Ok(())
    }
}

/// Shrink factor for the packing variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Epsilon {
    pub value: f64,
    /// The formula before clamping.
    pub raw: f64,
    /// Set when the formula exceeded 1/2; the guarantee is vacuous there.
    pub clamped: bool,
}

/// `√(6(1 + ln d + ln B)/B)`, clamped to 1/2.
pub fn epsilon_default(d: usize, b: f64) -> Result<Epsilon> {
    if d < 1 {
        return Err(Error::InvalidArgument("sparsity d must be at least 1".into()));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!("capacity ratio {b} must be positive")));
    }
    let raw = (6.0 * (1.0 + (d as f64).ln() + b.ln()) / b).max(0.0).sqrt();
    Ok(Epsilon {
        value: raw.min(0.5),
        raw,
        clamped: raw > 0.5,
    })
}

/// One arrival as seen by a runner.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub item: usize,
    pub time: f64,
    pub tentative: bool,
    /// Whether the item fit the committed schedule at its arrival.
    pub feasible: bool,
    pub selected: bool,
    /// Tentative-set size (cardinality, lengths) or LP value (packing).
    pub aux: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmTrace {
    pub variant: Variant,
    pub records: Vec<TraceRecord>,
    pub alg_value: f64,
    /// Shrink factor used (packing only).
    pub epsilon: Option<Epsilon>,
}

impl AlgorithmTrace {
    pub fn selected_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.records.iter().filter(|r| r.selected).map(|r| r.item).collect();
        ids.sort_unstable();
        ids
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "item_id,t,tentative,feasible,selected,aux_value")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.item, r.time, r.tentative as u8, r.feasible as u8, r.selected as u8, r.aux
            )?;
        }
        Ok(())
    }
}

/// `⌊x⌋`, robust to `x` landing a hair below an integer.
fn floor_robust(x: f64) -> f64 {
    (x + 1e-9).floor()
}

fn require_uniform(instance: &Instance, variant: Variant) -> Result<()> {
    if !instance.has_uniform_durations() {
        return Err(Error::InvalidInstance(format!(
            "{variant} variant needs all durations equal to gamma; use the lengths variant"
        )));
    }
    Ok(())
}

fn require_no_constraints(instance: &Instance, variant: Variant) -> Result<()> {
    if instance.constraints().is_some() {
        return Err(Error::InvalidInstance(format!(
            "{variant} variant takes no packing constraints"
        )));
    }
    Ok(())
}

fn check_arrivals(instance: &Instance, arrivals: &ArrivalRealization) -> Result<()> {
    if arrivals.len() != instance.len() {
        return Err(Error::InvalidArgument(format!(
            "{} arrival times for {} items",
            arrivals.len(),
            instance.len()
        )));
    }
    Ok(())
}

/// Algorithm for identical durations `γ` and capacity `B`: tentative iff
/// among the `⌊tB/γ⌋` best arrived values.
#[derive(Clone, Debug)]
pub struct CardinalityRunner {
    instance: Instance,
    ranking: Ranking,
    capacity: usize,
}

impl CardinalityRunner {
    pub fn new(instance: &Instance) -> Result<Self> {
        require_no_constraints(instance, Variant::Cardinality)?;
        require_uniform(instance, Variant::Cardinality)?;
        let capacity = instance.cardinality_capacity()?;
        Ok(Self {
            ranking: Ranking::descending(&instance.values()),
            instance: instance.clone(),
            capacity,
        })
    }

    pub fn run(&self, arrivals: &ArrivalRealization) -> Result<AlgorithmTrace> {
        let inst = &self.instance;
        check_arrivals(inst, arrivals)?;
        let per_time = self.capacity as f64 / inst.gamma();
        let mut arrived = CountFenwick::new(inst.len());
        let mut state = ScheduleState::cardinality(self.capacity);
        let mut records = Vec::with_capacity(inst.len());
        let mut alg_value = 0.0;
        for (seen, &j) in arrivals.order().iter().enumerate() {
            let t = arrivals.times()[j];
            let item = &inst.items()[j];
            let rank = self.ranking.rank_of(j);
            arrived.insert(rank);
            let k = floor_robust(t * per_time) as usize;
            // Arrived items strictly better than j.
            let better = arrived.count_below(rank);
            let tentative = better < k;
            let feasible = state.is_feasible_now(t, item, inst)?;
            let selected = tentative && feasible;
            if selected {
                state.select(t, item, inst)?;
                alg_value += item.value;
            }
            records.push(TraceRecord {
                item: j,
                time: t,
                tentative,
                feasible,
                selected,
                aux: k.min(seen + 1) as f64,
            });
        }
        Ok(AlgorithmTrace {
            variant: Variant::Cardinality,
            records,
            alg_value,
            epsilon: None,
        })
    }
}

/// Algorithm for heterogeneous durations: tentative iff in the
/// `GreedyRoundUp` prefix of the arrived items for budget `αtB`.
#[derive(Clone, Debug)]
pub struct LengthsRunner {
    instance: Instance,
    ranking: Ranking,
    capacity: usize,
    alpha: f64,
}

impl LengthsRunner {
    pub fn new(instance: &Instance, alpha: f64) -> Result<Self> {
        require_no_constraints(instance, Variant::Lengths)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1]")));
        }
        if let Some(it) = instance.items().iter().find(|it| it.duration > instance.gamma()) {
            return Err(Error::InvalidInstance(format!(
                "item {} has duration {} above gamma {}",
                it.id,
                it.duration,
                instance.gamma()
            )));
        }
        let capacity = instance.cardinality_capacity()?;
        let density: Vec<f64> = instance.items().iter().map(|it| it.value / it.duration).collect();
        Ok(Self {
            ranking: Ranking::descending(&density),
            instance: instance.clone(),
            capacity,
            alpha,
        })
    }

    pub fn run(&self, arrivals: &ArrivalRealization) -> Result<AlgorithmTrace> {
        let inst = &self.instance;
        check_arrivals(inst, arrivals)?;
        let n = inst.len();
        let mut durations = Fenwick::new(n);
        let mut arrived = CountFenwick::new(n);
        let mut state = ScheduleState::cardinality(self.capacity);
        let mut records = Vec::with_capacity(n);
        let mut alg_value = 0.0;
        let b = self.capacity as f64;
        for &j in arrivals.order() {
            let t = arrivals.times()[j];
            let item = &inst.items()[j];
            let rank = self.ranking.rank_of(j);
            durations.add(rank, item.duration);
            arrived.insert(rank);
            let budget = self.alpha * t * b;
            // An item belongs to the round-up prefix iff the durations ahead
            // of it in density order fall short of the budget.
            let tentative = budget > 0.0 && durations.prefix(rank) < budget;
            let size = if budget > 0.0 {
                let cut = durations.max_prefix_below(budget);
                let tail = arrived.count_below(n) > arrived.count_below(cut);
                arrived.count_below(cut) + tail as usize
            } else {
                0
            };
            let feasible = state.is_feasible_now(t, item, inst)?;
            let selected = tentative && feasible;
            if selected {
                state.select(t, item, inst)?;
                alg_value += item.value;
            }
            records.push(TraceRecord {
                item: j,
                time: t,
                tentative,
                feasible,
                selected,
                aux: size as f64,
            });
        }
        Ok(AlgorithmTrace {
            variant: Variant::Lengths,
            records,
            alg_value,
            epsilon: None,
        })
    }
}

/// Algorithm for packing constraints: solve the LP over arrived items with
/// capacities `t(1−ε)b/γ` and round the arriving coordinate.
#[derive(Clone, Debug)]
pub struct PackingRunner {
    /// Instance with row-normalized constraints.
    instance: Instance,
    epsilon: Epsilon,
    /// Density ranking, used when there is a single row.
    single_row: Option<Ranking>,
}

impl PackingRunner {
    pub fn new(instance: &Instance, epsilon: Option<f64>) -> Result<Self> {
        require_uniform(instance, Variant::Packing)?;
        let c = instance
            .constraints()
            .ok_or_else(|| Error::InvalidInstance("packing variant needs packing constraints".into()))?;
        let normalized = normalize_constraints(c)?;
        let epsilon = match epsilon {
            Some(e) => {
                if !(0.0..=0.5).contains(&e) {
                    return Err(Error::InvalidArgument(format!("epsilon {e} outside [0, 1/2]")));
                }
                Epsilon {
                    value: e,
                    raw: e,
                    clamped: false,
                }
            }
            None => epsilon_default(sparsity(&normalized).max(1), capacity_ratio(&normalized)?)?,
        };
        let single_row = (normalized.rows() == 1).then(|| {
            let density: Vec<f64> = (0..normalized.num_columns())
                .map(|j| density(instance.items()[j].value, coef(&normalized, j)))
                .collect();
            Ranking::descending(&density)
        });
        let instance = Instance::new(
            instance.items().to_vec(),
            instance.gamma(),
            instance.capacity(),
            Some(normalized),
        )?;
        Ok(Self {
            instance,
            epsilon,
            single_row,
        })
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    /// The instance with normalized constraints the runner works on.
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    fn constraints(&self) -> &PackingConstraints {
        self.instance.constraints().expect("packing runner holds constraints")
    }

    /// Capacities at time `t`.
    fn scaled_capacities(&self, t: f64) -> Vec<f64> {
        let s = t * (1.0 - self.epsilon.value) / self.instance.gamma();
        self.constraints().capacities().iter().map(|b| s * b).collect()
    }

    pub fn run<R: Rng + ?Sized>(&self, arrivals: &ArrivalRealization, rng: &mut R) -> Result<AlgorithmTrace> {
        let inst = &self.instance;
        check_arrivals(inst, arrivals)?;
        let mut state = ScheduleState::packing(self.constraints().capacities());
        let mut records = Vec::with_capacity(inst.len());
        let mut alg_value = 0.0;
        let mut fast = self.single_row.as_ref().map(|r| SingleRowLp::new(r, inst.len()));
        let mut arrived = Vec::new();
        for &j in arrivals.order() {
            let t = arrivals.times()[j];
            let item = &inst.items()[j];
            let caps = self.scaled_capacities(t);
            arrived.push(j);
            let (x_j, lp_value) = match fast.as_mut() {
                Some(f) => f.insert_and_solve(j, item.value, coef(self.constraints(), j), caps[0]),
                None => self.solve_general(&arrived, caps)?,
            };
            let tentative = lp::randomized_round(x_j, rng)?;
            let feasible = state.is_feasible_now(t, item, inst)?;
            let selected = tentative && feasible;
            if selected {
                state.select(t, item, inst)?;
                alg_value += item.value;
            }
            records.push(TraceRecord {
                item: j,
                time: t,
                tentative,
                feasible,
                selected,
                aux: lp_value,
            });
        }
        Ok(AlgorithmTrace {
            variant: Variant::Packing,
            records,
            alg_value,
            epsilon: Some(self.epsilon),
        })
    }

    /// Solves the LP over `arrived` from scratch; the arriving item is last.
    fn solve_general(&self, arrived: &[usize], caps: Vec<f64>) -> Result<(f64, f64)> {
        let c = self.constraints();
        let mut matrix = vec![vec![0.0; arrived.len()]; c.rows()];
        for (col, &j) in arrived.iter().enumerate() {
            for &(row, a) in c.column(j) {
                matrix[row][col] = a;
            }
        }
        let objective = arrived.iter().map(|&j| self.instance.items()[j].value).collect();
        let sol = lp::solve_packing_lp(&PackingLp::new(objective, matrix, caps)?, lp::DEFAULT_TOL)?;
        Ok((sol.x[arrived.len() - 1].clamp(0.0, 1.0), sol.value))
    }
}

fn coef(c: &PackingConstraints, j: usize) -> f64 {
    c.column(j).first().map_or(0.0, |&(_, a)| a)
}

/// Knapsack density; free columns come first.
fn density(value: f64, weight: f64) -> f64 {
    if weight > 0.0 {
        value / weight
    } else {
        f64::INFINITY
    }
}

/// Incremental fractional knapsack over a fixed density order.
struct SingleRowLp<'a> {
    ranking: &'a Ranking,
    weights: Fenwick,
    values: Fenwick,
    weight_at: Vec<f64>,
    value_at: Vec<f64>,
}

impl<'a> SingleRowLp<'a> {
    fn new(ranking: &'a Ranking, n: usize) -> Self {
        Self {
            ranking,
            weights: Fenwick::new(n),
            values: Fenwick::new(n),
            weight_at: vec![0.0; n],
            value_at: vec![0.0; n],
        }
    }

    /// Adds item `j` and returns its LP coordinate and the LP value.
    fn insert_and_solve(&mut self, j: usize, value: f64, weight: f64, budget: f64) -> (f64, f64) {
        let rank = self.ranking.rank_of(j);
        self.weights.add(rank, weight);
        self.values.add(rank, value);
        self.weight_at[rank] = weight;
        self.value_at[rank] = value;

        let x_j = if weight > 0.0 {
            ((budget - self.weights.prefix(rank)) / weight).clamp(0.0, 1.0)
        } else {
            1.0
        };
        let full = self.weights.max_prefix_within(budget);
        let mut lp_value = self.values.prefix(full);
        if full < self.weight_at.len() && self.weight_at[full] > 0.0 {
            let rest = (budget - self.weights.prefix(full)).max(0.0);
            lp_value += self.value_at[full] * (rest / self.weight_at[full]).min(1.0);
        }
        (x_j, lp_value)
    }
}

/// A runner prepared for one instance and parameter set.
#[derive(Clone, Debug)]
pub enum Runner {
    Cardinality(CardinalityRunner),
    Packing(PackingRunner),
    Lengths(LengthsRunner),
}

impl Runner {
    pub fn new(instance: &Instance, params: &AlgorithmParams) -> Result<Self> {
        params.validate()?;
        Ok(match params.variant {
            Variant::Cardinality => Runner::Cardinality(CardinalityRunner::new(instance)?),
            Variant::Packing => Runner::Packing(PackingRunner::new(instance, params.epsilon)?),
            Variant::Lengths => Runner::Lengths(LengthsRunner::new(instance, params.alpha)?),
        })
    }

    /// Runs on one realization. Only the packing variant draws from `rng`,
    /// exactly once per arrival.
    pub fn run<R: Rng + ?Sized>(&self, arrivals: &ArrivalRealization, rng: &mut R) -> Result<AlgorithmTrace> {
        match self {
            Runner::Cardinality(r) => r.run(arrivals),
            Runner::Packing(r) => r.run(arrivals, rng),
            Runner::Lengths(r) => r.run(arrivals),
        }
    }

    /// The instance whose constraints the trace refers to.
    pub fn instance(&self) -> &Instance {
        match self {
            Runner::Cardinality(r) => &r.instance,
            Runner::Packing(r) => &r.instance,
            Runner::Lengths(r) => &r.instance,
        }
    }

    pub fn epsilon(&self) -> Option<Epsilon> {
        match self {
            Runner::Packing(r) => Some(r.epsilon),
            _ => None,
        }
    }
}

pub fn run_scaling_cardinality(instance: &Instance, arrivals: &ArrivalRealization) -> Result<AlgorithmTrace> {
    CardinalityRunner::new(instance)?.run(arrivals)
}

pub fn run_scaling_packing<R: Rng + ?Sized>(
    instance: &Instance,
    arrivals: &ArrivalRealization,
    epsilon: Option<f64>,
    rng: &mut R,
) -> Result<AlgorithmTrace> {
    PackingRunner::new(instance, epsilon)?.run(arrivals, rng)
}

pub fn run_scaling_lengths(instance: &Instance, arrivals: &ArrivalRealization, alpha: f64) -> Result<AlgorithmTrace> {
    LengthsRunner::new(instance, alpha)?.run(arrivals)
}

/// Ways a trace can break its invariants.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TraceCheck {
    /// Records selected without being tentative and feasible.
    pub unjustified: usize,
    /// Whether the reported value differs from the sum of selected values.
    pub value_mismatch: bool,
    /// Whether records disagree with the realization (order, ids, times).
    pub order_mismatch: bool,
    /// Peak simultaneous load of the selected intervals minus capacity, per
    /// row, where positive.
    pub capacity_excess: f64,
}

impl TraceCheck {
    pub fn ok(&self) -> bool {
        self.unjustified == 0 && !self.value_mismatch && !self.order_mismatch && self.capacity_excess <= 0.0
    }

    /// Number of distinct invariants broken.
    pub fn violations(&self) -> usize {
        (self.unjustified > 0) as usize
            + self.value_mismatch as usize
            + self.order_mismatch as usize
            + (self.capacity_excess > 0.0) as usize
    }
}

/// Checks a trace against its invariants. The capacity check is an
/// independent sweep over the selected intervals, not a second pass
/// through [`ScheduleState`].
pub fn check_trace(trace: &AlgorithmTrace, instance: &Instance, arrivals: &ArrivalRealization) -> TraceCheck {
    let mut check = TraceCheck {
        unjustified: trace
            .records
            .iter()
            .filter(|r| r.selected && !(r.tentative && r.feasible))
            .count(),
        ..TraceCheck::default()
    };
    check.order_mismatch = trace.records.len() != arrivals.len()
        || trace
            .records
            .iter()
            .zip(arrivals.order())
            .any(|(r, &j)| r.item != j || r.time != arrivals.times()[j]);
    let selected: Vec<usize> = trace.records.iter().filter(|r| r.selected).map(|r| r.item).collect();
    let sum: f64 = selected.iter().map(|&j| instance.items()[j].value).sum();
    check.value_mismatch = (sum - trace.alg_value).abs() > 1e-9 * (1.0 + sum.abs());
    if check.order_mismatch {
        return check;
    }

    // Ends sort before starts at equal times: intervals are half-open.
    let mut events: Vec<(f64, bool, usize)> = Vec::with_capacity(2 * selected.len());
    for &j in &selected {
        let t = arrivals.times()[j];
        events.push((t, true, j));
        events.push((t + instance.items()[j].duration, false, j));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    match instance.constraints() {
        None => {
            let b = instance.capacity();
            let mut load = 0.0f64;
            for &(_, start, _) in &events {
                load += if start { 1.0 } else { -1.0 };
                check.capacity_excess = check.capacity_excess.max(load - b);
            }
        }
        Some(c) => {
            let mut load = vec![0.0; c.rows()];
            for &(_, start, j) in &events {
                for &(row, a) in c.column(j) {
                    load[row] += if start { a } else { -a };
                    if start {
                        let over = load[row] - c.capacities()[row] - FEASIBILITY_TOL;
                        check.capacity_excess = check.capacity_excess.max(over);
                    }
                }
            }
        }
    }
    check
}
