//! Instances, packing constraints, arrival realizations and the temporal
//! schedule state shared by every algorithm.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for capacity comparisons.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// One candidate contract.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: usize,
    pub value: f64,
    pub duration: f64,
}

/// Sparse nonnegative packing constraints `A x <= b`, stored column-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct PackingConstraints {
    rows: usize,
    columns: Vec<Vec<(usize, f64)>>,
    capacities: Vec<f64>,
}

impl PackingConstraints {
    /// Builds a constraint set. Zero coefficients are dropped from the columns.
    pub fn new(capacities: Vec<f64>, columns: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let rows = capacities.len();
        if capacities.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidConstraints(
                "capacities must be finite and nonnegative".into(),
            ));
        }
        let mut cleaned = Vec::with_capacity(columns.len());
        for (j, column) in columns.into_iter().enumerate() {
            let mut col = Vec::with_capacity(column.len());
            for (row, coef) in column {
                if row >= rows {
                    return Err(Error::InvalidConstraints(format!(
                        "column {j} references row {row} but only {rows} rows exist"
                    )));
                }
                if !coef.is_finite() || coef < 0.0 {
                    return Err(Error::InvalidConstraints(format!(
                        "coefficient a[{row}][{j}] = {coef} is not a packing coefficient"
                    )));
                }
                if coef > 0.0 {
                    col.push((row, coef));
                }
            }
            col.sort_by_key(|&(row, _)| row);
            if col.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidConstraints(format!("column {j} lists a row twice")));
            }
            cleaned.push(col);
        }
        Ok(Self {
            rows,
            columns: cleaned,
            capacities,
        })
    }

    /// A single row with every coefficient equal to one: the cardinality
    /// constraint written as a packing LP.
    pub fn cardinality(n: usize, capacity: f64) -> Result<Self> {
        Self::new(vec![capacity], (0..n).map(|_| vec![(0, 1.0)]).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<(usize, f64)>] {
        &self.columns
    }

    /// Largest coefficient per row.
    pub fn row_maxima(&self) -> Vec<f64> {
        let mut max = vec![0.0f64; self.rows];
        for col in &self.columns {
            for &(row, coef) in col {
                max[row] = max[row].max(coef);
            }
        }
        max
    }

    /// Dense `rows x columns` copy of the matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.columns.len()]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(row, coef) in col {
                a[row][j] = coef;
            }
        }
        a
    }

    /// True when every row's largest coefficient is one (up to rounding).
    pub fn is_normalized(&self) -> bool {
        self.row_maxima().iter().all(|m| (m - 1.0).abs() <= 1e-12)
    }
}

/// Divides every row by its largest coefficient so that `max_j a_ij = 1`.
///
/// The feasible set in `x` and the objective are unchanged.
pub fn normalize_constraints(constraints: &PackingConstraints) -> Result<PackingConstraints> {
    if constraints.rows == 0 {
        return Err(Error::InvalidConstraints("no constraint rows".into()));
    }
    let maxima = constraints.row_maxima();
    if let Some(row) = maxima.iter().position(|&m| m <= 0.0) {
        return Err(Error::InvalidConstraints(format!(
            "row {row} has no nonzero coefficient; scaling is undefined"
        )));
    }
    if let Some(row) = constraints.capacities.iter().position(|&b| b <= 0.0) {
        return Err(Error::InvalidConstraints(format!("row {row} has nonpositive capacity")));
    }
    let capacities = constraints.capacities.iter().zip(&maxima).map(|(b, m)| b / m).collect();
    let columns = constraints
        .columns
        .iter()
        .map(|col| {
            col.iter()
                .map(|&(row, coef)| {
                    // Exact 1.0 for the maximal entry, not coef/max rounding.
                    let scaled = if coef == maxima[row] { 1.0 } else { coef / maxima[row] };
                    (row, scaled)
                })
                .collect()
        })
        .collect();
    Ok(PackingConstraints {
        rows: constraints.rows,
        columns,
        capacities,
    })
}

/// Capacity ratio `min_i b_i / max_j a_ij`.
pub fn capacity_ratio(constraints: &PackingConstraints) -> Result<f64> {
    if constraints.rows == 0 {
        return Err(Error::InvalidConstraints("empty constraint set".into()));
    }
    let maxima = constraints.row_maxima();
    let mut ratio = f64::INFINITY;
    for (b, m) in constraints.capacities.iter().zip(&maxima) {
        if *m > 0.0 {
            ratio = ratio.min(b / m);
        }
    }
    if ratio.is_infinite() {
        return Err(Error::InvalidConstraints(
            "every row is empty; capacity ratio undefined".into(),
        ));
    }
    Ok(ratio)
}

/// Largest number of rows any single column participates in.
pub fn sparsity(constraints: &PackingConstraints) -> usize {
    constraints.columns.iter().map(Vec::len).max().unwrap_or(0)
}

/// Adversarial input: values, durations, window length and capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    items: Vec<Item>,
    gamma: f64,
    capacity: f64,
    constraints: Option<PackingConstraints>,
}

impl Instance {
    pub fn new(items: Vec<Item>, gamma: f64, capacity: f64, constraints: Option<PackingConstraints>) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidInstance(format!("gamma {gamma} not in (0, 1]")));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::InvalidInstance(format!("capacity {capacity} must be positive")));
        }
        for (k, item) in items.iter().enumerate() {
            if item.id != k {
                return Err(Error::InvalidInstance(format!(
                    "item at position {k} has id {}",
                    item.id
                )));
            }
            if !(item.value.is_finite() && item.value >= 0.0) {
                return Err(Error::InvalidInstance(format!("item {k} has value {}", item.value)));
            }
            if !(item.duration > 0.0 && item.duration <= gamma * (1.0 + 1e-12)) {
                return Err(Error::InvalidInstance(format!(
                    "item {k} has duration {} outside (0, gamma={gamma}]",
                    item.duration
                )));
            }
        }
        if let Some(c) = &constraints {
            if c.num_columns() != items.len() {
                return Err(Error::InvalidInstance(format!(
                    "constraints have {} columns for {} items",
                    c.num_columns(),
                    items.len()
                )));
            }
        }
        Ok(Self {
            items,
            gamma,
            capacity,
            constraints,
        })
    }

    /// Instance where every item has duration `gamma`.
    pub fn with_uniform_durations(values: &[f64], gamma: f64, capacity: f64) -> Result<Self> {
        let items = values
            .iter()
            .enumerate()
            .map(|(id, &value)| Item {
                id,
                value,
                duration: gamma,
            })
            .collect();
        Self::new(items, gamma, capacity, None)
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn constraints(&self) -> Option<&PackingConstraints> {
        self.constraints.as_ref()
    }

    pub fn values(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.value).collect()
    }

    /// Capacity as an integer, required by the cardinality variants.
    pub fn cardinality_capacity(&self) -> Result<usize> {
        let b = self.capacity;
        if b < 1.0 || b.fract() != 0.0 {
            return Err(Error::InvalidInstance(format!(
                "cardinality capacity must be an integer >= 1, got {b}"
            )));
        }
        Ok(b as usize)
    }

    /// True when every duration equals `gamma`.
    pub fn has_uniform_durations(&self) -> bool {
        self.items
            .iter()
            .all(|i| (i.duration - self.gamma).abs() <= 1e-12 * self.gamma)
    }

    /// Same instance with each value replaced by `f(value)`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let items = self
            .items
            .iter()
            .map(|i| Item {
                value: f(i.value),
                ..*i
            })
            .collect();
        Self::new(items, self.gamma, self.capacity, self.constraints.clone())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        file.into_instance()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&InstanceFile::from(self))?)
    }
}

/// On-disk instance layout.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub gamma: f64,
    pub capacity: f64,
    pub items: Vec<ItemFile>,
    #[serde(default)]
    pub constraints: Option<ConstraintsFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemFile {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintsFile {
    pub capacities: Vec<f64>,
    pub columns: Vec<Vec<(usize, f64)>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let gamma = self.gamma;
        let items = self
            .items
            .into_iter()
            .enumerate()
            .map(|(id, it)| Item {
                id,
                value: it.value,
                duration: it.duration.unwrap_or(gamma),
            })
            .collect();
        let constraints = self
            .constraints
            .map(|c| PackingConstraints::new(c.capacities, c.columns))
            .transpose()?;
        Instance::new(items, gamma, self.capacity, constraints)
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            gamma: inst.gamma,
            capacity: inst.capacity,
            items: inst
                .items
                .iter()
                .map(|i| ItemFile {
                    value: i.value,
                    duration: Some(i.duration),
                })
                .collect(),
            constraints: inst.constraints.as_ref().map(|c| ConstraintsFile {
                capacities: c.capacities.clone(),
                columns: c.columns.clone(),
            }),
        }
    }
}

/// One sampled assignment of arrival times to items.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalRealization {
    times: Vec<f64>,
    order: Vec<usize>,
}

impl ArrivalRealization {
    /// Builds the realization, ordering items by `(time, id)`.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if let Some(j) = times.iter().position(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidArgument(format!(
                "arrival time {} of item {j} outside [0, 1]",
                times[j]
            )));
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_unstable_by(|&a, &b| times[a].total_cmp(&times[b]).then(a.cmp(&b)));
        Ok(Self { times, order })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Item ids in arrival order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct End(f64);

impl Eq for End {}

impl PartialOrd for End {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for End {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Clone, Debug)]
enum Limits {
    Cardinality(usize),
    Packing(Vec<f64>),
}

/// A committed selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Selection {
    pub item: usize,
    pub start: f64,
    pub end: f64,
}

/// Running schedule of committed selections.
///
/// Items are active on the half-open interval `[start, start + duration)`.
/// Between two arrivals nothing starts, so the active load can only drop;
/// an item that fits at its arrival instant therefore fits for its whole
/// duration, and checking at `t` alone is sufficient.
#[derive(Clone, Debug)]
pub struct ScheduleState {
    limits: Limits,
    selections: Vec<Selection>,
    active: BinaryHeap<Reverse<(End, usize)>>,
    row_load: Vec<f64>,
    clock: f64,
}

impl ScheduleState {
    /// State enforcing at most `capacity` simultaneously active items.
    pub fn cardinality(capacity: usize) -> Self {
        Self {
            limits: Limits::Cardinality(capacity),
            selections: Vec::new(),
            active: BinaryHeap::new(),
            row_load: Vec::new(),
            clock: 0.0,
        }
    }

    /// State enforcing per-row active consumption `<= b_i`.
    pub fn packing(capacities: &[f64]) -> Self {
        Self {
            limits: Limits::Packing(capacities.to_vec()),
            selections: Vec::new(),
            active: BinaryHeap::new(),
            row_load: vec![0.0; capacities.len()],
            clock: 0.0,
        }
    }

    /// The state matching an instance: packing when constraints are present.
    pub fn for_instance(instance: &Instance) -> Result<Self> {
        match instance.constraints() {
            Some(c) => Ok(Self::packing(c.capacities())),
            None => Ok(Self::cardinality(instance.cardinality_capacity()?)),
        }
    }

    fn advance(&mut self, t: f64, instance: &Instance) -> Result<()> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("query time {t} outside [0, 1]")));
        }
        if t < self.clock {
            return Err(Error::OutOfOrder {
                query: t,
                last: self.clock,
            });
        }
        self.clock = t;
        while let Some(&Reverse((End(end), sel))) = self.active.peek() {
            if end > t {
                break;
            }
            self.active.pop();
            if let (Limits::Packing(_), Some(c)) = (&self.limits, instance.constraints()) {
                for &(row, coef) in c.column(self.selections[sel].item) {
                    self.row_load[row] -= coef;
                }
            }
        }
        if self.active.is_empty() {
            // Drop accumulated rounding drift.
            self.row_load.iter_mut().for_each(|l| *l = 0.0);
        }
        Ok(())
    }

    /// Whether `item` could be selected at time `t` given the committed
    /// selections. Advances the internal clock to `t`.
    pub fn is_feasible_now(&mut self, t: f64, item: &Item, instance: &Instance) -> Result<bool> {
        self.advance(t, instance)?;
        Ok(match &self.limits {
            Limits::Cardinality(b) => self.active.len() < *b,
            Limits::Packing(caps) => {
                let c = instance
                    .constraints()
                    .ok_or_else(|| Error::InvalidInstance("packing state on instance without constraints".into()))?;
                c.column(item.id)
                    .iter()
                    .all(|&(row, coef)| self.row_load[row] + coef <= caps[row] + FEASIBILITY_TOL)
            }
        })
    }

    /// Commits `item` at time `t` without checking feasibility.
    pub fn select(&mut self, t: f64, item: &Item, instance: &Instance) -> Result<()> {
        self.advance(t, instance)?;
        let idx = self.selections.len();
        let end = t + item.duration;
        self.selections.push(Selection {
            item: item.id,
            start: t,
            end,
        });
        self.active.push(Reverse((End(end), idx)));
        if let (Limits::Packing(_), Some(c)) = (&self.limits, instance.constraints()) {
            for &(row, coef) in c.column(item.id) {
                self.row_load[row] += coef;
            }
        }
        Ok(())
    }

    pub fn selections(&self) -> &[Selection] {
        &self.selections
    }

    /// Number of selections active at the current clock.
    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Per-row active consumption at the current clock (packing only).
    pub fn row_load(&self) -> &[f64] {
        &self.row_load
    }
}
