//! Exhaustive search over subsets, for cross-checking the flow oracle.

/// Best subset of `intervals = (start, end, value)` with at most `capacity`
/// simultaneously active (half-open) intervals.
pub(crate) fn best_subset(intervals: &[(f64, f64, f64)], capacity: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&a, &b| intervals[a].0.total_cmp(&intervals[b].0).then(a.cmp(&b)));
    let mut search = Search {
        intervals,
        order: &order,
        capacity,
        chosen: Vec::new(),
        best: Vec::new(),
        best_value: f64::NEG_INFINITY,
    };
    search.go(0, 0.0);
    let mut best = search.best;
    best.sort_unstable();
    best
}

struct Search<'a> {
    intervals: &'a [(f64, f64, f64)],
    order: &'a [usize],
    capacity: usize,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_value: f64,
}

impl Search<'_> {
    fn go(&mut self, pos: usize, value: f64) {
        if pos == self.order.len() {
            if value > self.best_value {
                self.best_value = value;
                self.best = self.chosen.clone();
            }
            return;
        }
        let j = self.order[pos];
        let (start, _, v) = self.intervals[j];
        // Items are visited by start time, so the load at `start` is the
        // maximum load over the new interval.
        let active = self.chosen.iter().filter(|&&c| self.intervals[c].1 > start).count();
        if active < self.capacity {
            self.chosen.push(j);
            self.go(pos + 1, value + v);
            self.chosen.pop();
        }
        self.go(pos + 1, value);
    }
}
