//! Prefix-sum structures over a fixed global ordering of items.
//!
//! The online runners need, at every arrival, the position of the arriving
//! item among the items seen so far in some fixed order (by value, or by
//! value density). Sorting the arrived set each time costs `O(n log n)` per
//! arrival; a Fenwick tree indexed by global rank answers the same query in
//! `O(log n)`.

use std::cmp::Ordering;

/// Fenwick (binary indexed) tree over `f64` with nonnegative entries.
#[derive(Clone, Debug)]
pub struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    pub fn new(n: usize) -> Self {
        Self { tree: vec![0.0; n + 1] }
    }

    pub fn len(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn add(&mut self, pos: usize, delta: f64) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of entries at positions `< end`.
    pub fn prefix(&self, end: usize) -> f64 {
        let mut i = end.min(self.len());
        let mut s = 0.0;
        while i > 0 {
            s += self.tree[i];
            i &= i - 1;
        }
        s
    }

    /// Largest `end` such that `prefix(end) <= limit`, assuming all entries
    /// are nonnegative.
    pub fn max_prefix_within(&self, limit: f64) -> usize {
        self.search(limit, |node, remaining| node <= remaining)
    }

    /// Largest `end` such that `prefix(end) < limit` (0 when `limit <= 0`).
    pub fn max_prefix_below(&self, limit: f64) -> usize {
        self.search(limit, |node, remaining| node < remaining)
    }

    fn search(&self, limit: f64, fits: impl Fn(f64, f64) -> bool) -> usize {
        let n = self.len();
        let mut pos = 0usize;
        let mut remaining = limit;
        let mut step = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && fits(self.tree[next], remaining) {
                pos = next;
                remaining -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// Integer-count Fenwick tree.
#[derive(Clone, Debug)]
pub struct CountFenwick {
    tree: Vec<u32>,
}

impl CountFenwick {
    pub fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    pub fn insert(&mut self, pos: usize) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted positions `< end`.
    pub fn count_below(&self, end: usize) -> usize {
        let mut i = end.min(self.tree.len() - 1);
        let mut s = 0usize;
        while i > 0 {
            s += self.tree[i] as usize;
            i &= i - 1;
        }
        s
    }
}

/// Item ids sorted best-first, and the inverse permutation.
#[derive(Clone, Debug)]
pub struct Ranking {
    by_rank: Vec<usize>,
    rank_of: Vec<usize>,
}

impl Ranking {
    /// Orders items by `key` descending, ties by id ascending.
    pub fn descending(keys: &[f64]) -> Self {
        let mut by_rank: Vec<usize> = (0..keys.len()).collect();
        by_rank.sort_unstable_by(|&a, &b| desc_then_id(keys[a], a, keys[b], b));
        let mut rank_of = vec![0; keys.len()];
        for (r, &id) in by_rank.iter().enumerate() {
            rank_of[id] = r;
        }
        Self { by_rank, rank_of }
    }

    pub fn rank_of(&self, id: usize) -> usize {
        self.rank_of[id]
    }

    pub fn item_at(&self, rank: usize) -> usize {
        self.by_rank[rank]
    }

    pub fn order(&self) -> &[usize] {
        &self.by_rank
    }
}

/// Comparator: larger key first, ties by smaller id.
pub fn desc_then_id(ka: f64, a: usize, kb: f64, b: usize) -> Ordering {
    kb.total_cmp(&ka).then(a.cmp(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_search() {
        let mut f = Fenwick::new(6);
        for (pos, w) in [(0, 1.0), (2, 2.0), (5, 0.5)] {
            f.add(pos, w);
        }
        assert_eq!(f.prefix(0), 0.0);
        assert_eq!(f.prefix(3), 3.0);
        assert_eq!(f.prefix(6), 3.5);
        assert_eq!(f.max_prefix_within(0.5), 0);
        assert_eq!(f.max_prefix_within(1.0), 2);
        assert_eq!(f.max_prefix_within(2.9), 2);
        assert_eq!(f.max_prefix_within(3.0), 5);
        assert_eq!(f.max_prefix_within(10.0), 6);
        assert_eq!(f.max_prefix_below(0.0), 0);
        assert_eq!(f.max_prefix_below(1.0), 0);
        assert_eq!(f.max_prefix_below(3.0), 2);
        assert_eq!(f.max_prefix_below(3.1), 5);
    }

    #[test]
    fn counts() {
        let mut c = CountFenwick::new(5);
        c.insert(1);
        c.insert(3);
        assert_eq!(c.count_below(1), 0);
        assert_eq!(c.count_below(2), 1);
        assert_eq!(c.count_below(5), 2);
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let r = Ranking::descending(&[1.0, 3.0, 3.0, 2.0]);
        assert_eq!(r.order(), &[1, 2, 3, 0]);
        assert_eq!(r.rank_of(0), 3);
    }
}
