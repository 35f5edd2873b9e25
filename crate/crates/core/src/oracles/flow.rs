//! Maximum-weight interval selection with at most `B` overlaps, as a
//! min-cost flow.
//!
//! One node per distinct event time (starts and ends). A chain edge of
//! capacity `B` and cost 0 joins consecutive times; each item is an edge
//! from its start node to its end node with capacity 1 and cost `-v_j`.
//! Routing `B` units from the first to the last node, every cut between two
//! consecutive times carries at most `B` units, so at most `B` selected items
//! are active at once. Conversely any selection with overlap `<= B`
//! decomposes into `B` disjoint chains of intervals, each a unit path.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

/// Returns the selected intervals (indices into `intervals`).
///
/// `intervals[j] = (start, end, value)` with `start < end`.
pub(crate) fn max_weight_b_overlap(intervals: &[(f64, f64, f64)], capacity: usize) -> Vec<usize> {
    if intervals.is_empty() || capacity == 0 {
        return Vec::new();
    }
    let mut times: Vec<f64> = intervals.iter().flat_map(|&(s, e, _)| [s, e]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let node = |t: f64| times.partition_point(|&x| x < t);
    let n = times.len();
    let mut net = Network::new(n);
    for u in 0..n - 1 {
        net.add(u, u + 1, capacity as i64, 0.0);
    }
    let item_edges: Vec<usize> = intervals
        .iter()
        .map(|&(s, e, v)| net.add(node(s), node(e), 1, -v))
        .collect();

    // Initial potentials: shortest distances in the DAG (edges point forward).
    let mut pot = vec![f64::INFINITY; n];
    pot[0] = 0.0;
    for u in 0..n {
        for &e in &net.adj[u] {
            let edge = &net.edges[e];
            if edge.cap > 0 && pot[u] + edge.cost < pot[edge.to] {
                pot[edge.to] = pot[u] + edge.cost;
            }
        }
    }

    let sink = n - 1;
    let mut flow = 0i64;
    let target = capacity as i64;
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    while flow < target {
        dist.fill(f64::INFINITY);
        parent.fill(usize::MAX);
        dist[0] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry(0.0, 0));
        while let Some(Entry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &e in &net.adj[u] {
                let edge = &net.edges[e];
                if edge.cap <= 0 {
                    continue;
                }
                let reduced = (edge.cost + pot[u] - pot[edge.to]).max(0.0);
                let nd = d + reduced;
                if nd < dist[edge.to] {
                    dist[edge.to] = nd;
                    parent[edge.to] = e;
                    heap.push(Entry(nd, edge.to));
                }
            }
        }
        if !dist[sink].is_finite() {
            break;
        }
        for u in 0..n {
            if dist[u].is_finite() {
                pot[u] += dist[u];
            }
        }
        let mut push = target - flow;
        let mut v = sink;
        while v != 0 {
            let e = parent[v];
            push = push.min(net.edges[e].cap);
            v = net.edges[e ^ 1].to;
        }
        let mut v = sink;
        while v != 0 {
            let e = parent[v];
            net.edges[e].cap -= push;
            net.edges[e ^ 1].cap += push;
            v = net.edges[e ^ 1].to;
        }
        flow += push;
    }

    item_edges
        .iter()
        .enumerate()
        .filter(|&(_, &e)| net.edges[e].cap == 0)
        .map(|(j, _)| j)
        .collect()
}
