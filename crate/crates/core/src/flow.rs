//! Minimum-cost flow by successive shortest augmenting paths.
//!
//! Dijkstra runs on reduced costs `c(u,v) + π(u) - π(v)`, which stay
//! non-negative once the potentials `π` are updated with the last distances.
//! All input costs must be non-negative. Costs are `i128` so callers can fold
//! a lexicographic tie-break into the low bits of a scaled cost.
//!
//! [`solve_bounded`] handles arcs with lower bounds by the usual reduction:
//! each lower bound is pre-shipped, the resulting node imbalances are fed from
//! a super source and drained into a super sink, and the instance is feasible
//! iff that auxiliary flow saturates.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub type Cost = i128;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: i64,
    cost: Cost,
}

/// Residual graph with paired forward/backward edges (`id ^ 1` is the twin).
#[derive(Debug, Clone)]
pub struct MinCostFlow {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds `from -> to` and returns its edge id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: Cost) -> usize {
        assert!(cost >= 0, "negative arc cost {cost}");
        assert!(cap >= 0, "negative capacity {cap}");
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently carried by edge `id`.
    pub fn flow_on(&self, id: usize) -> i64 {
        self.edges[id + 1].cap
    }

    /// Pushes up to `limit` units from `s` to `t` at minimum cost.
    /// Returns the amount shipped and its total cost.
    pub fn run(&mut self, s: usize, t: usize, limit: i64) -> (i64, Cost) {
        let n = self.adj.len();
        let mut potential = vec![0 as Cost; n];
        let mut flow = 0i64;
        let mut cost: Cost = 0;
        let mut dist = vec![Cost::MAX; n];
        let mut parent = vec![usize::MAX; n];

        while flow < limit {
            dist.fill(Cost::MAX);
            parent.fill(usize::MAX);
            dist[s] = 0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0 as Cost, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &id in &self.adj[u] {
                    let e = &self.edges[id];
                    if e.cap == 0 {
                        continue;
                    }
                    let nd = d + e.cost + potential[u] - potential[e.to];
                    if nd < dist[e.to] {
                        dist[e.to] = nd;
                        parent[e.to] = id;
                        heap.push(Reverse((nd, e.to)));
                    }
                }
            }
            if dist[t] == Cost::MAX {
                break;
            }
            for v in 0..n {
                if dist[v] != Cost::MAX {
                    potential[v] += dist[v];
                }
            }

            let mut push = limit - flow;
            let mut v = t;
            while v != s {
                let id = parent[v];
                push = push.min(self.edges[id].cap);
                v = self.edges[id ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let id = parent[v];
                self.edges[id].cap -= push;
                self.edges[id ^ 1].cap += push;
                cost += Cost::from(push) * self.edges[id].cost;
                v = self.edges[id ^ 1].to;
            }
            flow += push;
        }
        (flow, cost)
    }
}

/// An arc with a lower and upper bound on its flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundedArc {
    pub from: usize,
    pub to: usize,
    pub lower: i64,
    pub upper: i64,
    pub cost: Cost,
}

/// Minimum-cost flow of exactly `amount` units from `source` to `sink`
/// respecting every arc's bounds. Returns per-arc flows and total cost, or
/// `None` when no such flow exists.
pub fn solve_bounded(
    nodes: usize,
    arcs: &[BoundedArc],
    source: usize,
    sink: usize,
    amount: i64,
) -> Option<(Vec<i64>, Cost)> {
    let mut balance = vec![0i64; nodes];
    balance[source] += amount;
    balance[sink] -= amount;

    let super_source = nodes;
    let super_sink = nodes + 1;
    let mut g = MinCostFlow::new(nodes + 2);
    let mut ids = Vec::with_capacity(arcs.len());
    let mut fixed_cost: Cost = 0;
    for a in arcs {
        if a.lower > a.upper || a.lower < 0 {
            return None;
        }
        ids.push(g.add_edge(a.from, a.to, a.upper - a.lower, a.cost));
        balance[a.to] += a.lower;
        balance[a.from] -= a.lower;
        fixed_cost += Cost::from(a.lower) * a.cost;
    }
    let mut required = 0i64;
    for (v, &b) in balance.iter().enumerate() {
        if b > 0 {
            g.add_edge(super_source, v, b, 0);
            required += b;
        } else if b < 0 {
            g.add_edge(v, super_sink, -b, 0);
        }
    }
    let (shipped, cost) = g.run(super_source, super_sink, required);
    if shipped < required {
        return None;
    }
    let flows = arcs
        .iter()
        .zip(&ids)
        .map(|(a, &id)| a.lower + g.flow_on(id))
        .collect();
    Some((flows, cost + fixed_cost))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_cheaper_parallel_path() {
        let mut g = MinCostFlow::new(4);
        g.add_edge(0, 1, 1, 5);
        g.add_edge(0, 2, 1, 1);
        g.add_edge(1, 3, 1, 0);
        g.add_edge(2, 3, 1, 0);
        assert_eq!(g.run(0, 3, 1), (1, 1));
        assert_eq!(g.run(0, 3, 5), (1, 5));
    }

    #[test]
    fn reroutes_through_residual_edges() {
        // Greedy first path 0-1-2-3 must be partially undone for flow 2.
        let mut g = MinCostFlow::new(4);
        g.add_edge(0, 1, 1, 1);
        g.add_edge(0, 2, 1, 4);
        g.add_edge(1, 2, 1, 1);
        g.add_edge(1, 3, 1, 4);
        g.add_edge(2, 3, 1, 1);
        assert_eq!(g.run(0, 3, 2), (2, 10));
    }

    #[test]
    fn lower_bound_forces_expensive_arc() {
        let arcs = [
            BoundedArc { from: 0, to: 1, lower: 0, upper: 2, cost: 1 },
            BoundedArc { from: 0, to: 2, lower: 1, upper: 2, cost: 10 },
            BoundedArc { from: 1, to: 3, lower: 0, upper: 2, cost: 0 },
            BoundedArc { from: 2, to: 3, lower: 0, upper: 2, cost: 0 },
        ];
        let (flows, cost) = solve_bounded(4, &arcs, 0, 3, 2).unwrap();
        assert_eq!(flows, vec![1, 1, 1, 1]);
        assert_eq!(cost, 11);
    }

    #[test]
    fn infeasible_lower_bounds() {
        let arcs = [
            BoundedArc { from: 0, to: 1, lower: 2, upper: 2, cost: 0 },
            BoundedArc { from: 1, to: 2, lower: 0, upper: 1, cost: 0 },
        ];
        assert!(solve_bounded(3, &arcs, 0, 2, 2).is_none());
    }
}
