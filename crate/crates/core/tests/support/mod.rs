//! Independent oracles and instance builders shared by the integration
//! tests. Nothing here calls into the solvers under test.

#![allow(dead_code)]

pub mod dense_simplex;

use std::collections::VecDeque;

use hopnet::model::{Instance, Node, NodeId, NodeKind};
use hopnet::scenarios::random_graph;
use hopnet::Rational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use dense_simplex::{DualSimplex, Sense};

pub fn r(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn graph(kinds: &[NodeKind], edges: &[(u32, u32)], c_s: i64, c_r: i64, h_max: u32) -> Instance {
    Instance::new(
        kinds.iter().enumerate().map(|(i, &k)| Node::new(i as u32, k)).collect(),
        edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b))),
        r(c_s),
        r(c_r),
        h_max,
        None,
    )
    .unwrap()
}

/// Random instances with at most 4 sources, 6 relays and 3 sinks.
pub fn tiny_instances() -> impl Strategy<Value = Instance> {
    (1usize..=4, 0usize..=6, 1usize..=3, 2u32..=4, 0.12f64..0.45, 1i64..=12, 0i64..=3, any::<u64>()).prop_map(
        |(s, rl, b, h, p, c_s, c_r, seed)| random_graph((s, rl, b), p, h, (r(c_s), r(c_r)), seed),
    )
}

/// Node-set bitmask view of an instance plus the virtual sink semantics:
/// a source is connected when it reaches any surviving sink.
pub struct Masks {
    pub n: usize,
    adj: Vec<u32>,
    sinks: u32,
    pub sources: u32,
    pub pool: u32,
}

impl Masks {
    pub fn new(instance: &Instance) -> Self {
        let n = instance.node_count();
        assert!(n <= 24, "bitmask oracle is for tiny instances");
        let bit = |v: NodeId| 1u32 << v.index();
        let adj = (0..n)
            .map(|i| instance.neighbors(NodeId::from_index(i)).iter().fold(0, |m, &v| m | bit(v)))
            .collect();
        let fold = |ids: &[NodeId]| ids.iter().fold(0u32, |m, &v| m | bit(v));
        Masks {
            n,
            adj,
            sinks: fold(instance.sinks()),
            sources: fold(instance.sources()),
            pool: fold(instance.relays()) | fold(instance.sinks()),
        }
    }

    /// Shortest hop count from `k` to a sink through `allowed` nodes.
    pub fn hops(&self, k: usize, allowed: u32) -> Option<u32> {
        let allowed = allowed | 1 << k;
        let mut seen = 1u32 << k;
        let mut frontier = 1u32 << k;
        let mut d = 0;
        while frontier != 0 {
            if frontier & self.sinks != 0 {
                return Some(d);
            }
            let mut next = 0;
            for v in 0..self.n {
                if frontier >> v & 1 == 1 {
                    next |= self.adj[v];
                }
            }
            frontier = next & allowed & !seen;
            seen |= frontier;
            d += 1;
        }
        None
    }

    fn all(&self) -> u32 {
        (1u32 << self.n) - 1
    }

    /// Every minimal node set (excluding `k`) separating `k` from all sinks.
    pub fn minimal_cuts(&self, k: usize) -> Vec<u32> {
        let others = self.all() & !(1 << k);
        let is_cut = |c: u32| self.hops(k, others & !c).is_none();
        let mut cuts = Vec::new();
        let mut c = others;
        loop {
            if is_cut(c) && (0..self.n).all(|v| c >> v & 1 == 0 || !is_cut(c & !(1 << v))) {
                cuts.push(c);
            }
            if c == 0 {
                break;
            }
            c = (c - 1) & others;
        }
        cuts
    }
}

/// Optimum of the cut-based integer program: choose relays and sinks so
/// that each source has at most `h_max` used nodes hitting every minimal
/// cut. `None` when infeasible.
pub fn cut_ilp_optimum(instance: &Instance) -> Option<Rational> {
    let m = Masks::new(instance);
    let h = instance.h_max();
    // per source: minimal hitting sets of size <= h_max
    let hitting: Vec<Vec<u32>> = instance
        .sources()
        .iter()
        .map(|&q| {
            let k = q.index();
            let cuts = m.minimal_cuts(k);
            let others = m.all() & !(1 << k);
            let mut sets = Vec::new();
            let mut t = others;
            loop {
                if t.count_ones() <= h && cuts.iter().all(|&c| c & t != 0) {
                    sets.push(t);
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & others;
            }
            sets
        })
        .collect();
    let pool_ids: Vec<usize> = (0..m.n).filter(|&v| m.pool >> v & 1 == 1).collect();
    let mut best: Option<Rational> = None;
    for sel in 0u32..1 << pool_ids.len() {
        let chosen = pool_ids.iter().enumerate().filter(|(i, _)| sel >> i & 1 == 1).fold(0u32, |acc, (_, &v)| acc | 1 << v);
        let ok = hitting.iter().all(|sets| sets.iter().any(|&t| t & !(chosen | m.sources) == 0));
        if ok {
            let sinks = instance.sinks().iter().filter(|v| chosen >> v.index() & 1 == 1).count() as i64;
            let relays = chosen.count_ones() as i64 - sinks;
            let cost = instance.sink_cost() * r(sinks) + instance.relay_cost() * r(relays);
            if best.is_none_or(|b| cost < b) {
                best = Some(cost);
            }
        }
    }
    best
}

/// LP relaxation with every minimal cut written out, solved by the dense
/// simplex.
pub fn full_cut_lp(instance: &Instance) -> f64 {
    let m = Masks::new(instance);
    let n = m.n;
    let sources = instance.sources();
    let pool_ids: Vec<usize> = (0..n).filter(|&v| m.pool >> v & 1 == 1).collect();
    let route_col = |si: usize, j: usize| si * n + j;
    let sel_col = |p: usize| sources.len() * n + p;
    let mut cost = vec![0.0; sources.len() * n + pool_ids.len()];
    for (p, &j) in pool_ids.iter().enumerate() {
        let c = if m.sinks >> j & 1 == 1 { instance.sink_cost() } else { instance.relay_cost() };
        cost[sel_col(p)] = c.to_f64().unwrap();
    }
    let width = cost.len();
    let mut lp = DualSimplex::new(cost, 1e-9).unwrap();
    for (si, &q) in sources.iter().enumerate() {
        let k = q.index();
        // the source's own column is pinned to zero
        lp.add_row(&[(route_col(si, k), 1.0)], Sense::Le, 0.0);
        for c in m.minimal_cuts(k) {
            let row: Vec<(usize, f64)> = (0..n).filter(|&j| c >> j & 1 == 1).map(|j| (route_col(si, j), 1.0)).collect();
            lp.add_row(&row, Sense::Ge, 1.0);
        }
        let hop: Vec<(usize, f64)> = (0..n).filter(|&j| j != k).map(|j| (route_col(si, j), 1.0)).collect();
        lp.add_row(&hop, Sense::Le, instance.h_max() as f64);
        for (p, &j) in pool_ids.iter().enumerate() {
            lp.add_row(&[(route_col(si, j), 1.0), (sel_col(p), -1.0)], Sense::Le, 0.0);
        }
    }
    for col in 0..width {
        lp.add_row(&[(col, 1.0)], Sense::Le, 1.0);
    }
    lp.solve(1_000_000).expect("full cut LP solves");
    lp.objective()
}

/// Minimum node cut between `source` and the virtual sink under node
/// weights `w` (indexed by node id), by Edmonds-Karp on the split graph.
pub fn min_node_cut_weight(instance: &Instance, source: NodeId, w: &[f64]) -> f64 {
    let n = instance.node_count();
    let big = 1.0 + w.iter().sum::<f64>();
    // node v: in = 2v, out = 2v+1; virtual sink = 2n
    let t = 2 * n;
    let mut cap = vec![vec![0.0f64; 2 * n + 1]; 2 * n + 1];
    for v in 0..n {
        cap[2 * v][2 * v + 1] = if v == source.index() { big } else { w[v] };
        for &u in instance.neighbors(NodeId::from_index(v)) {
            cap[2 * v + 1][2 * u.index()] = big;
        }
    }
    for &b in instance.sinks() {
        cap[2 * b.index() + 1][t] = big;
    }
    let s = 2 * source.index() + 1;
    let mut flow = 0.0;
    loop {
        let mut prev = vec![usize::MAX; 2 * n + 1];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..=t {
                if prev[v] == usize::MAX && cap[u][v] > 1e-12 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        flow += push;
    }
}

/// Hop distance from each source to `sink` through sources and relays
/// (or sources only when `relays` is false), by plain BFS.
pub fn hops_to_sink(instance: &Instance, sink: NodeId, relays: bool) -> Vec<Option<u32>> {
    let n = instance.node_count();
    let mut dist = vec![None; n];
    dist[sink.index()] = Some(0);
    let mut queue = VecDeque::from([sink]);
    while let Some(u) = queue.pop_front() {
        for &v in instance.neighbors(u) {
            let passable = instance.is_source(v) || (relays && instance.is_relay(v));
            if passable && dist[v.index()].is_none() {
                dist[v.index()] = Some(dist[u.index()].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    instance.sources().iter().map(|q| dist[q.index()]).collect()
}

/// True when `sink` reaches every source within `h_max` hops.
pub fn covers_all(instance: &Instance, sink: NodeId, relays: bool) -> bool {
    hops_to_sink(instance, sink, relays).iter().all(|d| d.is_some_and(|d| d <= instance.h_max()))
}

/// Textbook greedy weighted set cover: repeatedly take the subset with the
/// lowest weight per newly covered element, ties to more new elements then
/// lower index.
pub fn greedy_set_cover(elements: usize, subsets: &[Vec<usize>], weights: &[Rational]) -> Vec<usize> {
    let mut covered = vec![false; elements];
    let mut used = vec![false; subsets.len()];
    let mut order = Vec::new();
    while covered.iter().any(|c| !c) {
        let mut best: Option<(usize, Rational, usize)> = None;
        for i in (0..subsets.len()).filter(|&i| !used[i]) {
            let mut s = subsets[i].clone();
            s.sort_unstable();
            s.dedup();
            let gain = s.iter().filter(|&&e| !covered[e]).count();
            if gain == 0 {
                continue;
            }
            let price = weights[i] / r(gain as i64);
            let wins = match &best {
                None => true,
                Some((_, p, g)) => price < *p || (price == *p && gain > *g),
            };
            if wins {
                best = Some((i, price, gain));
            }
        }
        let (i, _, _) = best.expect("every element is coverable");
        used[i] = true;
        for &e in &subsets[i] {
            covered[e] = true;
        }
        order.push(i);
    }
    order
}
