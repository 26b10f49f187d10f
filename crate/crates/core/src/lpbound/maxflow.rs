//! Dinic max-flow over floating capacities.

use std::collections::VecDeque;

use crate::scalar::LpFloat;

#[derive(Debug, Clone)]
pub struct FlowNetwork<F: LpFloat> {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<F>,
    eps: F,
}

impl<F: LpFloat> FlowNetwork<F> {
    /// `eps` is the residual capacity treated as zero.
    pub fn new(nodes: usize, eps: F) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new(), eps }
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cap: F) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(cap);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(F::zero());
    }

    fn levels(&self, s: usize) -> Vec<Option<u32>> {
        let mut level = vec![None; self.adj.len()];
        level[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let d = level[u].unwrap();
            for &e in &self.adj[u] {
                let v = self.to[e];
                if level[v].is_none() && self.cap[e] > self.eps {
                    level[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, limit: F, level: &[Option<u32>], next: &mut [usize]) -> F {
        if u == t {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let v = self.to[e];
            if self.cap[e] > self.eps && level[v] == level[u].map(|d| d + 1) {
                let pushed = self.augment(v, t, limit.min(self.cap[e]), level, next);
                if pushed > F::zero() {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        F::zero()
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> F {
        let mut total = F::zero();
        loop {
            let level = self.levels(s);
            if level[t].is_none() {
                return total;
            }
            let mut next = vec![0; self.adj.len()];
            loop {
                let pushed = self.augment(s, t, F::infinity(), &level, &mut next);
                if pushed <= F::zero() {
                    break;
                }
                total += pushed;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        self.levels(s).iter().map(Option::is_some).collect()
    }
}
