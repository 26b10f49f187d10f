//! Exhaustive optimum for small instances, and closed-form worst-case
//! bounds on the greedy solver's approximation ratio.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{multi_root_hop_distances, Design, Instance, NodeId, NodeMask, Route};
use crate::scalar::Scalar;

pub const DEFAULT_CANDIDATE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("{candidates} candidate sink/relay locations exceed the enumeration limit of {limit}")]
    TooLarge { candidates: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution<C: Scalar> {
    pub design: Design<C>,
    /// Subsets whose feasibility was tested.
    pub examined: u64,
}

/// Iterates all `k`-subsets of `0..n` as bitmasks (Gosper's hack).
fn combinations(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = 1u64 << n;
    let mut next = if k == 0 { Some(0u64) } else if k <= n { Some((1u64 << k) - 1) } else { None };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let n2 = (((r ^ cur) >> 2) / c) | r;
            (n2 < limit).then_some(n2)
        };
        Some(cur)
    })
}

fn pick(ids: &[NodeId], mask: u64) -> impl Iterator<Item = NodeId> + '_ {
    ids.iter().enumerate().filter(move |(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v)
}

/// Minimum-cost design by enumeration of sink/relay subsets.
///
/// Subsets are visited in classes of equal (cost, size), cheapest first.
/// Within the first class containing a feasible subset, the lexicographically
/// smallest id set wins. Returns `Ok(None)` when no subset is feasible.
pub fn exact_optimum<C: Scalar>(instance: &Instance<C>, limit: usize) -> Result<Option<ExactSolution<C>>, ExactError> {
    let sinks = instance.sinks();
    let relays = instance.relays();
    let candidates = sinks.len() + relays.len();
    if candidates > limit || candidates > 62 {
        return Err(ExactError::TooLarge { candidates, limit });
    }
    let n = instance.node_count();
    let h = instance.h_max();
    let sources = instance.sources();
    let mut examined = 0u64;

    let feasible = |sink_mask: u64, relay_mask: u64, examined: &mut u64| {
        *examined += 1;
        let roots: Vec<NodeId> = pick(sinks, sink_mask).collect();
        let mut allowed = NodeMask::from_ids(n, sources.iter().copied());
        for r in pick(relays, relay_mask) {
            allowed.insert(r);
        }
        let tree = multi_root_hop_distances(instance, &roots, &allowed);
        sources.iter().all(|&q| tree.within(q, h))
    };

    let all_relays = if relays.is_empty() { 0 } else { (1u64 << relays.len()) - 1 };
    // sink subsets that could work at all once every relay is deployed
    let mut viable_sinks: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for s in 1..=sinks.len() {
        for mask in combinations(sinks.len(), s) {
            if feasible(mask, all_relays, &mut examined) {
                viable_sinks.entry(s).or_default().push(mask);
            }
        }
    }
    if viable_sinks.is_empty() {
        return Ok(None);
    }

    let mut classes: Vec<(C, usize, usize)> = Vec::new();
    for &s in viable_sinks.keys() {
        for r in 0..=relays.len() {
            classes.push((instance.cost_of(s, r), s, r));
        }
    }
    classes.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then((a.1 + a.2).cmp(&(b.1 + b.2))).then(a.1.cmp(&b.1))
    });

    let mut i = 0;
    while i < classes.len() {
        let mut j = i;
        while j < classes.len() && classes[j].0 == classes[i].0 && classes[j].1 + classes[j].2 == classes[i].1 + classes[i].2 {
            j += 1;
        }
        let mut best: Option<(Vec<NodeId>, u64, u64)> = None;
        for &(_, s, r) in &classes[i..j] {
            for &sink_mask in &viable_sinks[&s] {
                for relay_mask in combinations(relays.len(), r) {
                    if !feasible(sink_mask, relay_mask, &mut examined) {
                        continue;
                    }
                    let mut key: Vec<NodeId> = pick(sinks, sink_mask).chain(pick(relays, relay_mask)).collect();
                    key.sort_unstable();
                    if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                        best = Some((key, sink_mask, relay_mask));
                    }
                }
            }
        }
        if let Some((_, sink_mask, relay_mask)) = best {
            let design = build_design(instance, sink_mask, relay_mask);
            return Ok(Some(ExactSolution { design, examined }));
        }
        i = j;
    }
    Ok(None)
}

fn build_design<C: Scalar>(instance: &Instance<C>, sink_mask: u64, relay_mask: u64) -> Design<C> {
    let selected_sinks: BTreeSet<NodeId> = pick(instance.sinks(), sink_mask).collect();
    let selected_relays: BTreeSet<NodeId> = pick(instance.relays(), relay_mask).collect();
    let roots: Vec<NodeId> = selected_sinks.iter().copied().collect();
    let mut allowed = NodeMask::from_ids(instance.node_count(), instance.sources().iter().copied());
    for &r in &selected_relays {
        allowed.insert(r);
    }
    let tree = multi_root_hop_distances(instance, &roots, &allowed);
    let routes = instance
        .sources()
        .iter()
        .map(|&q| {
            let path = tree.path_to_root(q).expect("feasible subset reaches every source");
            (q, Route { sink: *path.last().unwrap(), path })
        })
        .collect();
    Design::priced(instance, selected_sinks, selected_relays, routes)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("bounds need m > m_bar >= 1 (got m = {m}, m_bar = {m_bar})")]
    InvalidCounts { m: usize, m_bar: usize },
    #[error("cost ratio hypothesis c_s/c_r >= m_bar(m_bar+1)(h_max-1) does not hold")]
    HypothesisViolated,
}

/// Worst-case approximation guarantees under the cost-ratio hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalBounds<C: Scalar> {
    /// Guarantee achieved by any algorithm: `m (1 + 1/(m̄(m̄+1)))`.
    pub universal: C,
    /// Greedy guarantee: `max{ε + m/m̄, (m/2)(1 + 1/(m̄(m̄+1)))}`.
    pub smart_select: C,
    /// `⌈m/(m̄+1)⌉ - m/(m̄+1)`.
    pub epsilon: C,
}

/// True when `c_s ≥ c_r · m̄(m̄+1)(h_max−1)`.
pub fn cost_ratio_hypothesis<C: Scalar>(m_bar: usize, h_max: u32, c_s: &C, c_r: &C) -> bool {
    let factor = m_bar * (m_bar + 1) * h_max.saturating_sub(1) as usize;
    *c_s >= c_r.clone() * C::from_count(factor)
}

pub fn theoretical_bounds<C: Scalar>(
    m: usize,
    m_bar: usize,
    h_max: u32,
    c_s: &C,
    c_r: &C,
) -> Result<TheoreticalBounds<C>, BoundsError> {
    if m_bar < 1 || m <= m_bar {
        return Err(BoundsError::InvalidCounts { m, m_bar });
    }
    if !cost_ratio_hypothesis(m_bar, h_max, c_s, c_r) {
        return Err(BoundsError::HypothesisViolated);
    }
    let num = |v: usize| C::from_count(v);
    let one = C::one();
    let slack = one.clone() + one.clone() / num(m_bar * (m_bar + 1));
    let universal = num(m) * slack.clone();
    let ceil = (m + m_bar) / (m_bar + 1);
    let epsilon = num(ceil) - num(m) / num(m_bar + 1);
    let single = epsilon.clone() + num(m) / num(m_bar);
    let multi = num(m) / num(2) * slack;
    let smart_select = if single >= multi { single } else { multi };
    Ok(TheoreticalBounds { universal, smart_select, epsilon })
}
