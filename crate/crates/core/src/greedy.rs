//! Greedy sink and relay selection.
//!
//! The selection loop is a weighted set cover greedy where the weight of a
//! candidate sink is its deployment cost plus the relays needed to reach its
//! still-uncovered sources, divided by the number of sources it covers.
//! Relays bought in earlier iterations are free afterwards.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{hop_distances, Design, Instance, NodeId, NodeMask, Route};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("infeasible: source {witness} cannot reach any sink within the hop bound")]
    Infeasible { witness: NodeId },
    #[error("sink {sink} has no reachable target")]
    EmptyEvaluation { sink: NodeId },
    #[error("greedy selection stalled with {uncovered} sources uncovered")]
    Stalled { uncovered: usize },
}

/// Outcome of the global reachability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Fewest hops from each source to any sink, through sources and relays.
    pub best_hops: BTreeMap<NodeId, Option<u32>>,
    /// Smallest-id source that cannot meet the hop bound.
    pub witness: Option<NodeId>,
}

/// Per-sink cover sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Covers {
    /// Sources within `h_max` hops of each sink.
    pub sources: BTreeMap<NodeId, BTreeSet<NodeId>>,
    /// Relays within `h_max - 1` hops of each sink.
    pub relays: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinkEvaluation<C: Scalar> {
    pub sink: NodeId,
    /// Relays carried by the routes of `covered_now`, free ones included.
    pub relay_set: BTreeSet<NodeId>,
    pub covered_now: BTreeSet<NodeId>,
    /// Targets that could not reach the sink within the hop bound.
    pub excluded: BTreeSet<NodeId>,
    pub per_source_cost: C,
    pub routes: BTreeMap<NodeId, Route>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pick<C: Scalar> {
    pub sink: NodeId,
    pub relays: BTreeSet<NodeId>,
    pub covered: BTreeSet<NodeId>,
    pub per_source_cost: C,
    /// Sources still uncovered when this pick was made.
    pub uncovered_before: usize,
}

/// Greedy bookkeeping, as it stands when the loop stops.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverState<C: Scalar> {
    pub iteration: usize,
    pub remaining_sinks: BTreeSet<NodeId>,
    pub uncovered: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pub candidate_relays: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pub zero_cost_relays: BTreeSet<NodeId>,
    pub covered: BTreeSet<NodeId>,
    pub picked: Vec<Pick<C>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmartSelect<C: Scalar> {
    pub design: Design<C>,
    pub state: CoverState<C>,
    /// True when one sink reached every source without relays.
    pub single_sink: bool,
}

impl<C: Scalar> SmartSelect<C> {
    /// Sinks in the order the greedy loop picked them.
    pub fn sink_sequence(&self) -> Vec<NodeId> {
        self.state.picked.iter().map(|p| p.sink).collect()
    }
}

fn all_sinks<C: Scalar>(instance: &Instance<C>) -> BTreeSet<NodeId> {
    instance.sinks().iter().copied().collect()
}

fn route_from_tree(tree: &crate::model::HopTree, source: NodeId, sink: NodeId) -> Route {
    let path = tree.path_to_root(source).expect("source reachable");
    debug_assert_eq!(path.last(), Some(&sink));
    Route { sink, path }
}

/// Returns a zero-relay design if one sink reaches every source over the
/// graph restricted to sources and sinks.
pub fn single_sink_no_relay<C: Scalar>(instance: &Instance<C>) -> Option<Design<C>> {
    single_sink_no_relay_among(instance, &all_sinks(instance))
}

fn single_sink_no_relay_among<C: Scalar>(instance: &Instance<C>, sinks: &BTreeSet<NodeId>) -> Option<Design<C>> {
    let h = instance.h_max();
    let mut allowed = NodeMask::from_ids(instance.node_count(), instance.sources().iter().copied());
    for &b in sinks {
        allowed.insert(b);
        let tree = hop_distances(instance, b, &allowed);
        allowed.remove(b);
        if instance.sources().iter().all(|&q| tree.within(q, h)) {
            let routes = instance.sources().iter().map(|&q| (q, route_from_tree(&tree, q, b))).collect();
            return Some(Design::priced(instance, BTreeSet::from([b]), BTreeSet::new(), routes));
        }
    }
    None
}

/// Decides whether every source can reach some sink within `h_max` hops
/// when all relays are deployed.
pub fn check_feasibility<C: Scalar>(instance: &Instance<C>) -> Feasibility {
    check_feasibility_among(instance, &all_sinks(instance))
}

fn check_feasibility_among<C: Scalar>(instance: &Instance<C>, sinks: &BTreeSet<NodeId>) -> Feasibility {
    let mut best: BTreeMap<NodeId, Option<u32>> = instance.sources().iter().map(|&q| (q, None)).collect();
    let mut allowed = instance.sources_and_relays_mask();
    for &b in sinks {
        allowed.insert(b);
        let tree = hop_distances(instance, b, &allowed);
        allowed.remove(b);
        for (q, slot) in best.iter_mut() {
            if let Some(d) = tree.distance(*q) {
                *slot = Some(slot.map_or(d, |cur| cur.min(d)));
            }
        }
    }
    let h = instance.h_max();
    let witness = best.iter().find(|(_, d)| !d.is_some_and(|d| d <= h)).map(|(q, _)| *q);
    Feasibility { feasible: witness.is_none(), best_hops: best, witness }
}

/// Cover sets of every sink, or the uncovered witness source.
pub fn compute_covers<C: Scalar>(instance: &Instance<C>) -> Result<Covers, SolveError> {
    compute_covers_among(instance, &all_sinks(instance))
}

fn compute_covers_among<C: Scalar>(instance: &Instance<C>, sinks: &BTreeSet<NodeId>) -> Result<Covers, SolveError> {
    let h = instance.h_max();
    let mut covers = Covers { sources: BTreeMap::new(), relays: BTreeMap::new() };
    let mut allowed = instance.sources_and_relays_mask();
    let mut union = BTreeSet::new();
    for &b in sinks {
        allowed.insert(b);
        let tree = hop_distances(instance, b, &allowed);
        allowed.remove(b);
        let q: BTreeSet<_> = instance.sources().iter().copied().filter(|&q| tree.within(q, h)).collect();
        let r: BTreeSet<_> = match h.checked_sub(1) {
            Some(limit) => instance.relays().iter().copied().filter(|&r| tree.within(r, limit)).collect(),
            None => BTreeSet::new(),
        };
        union.extend(q.iter().copied());
        covers.sources.insert(b, q);
        covers.relays.insert(b, r);
    }
    if let Some(&witness) = instance.sources().iter().find(|q| !union.contains(q)) {
        return Err(SolveError::Infeasible { witness });
    }
    Ok(covers)
}

/// Chooses a small relay subset connecting `targets` to `sink`.
///
/// Phase 1 takes the union of relays on the shortest-path tree from the
/// sink through all sources and `candidates`. Phase 2 drops paid relays one
/// at a time, highest id first, as long as every target stays within the
/// hop bound, repeating until a full pass removes nothing. Relays in
/// `zero_cost` are always usable and never counted.
pub fn minimize_relays<C: Scalar>(
    instance: &Instance<C>,
    sink: NodeId,
    targets: &BTreeSet<NodeId>,
    candidates: &BTreeSet<NodeId>,
    zero_cost: &BTreeSet<NodeId>,
) -> Result<SinkEvaluation<C>, SolveError> {
    let h = instance.h_max();
    let n = instance.node_count();
    let mut base = NodeMask::from_ids(n, instance.sources().iter().copied());
    base.insert(sink);
    for &r in zero_cost {
        base.insert(r);
    }

    let mut phase1 = base.clone();
    for &r in candidates {
        phase1.insert(r);
    }
    let tree = hop_distances(instance, sink, &phase1);
    let (covered_now, excluded): (BTreeSet<_>, BTreeSet<_>) = targets.iter().partition(|&&q| tree.within(q, h));
    if covered_now.is_empty() {
        return Err(SolveError::EmptyEvaluation { sink });
    }

    let mut paid: BTreeSet<NodeId> = BTreeSet::new();
    for &q in &covered_now {
        for v in tree.path_to_root(q).unwrap() {
            if instance.is_relay(v) && !zero_cost.contains(&v) {
                paid.insert(v);
            }
        }
    }

    let reaches_all = |relays: &BTreeSet<NodeId>| {
        let mut allowed = base.clone();
        for &r in relays {
            allowed.insert(r);
        }
        let t = hop_distances(instance, sink, &allowed);
        covered_now.iter().all(|&q| t.within(q, h))
    };

    // all paid relays share one unit cost, so (cost, id) descending is id descending
    loop {
        let mut removed_any = false;
        let order: Vec<NodeId> = paid.iter().rev().copied().collect();
        for r in order {
            paid.remove(&r);
            if reaches_all(&paid) {
                removed_any = true;
            } else {
                paid.insert(r);
            }
        }
        if !removed_any {
            break;
        }
    }

    let mut allowed = base;
    for &r in &paid {
        allowed.insert(r);
    }
    let tree = hop_distances(instance, sink, &allowed);
    let mut routes = BTreeMap::new();
    let mut relay_set = BTreeSet::new();
    for &q in &covered_now {
        let route = route_from_tree(&tree, q, sink);
        relay_set.extend(route.interior().iter().copied().filter(|&v| instance.is_relay(v)));
        routes.insert(q, route);
    }
    let paid_used = relay_set.iter().filter(|r| !zero_cost.contains(r)).count();
    let per_source_cost = instance.cost_of(1, paid_used) / C::from_count(covered_now.len());

    Ok(SinkEvaluation { sink, relay_set, covered_now, excluded, per_source_cost, routes })
}

/// Orders candidate evaluations: cheaper per source first, then more
/// sources covered, then smaller sink id.
fn better<C: Scalar>(a: &SinkEvaluation<C>, b: &SinkEvaluation<C>) -> bool {
    match a.per_source_cost.partial_cmp(&b.per_source_cost).unwrap_or(Ordering::Equal) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => match a.covered_now.len().cmp(&b.covered_now.len()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => a.sink < b.sink,
        },
    }
}

/// Runs the full greedy selection over every potential sink.
pub fn smart_select<C: Scalar>(instance: &Instance<C>) -> Result<SmartSelect<C>, SolveError> {
    smart_select_with_sinks(instance, &all_sinks(instance))
}

/// Greedy selection restricted to the given sink locations. All relays stay
/// available.
pub fn smart_select_with_sinks<C: Scalar>(
    instance: &Instance<C>,
    sinks: &BTreeSet<NodeId>,
) -> Result<SmartSelect<C>, SolveError> {
    let all_sources: BTreeSet<NodeId> = instance.sources().iter().copied().collect();

    if let Some(design) = single_sink_no_relay_among(instance, sinks) {
        let sink = *design.selected_sinks.iter().next().unwrap();
        let state = CoverState {
            iteration: 1,
            remaining_sinks: sinks.iter().copied().filter(|&b| b != sink).collect(),
            uncovered: BTreeMap::new(),
            candidate_relays: BTreeMap::new(),
            zero_cost_relays: BTreeSet::new(),
            covered: all_sources.clone(),
            picked: vec![Pick {
                sink,
                relays: BTreeSet::new(),
                covered: all_sources.clone(),
                per_source_cost: instance.sink_cost().clone() / C::from_count(all_sources.len()),
                uncovered_before: all_sources.len(),
            }],
        };
        return Ok(SmartSelect { design, state, single_sink: true });
    }

    let feasibility = check_feasibility_among(instance, sinks);
    if let Some(witness) = feasibility.witness {
        return Err(SolveError::Infeasible { witness });
    }
    let covers = compute_covers_among(instance, sinks)?;

    let mut state = CoverState {
        iteration: 0,
        remaining_sinks: sinks.clone(),
        uncovered: covers.sources.clone(),
        candidate_relays: covers.relays,
        zero_cost_relays: BTreeSet::new(),
        covered: BTreeSet::new(),
        picked: Vec::new(),
    };
    let mut routes = BTreeMap::new();

    while state.covered.len() < all_sources.len() {
        let mut best: Option<SinkEvaluation<C>> = None;
        for &b in &state.remaining_sinks {
            let targets = &state.uncovered[&b];
            if targets.is_empty() {
                continue;
            }
            let eval = match minimize_relays(instance, b, targets, &state.candidate_relays[&b], &state.zero_cost_relays) {
                Ok(e) => e,
                Err(SolveError::EmptyEvaluation { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|cur| better(&eval, cur)) {
                best = Some(eval);
            }
        }
        let Some(chosen) = best else {
            return Err(SolveError::Stalled { uncovered: all_sources.len() - state.covered.len() });
        };

        let uncovered_before = all_sources.len() - state.covered.len();
        state.covered.extend(chosen.covered_now.iter().copied());
        state.zero_cost_relays.extend(chosen.relay_set.iter().copied());
        state.remaining_sinks.remove(&chosen.sink);
        state.uncovered.remove(&chosen.sink);
        for set in state.uncovered.values_mut() {
            set.retain(|q| !chosen.covered_now.contains(q));
        }
        routes.extend(chosen.routes);
        state.picked.push(Pick {
            sink: chosen.sink,
            relays: chosen.relay_set,
            covered: chosen.covered_now,
            per_source_cost: chosen.per_source_cost,
            uncovered_before,
        });
        state.iteration += 1;
    }

    let selected_sinks = state.picked.iter().map(|p| p.sink).collect();
    let selected_relays = state.zero_cost_relays.clone();
    let design = Design::priced(instance, selected_sinks, selected_relays, routes);
    Ok(SmartSelect { design, state, single_sink: false })
}
