//! Destroy-and-repair improvement on top of greedy selection.
//!
//! Each sweep removes one deployed sink at a time and rebuilds a design with
//! the greedy solver, once over the remaining deployed sinks and once over
//! every other potential sink. Strictly cheaper rebuilds replace the
//! incumbent; sweeps repeat while something improved.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::greedy::smart_select_with_sinks;
use crate::model::{Design, Instance, NodeId};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairConfig {
    /// Upper limit on sweeps.
    pub max_iterations: usize,
    pub record_trace: bool,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig { max_iterations: 25, record_trace: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rebuild {
    /// Greedy over the deployed sinks minus the pruned one.
    DeployedSinks,
    /// Greedy over every potential sink except the pruned one.
    AllSinks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Improvement<C: Scalar> {
    pub sweep: usize,
    pub pruned: NodeId,
    pub rebuild: Rebuild,
    pub cost: C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome<C: Scalar> {
    pub design: Design<C>,
    pub sweeps: usize,
    pub greedy_calls: usize,
    pub trace: Vec<Improvement<C>>,
}

/// Improves `initial` by pruning one sink at a time and rebuilding.
pub fn destroy_and_repair<C: Scalar>(
    instance: &Instance<C>,
    initial: &Design<C>,
    config: &RepairConfig,
) -> RepairOutcome<C> {
    let all_sinks: BTreeSet<NodeId> = instance.sinks().iter().copied().collect();
    let mut best = initial.clone();
    let mut trace = Vec::new();
    let mut sweeps = 0;
    let mut greedy_calls = 0;

    while sweeps < config.max_iterations.max(1) {
        let current = best.clone();
        sweeps += 1;
        let mut updated = false;
        for &pruned in &current.selected_sinks {
            let deployed: BTreeSet<_> = current.selected_sinks.iter().copied().filter(|&b| b != pruned).collect();
            let mut others = all_sinks.clone();
            others.remove(&pruned);
            for (rebuild, pool) in [(Rebuild::DeployedSinks, deployed), (Rebuild::AllSinks, others)] {
                if pool.is_empty() {
                    continue;
                }
                greedy_calls += 1;
                let candidate = match smart_select_with_sinks(instance, &pool) {
                    Ok(s) => s.design,
                    // infeasible or stalled rebuilds are simply not candidates
                    Err(_) => continue,
                };
                if candidate.cost.partial_cmp(&best.cost) == Some(Ordering::Less) {
                    if config.record_trace {
                        trace.push(Improvement { sweep: sweeps, pruned, rebuild, cost: candidate.cost.clone() });
                    }
                    best = candidate;
                    updated = true;
                }
            }
        }
        if !updated {
            break;
        }
    }

    RepairOutcome { design: best, sweeps, greedy_calls, trace }
}

/// Percentage saved by `improved` relative to `baseline`.
pub fn improvement_percent(baseline: f64, improved: f64) -> f64 {
    100.0 * (baseline - improved) / baseline
}
