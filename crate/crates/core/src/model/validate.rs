use std::collections::BTreeSet;
use std::fmt;

use super::{Design, Instance, NodeId, NodeKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownNode(NodeId),
    NotAPotentialSink(NodeId),
    NotAPotentialRelay(NodeId),
    MissingRoute,
    RouteForNonSource,
    PathStartMismatch,
    PathEndMismatch,
    SinkNotSelected(NodeId),
    MissingEdge(NodeId, NodeId),
    HopBoundExceeded { hops: usize, h_max: u32 },
    UnselectedInteriorNode(NodeId),
    SinkAsInteriorNode(NodeId),
    RepeatedNode(NodeId),
    CostMismatch { recorded: String, recomputed: String },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ViolationKind::*;
        match self {
            UnknownNode(v) => write!(f, "unknown node {v}"),
            NotAPotentialSink(v) => write!(f, "selected sink {v} is not a potential sink"),
            NotAPotentialRelay(v) => write!(f, "selected relay {v} is not a potential relay"),
            MissingRoute => write!(f, "missing route"),
            RouteForNonSource => write!(f, "route given for a node that is not a source"),
            PathStartMismatch => write!(f, "path does not start at its source"),
            PathEndMismatch => write!(f, "path does not end at its assigned sink"),
            SinkNotSelected(v) => write!(f, "assigned sink {v} is not selected"),
            MissingEdge(a, b) => write!(f, "path uses missing edge ({a}, {b})"),
            HopBoundExceeded { hops, h_max } => write!(f, "hop bound exceeded ({hops} > {h_max})"),
            UnselectedInteriorNode(v) => write!(f, "unselected interior node {v}"),
            SinkAsInteriorNode(v) => write!(f, "sink location {v} used as interior node"),
            RepeatedNode(v) => write!(f, "path revisits node {v}"),
            CostMismatch { recorded, recomputed } => {
                write!(f, "cost mismatch (recorded {recorded}, recomputed {recomputed})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Source whose route is at fault, when the violation is route-specific.
    pub source: Option<NodeId>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.source {
            Some(s) => write!(f, "source {s}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&ViolationKind) -> bool) -> bool {
        self.violations.iter().any(|v| pred(&v.kind))
    }
}

/// Checks every structural and cost requirement of `design` against
/// `instance`. Dangling ids are reported, never panicked on.
pub fn validate<C: Scalar>(instance: &Instance<C>, design: &Design<C>) -> ValidationReport {
    let mut out = Vec::new();
    let mut push = |source: Option<NodeId>, kind| out.push(Violation { source, kind });

    for &s in &design.selected_sinks {
        match instance.kind(s) {
            None => push(None, ViolationKind::UnknownNode(s)),
            Some(NodeKind::PotentialSink) => {}
            Some(_) => push(None, ViolationKind::NotAPotentialSink(s)),
        }
    }
    for &r in &design.selected_relays {
        match instance.kind(r) {
            None => push(None, ViolationKind::UnknownNode(r)),
            Some(NodeKind::PotentialRelay) => {}
            Some(_) => push(None, ViolationKind::NotAPotentialRelay(r)),
        }
    }

    for &q in instance.sources() {
        if !design.routes.contains_key(&q) {
            push(Some(q), ViolationKind::MissingRoute);
        }
    }

    for (&q, route) in &design.routes {
        if !instance.is_source(q) {
            push(Some(q), ViolationKind::RouteForNonSource);
            continue;
        }
        if route.path.first() != Some(&q) {
            push(Some(q), ViolationKind::PathStartMismatch);
        }
        if route.path.last() != Some(&route.sink) || route.path.len() < 2 {
            push(Some(q), ViolationKind::PathEndMismatch);
        }
        if !design.selected_sinks.contains(&route.sink) {
            push(Some(q), ViolationKind::SinkNotSelected(route.sink));
        }
        if route.hops() > instance.h_max() as usize {
            push(Some(q), ViolationKind::HopBoundExceeded { hops: route.hops(), h_max: instance.h_max() });
        }
        let mut seen = BTreeSet::new();
        for &v in &route.path {
            if instance.kind(v).is_none() {
                push(Some(q), ViolationKind::UnknownNode(v));
            } else if !seen.insert(v) {
                push(Some(q), ViolationKind::RepeatedNode(v));
            }
        }
        for pair in route.path.windows(2) {
            if !instance.has_edge(pair[0], pair[1]) {
                push(Some(q), ViolationKind::MissingEdge(pair[0], pair[1]));
            }
        }
        for &v in route.interior() {
            match instance.kind(v) {
                Some(NodeKind::Source) | None => {}
                Some(NodeKind::PotentialRelay) => {
                    if !design.selected_relays.contains(&v) {
                        push(Some(q), ViolationKind::UnselectedInteriorNode(v));
                    }
                }
                Some(_) => push(Some(q), ViolationKind::SinkAsInteriorNode(v)),
            }
        }
    }

    let recomputed = instance.cost_of(design.selected_sinks.len(), design.selected_relays.len());
    if recomputed != design.cost {
        push(
            None,
            ViolationKind::CostMismatch { recorded: design.cost.to_string(), recomputed: recomputed.to_string() },
        );
    }

    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Node, NodeKind::*, Route};
    use num_rational::Rational64;
    use std::collections::BTreeMap;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn t1() -> Instance {
        Instance::new(
            vec![Node::new(0, Source), Node::new(1, PotentialSink)],
            [(NodeId(0), NodeId(1))],
            r(10),
            r(1),
            1,
            None,
        )
        .unwrap()
    }

    fn direct_design(inst: &Instance) -> Design {
        let routes = BTreeMap::from([(NodeId(0), Route { sink: NodeId(1), path: vec![NodeId(0), NodeId(1)] })]);
        Design::priced(inst, BTreeSet::from([NodeId(1)]), BTreeSet::new(), routes)
    }

    #[test]
    fn direct_route_is_valid() {
        let inst = t1();
        let d = direct_design(&inst);
        assert!(validate(&inst, &d).ok());
        assert_eq!(d.cost, r(10));
    }

    #[test]
    fn zero_hop_bound_is_violated() {
        let inst = t1().with_h_max(0);
        let d = direct_design(&t1());
        let rep = validate(&inst, &d);
        assert!(rep.has(|k| matches!(k, ViolationKind::HopBoundExceeded { .. })));
        assert!(rep.violations[0].to_string().contains("hop bound exceeded"));
    }

    #[test]
    fn unselected_relay_on_path_is_reported() {
        let inst = Instance::new(
            vec![Node::new(0, Source), Node::new(1, PotentialRelay), Node::new(2, PotentialSink)],
            [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2))],
            r(10),
            r(1),
            3,
            None,
        )
        .unwrap();
        let routes = BTreeMap::from([(
            NodeId(0),
            Route { sink: NodeId(2), path: vec![NodeId(0), NodeId(1), NodeId(2)] },
        )]);
        let d = Design::priced(&inst, BTreeSet::from([NodeId(2)]), BTreeSet::new(), routes);
        let rep = validate(&inst, &d);
        assert!(!rep.ok());
        assert!(rep.violations.iter().any(|v| v.to_string().contains("unselected interior node")));
    }

    #[test]
    fn dangling_ids_and_cost_errors_are_violations() {
        let inst = t1();
        let mut d = direct_design(&inst);
        d.selected_relays.insert(NodeId(42));
        d.cost = r(3);
        let rep = validate(&inst, &d);
        assert!(rep.has(|k| *k == ViolationKind::UnknownNode(NodeId(42))));
        assert!(rep.has(|k| matches!(k, ViolationKind::CostMismatch { .. })));
    }

    #[test]
    fn missing_route_and_non_edge() {
        let inst = Instance::new(
            vec![Node::new(0, Source), Node::new(1, Source), Node::new(2, PotentialSink)],
            [(NodeId(0), NodeId(2))],
            r(10),
            r(1),
            2,
            None,
        )
        .unwrap();
        let routes = BTreeMap::from([(NodeId(0), Route { sink: NodeId(2), path: vec![NodeId(0), NodeId(1), NodeId(2)] })]);
        let d = Design::priced(&inst, BTreeSet::from([NodeId(2)]), BTreeSet::new(), routes);
        let rep = validate(&inst, &d);
        assert!(rep.violations.contains(&Violation { source: Some(NodeId(1)), kind: ViolationKind::MissingRoute }));
        assert!(rep.has(|k| matches!(k, ViolationKind::MissingEdge(..))));
    }
}
