//! Problem instances, candidate designs and the graph primitives shared by
//! every solver.
//!
//! An [`Instance`] is immutable once built. Node ids are dense (`0..n`) so
//! per-node state lives in plain vectors indexed by [`NodeId::index`].

mod bfs;
pub mod io;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use bfs::{hop_distances, multi_root_hop_distances, HopTree, NodeMask};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};
pub use io::{
    design_from_json, design_to_json, instance_from_json, instance_to_json, read_design, read_instance, write_design,
    write_instance, IoError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index fits in u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Source,
    PotentialRelay,
    PotentialSink,
    /// Super-sink of the augmented graph used by the LP bound. Never stored
    /// in an [`Instance`].
    VirtualSink,
}

impl NodeKind {
    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Source => "source",
            NodeKind::PotentialRelay => "relay",
            NodeKind::PotentialSink => "sink",
            NodeKind::VirtualSink => "virtual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Coordinates in meters; absent for explicit-edge instances.
    pub position: Option<(f64, f64)>,
}

impl Node {
    pub fn new(id: u32, kind: NodeKind) -> Self {
        Node { id: NodeId(id), kind, position: None }
    }

    pub fn at(id: u32, kind: NodeKind, x: f64, y: f64) -> Self {
        Node { id: NodeId(id), kind, position: Some((x, y)) }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("node ids must be dense from 0; id {0} is missing")]
    MissingId(u32),
    #[error("node {0} has kind {1:?}, which is not allowed in an instance")]
    ForbiddenKind(NodeId, NodeKind),
    #[error("positions must be given for all nodes or for none")]
    MixedPositions,
    #[error("edge ({0}, {1}) references an unknown node")]
    DanglingEdge(NodeId, NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("edge ({0}, {1}) is longer than r_max")]
    EdgeTooLong(NodeId, NodeId),
    #[error("instance has no source")]
    NoSource,
    #[error("instance has no potential sink")]
    NoSink,
    #[error("cost {0} must be nonnegative")]
    NegativeCost(&'static str),
    #[error("r_max must be positive")]
    BadRange,
    #[error("geometric construction requires a position on node {0}")]
    MissingPosition(NodeId),
}

/// Input graph of the placement problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<C: Scalar = Rational64> {
    nodes: Vec<Node>,
    edges: Vec<(NodeId, NodeId)>,
    c_s: C,
    c_r: C,
    h_max: u32,
    r_max: Option<f64>,
    adjacency: Vec<Vec<NodeId>>,
    sources: Vec<NodeId>,
    relays: Vec<NodeId>,
    sinks: Vec<NodeId>,
}

impl<C: Scalar> Instance<C> {
    /// Builds and checks an instance. Edges are normalized to `(min, max)`
    /// and sorted.
    ///
    /// `h_max = 0` is accepted; such an instance is simply infeasible.
    pub fn new(
        mut nodes: Vec<Node>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        c_s: C,
        c_r: C,
        h_max: u32,
        r_max: Option<f64>,
    ) -> Result<Self, ModelError> {
        nodes.sort_by_key(|n| n.id);
        for pair in nodes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(ModelError::DuplicateId(pair[0].id));
            }
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.id.index() != i {
                return Err(ModelError::MissingId(i as u32));
            }
            if node.kind == NodeKind::VirtualSink {
                return Err(ModelError::ForbiddenKind(node.id, node.kind));
            }
        }
        let with_pos = nodes.iter().filter(|n| n.position.is_some()).count();
        if with_pos != 0 && with_pos != nodes.len() {
            return Err(ModelError::MixedPositions);
        }
        if c_s.is_negative() {
            return Err(ModelError::NegativeCost("c_s"));
        }
        if c_r.is_negative() {
            return Err(ModelError::NegativeCost("c_r"));
        }
        if let Some(r) = r_max {
            if r.is_nan() || r <= 0.0 {
                return Err(ModelError::BadRange);
            }
        }

        let n = nodes.len();
        let mut normalized = BTreeSet::new();
        for (a, b) in edges {
            if a.index() >= n || b.index() >= n {
                return Err(ModelError::DanglingEdge(a, b));
            }
            if a == b {
                return Err(ModelError::SelfLoop(a));
            }
            let key = (a.min(b), a.max(b));
            if !normalized.insert(key) {
                return Err(ModelError::DuplicateEdge(key.0, key.1));
            }
            if let (Some(r), Some(pa), Some(pb)) =
                (r_max, nodes[a.index()].position, nodes[b.index()].position)
            {
                if squared_distance(pa, pb) > r * r {
                    return Err(ModelError::EdgeTooLong(key.0, key.1));
                }
            }
        }
        let edges: Vec<_> = normalized.into_iter().collect();

        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a.index()].push(b);
            adjacency[b.index()].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let of_kind = |k: NodeKind| nodes.iter().filter(|n| n.kind == k).map(|n| n.id).collect::<Vec<_>>();
        let sources = of_kind(NodeKind::Source);
        let relays = of_kind(NodeKind::PotentialRelay);
        let sinks = of_kind(NodeKind::PotentialSink);
        if sources.is_empty() {
            return Err(ModelError::NoSource);
        }
        if sinks.is_empty() {
            return Err(ModelError::NoSink);
        }

        Ok(Instance { nodes, edges, c_s, c_r, h_max, r_max, adjacency, sources, relays, sinks })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.index()]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a.index() < self.nodes.len() && self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    pub fn kind(&self, v: NodeId) -> Option<NodeKind> {
        self.nodes.get(v.index()).map(|n| n.kind)
    }

    pub fn is_source(&self, v: NodeId) -> bool {
        self.kind(v) == Some(NodeKind::Source)
    }

    pub fn is_relay(&self, v: NodeId) -> bool {
        self.kind(v) == Some(NodeKind::PotentialRelay)
    }

    pub fn is_sink(&self, v: NodeId) -> bool {
        self.kind(v) == Some(NodeKind::PotentialSink)
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn relays(&self) -> &[NodeId] {
        &self.relays
    }

    pub fn sinks(&self) -> &[NodeId] {
        &self.sinks
    }

    pub fn sink_cost(&self) -> &C {
        &self.c_s
    }

    pub fn relay_cost(&self) -> &C {
        &self.c_r
    }

    pub fn h_max(&self) -> u32 {
        self.h_max
    }

    pub fn r_max(&self) -> Option<f64> {
        self.r_max
    }

    pub fn is_geometric(&self) -> bool {
        self.nodes.first().is_some_and(|n| n.position.is_some())
    }

    /// Deployment cost of `sinks` sinks and `relays` relays.
    pub fn cost_of(&self, sinks: usize, relays: usize) -> C {
        self.c_s.clone() * C::from_count(sinks) + self.c_r.clone() * C::from_count(relays)
    }

    /// Same graph with a different hop bound.
    pub fn with_h_max(&self, h_max: u32) -> Self {
        Instance { h_max, ..self.clone() }
    }

    /// Same graph with different unit costs.
    pub fn with_costs(&self, c_s: C, c_r: C) -> Self {
        Instance { c_s, c_r, ..self.clone() }
    }

    /// Mask containing every source and potential relay, but no sink.
    pub fn sources_and_relays_mask(&self) -> NodeMask {
        let mut mask = NodeMask::empty(self.node_count());
        for &v in self.sources.iter().chain(&self.relays) {
            mask.insert(v);
        }
        mask
    }
}

pub(crate) fn squared_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// Builds the unit-disk graph of the given nodes: every pair within `r_max`
/// meters is linked, except sink–sink pairs.
pub fn build_geometric<C: Scalar>(
    nodes: Vec<Node>,
    r_max: f64,
    c_s: C,
    c_r: C,
    h_max: u32,
) -> Result<Instance<C>, ModelError> {
    if r_max.is_nan() || r_max <= 0.0 {
        return Err(ModelError::BadRange);
    }
    let mut seen = BTreeSet::new();
    for node in &nodes {
        if !seen.insert(node.id) {
            return Err(ModelError::DuplicateId(node.id));
        }
        if node.position.is_none() {
            return Err(ModelError::MissingPosition(node.id));
        }
    }
    let mut edges = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            if a.kind == NodeKind::PotentialSink && b.kind == NodeKind::PotentialSink {
                continue;
            }
            let (pa, pb) = (a.position.unwrap(), b.position.unwrap());
            if squared_distance(pa, pb) <= r_max * r_max {
                edges.push((a.id.min(b.id), a.id.max(b.id)));
            }
        }
    }
    Instance::new(nodes, edges, c_s, c_r, h_max, Some(r_max))
}

/// Route of one source: the sink it reports to and the node path
/// `source, ..., sink`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub sink: NodeId,
    pub path: Vec<NodeId>,
}

impl Route {
    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    /// Nodes strictly between the source and the sink.
    pub fn interior(&self) -> &[NodeId] {
        if self.path.len() <= 2 {
            &[]
        } else {
            &self.path[1..self.path.len() - 1]
        }
    }
}

/// A candidate solution: deployed sinks and relays plus one route per
/// source.
#[derive(Debug, Clone, PartialEq)]
pub struct Design<C: Scalar = Rational64> {
    pub selected_sinks: BTreeSet<NodeId>,
    pub selected_relays: BTreeSet<NodeId>,
    pub routes: BTreeMap<NodeId, Route>,
    pub cost: C,
}

impl<C: Scalar> Design<C> {
    /// Assembles a design and prices it with the instance's unit costs.
    pub fn priced(
        instance: &Instance<C>,
        selected_sinks: BTreeSet<NodeId>,
        selected_relays: BTreeSet<NodeId>,
        routes: BTreeMap<NodeId, Route>,
    ) -> Self {
        let cost = instance.cost_of(selected_sinks.len(), selected_relays.len());
        Design { selected_sinks, selected_relays, routes, cost }
    }

    pub fn node_count(&self) -> usize {
        self.selected_sinks.len() + self.selected_relays.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use NodeKind::*;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    #[test]
    fn geometric_edges_respect_range() {
        let near = build_geometric(
            vec![Node::at(0, Source, 0.0, 0.0), Node::at(1, PotentialSink, 10.0, 0.0)],
            20.0,
            r(10),
            r(1),
            5,
        )
        .unwrap();
        assert_eq!(near.edges(), &[(NodeId(0), NodeId(1))]);

        let far = build_geometric(
            vec![Node::at(0, Source, 0.0, 0.0), Node::at(1, PotentialSink, 30.0, 0.0)],
            20.0,
            r(10),
            r(1),
            5,
        )
        .unwrap();
        assert!(far.edges().is_empty());
    }

    #[test]
    fn geometric_build_skips_sink_pairs() {
        let inst = build_geometric(
            vec![
                Node::at(0, Source, 0.0, 0.0),
                Node::at(1, PotentialSink, 5.0, 0.0),
                Node::at(2, PotentialSink, 10.0, 0.0),
            ],
            20.0,
            r(10),
            r(1),
            5,
        )
        .unwrap();
        assert_eq!(inst.edges(), &[(NodeId(0), NodeId(1)), (NodeId(0), NodeId(2))]);
    }

    #[test]
    fn geometric_rejects_duplicate_ids() {
        let err = build_geometric(
            vec![Node::at(0, Source, 0.0, 0.0), Node::at(0, PotentialSink, 1.0, 0.0)],
            20.0,
            r(10),
            r(1),
            5,
        )
        .unwrap_err();
        assert_eq!(err, ModelError::DuplicateId(NodeId(0)));
    }

    #[test]
    fn instance_rejects_malformed_edges() {
        let nodes = || vec![Node::new(0, Source), Node::new(1, PotentialSink)];
        let e = |a, b| (NodeId(a), NodeId(b));
        assert_eq!(
            Instance::new(nodes(), [e(0, 0)], r(1), r(1), 1, None).unwrap_err(),
            ModelError::SelfLoop(NodeId(0))
        );
        assert_eq!(
            Instance::new(nodes(), [e(0, 1), e(1, 0)], r(1), r(1), 1, None).unwrap_err(),
            ModelError::DuplicateEdge(NodeId(0), NodeId(1))
        );
        assert_eq!(
            Instance::new(nodes(), [e(0, 7)], r(1), r(1), 1, None).unwrap_err(),
            ModelError::DanglingEdge(NodeId(0), NodeId(7))
        );
        assert_eq!(
            Instance::new(vec![Node::new(0, Source)], [], r(1), r(1), 1, None).unwrap_err(),
            ModelError::NoSink
        );
        assert_eq!(
            Instance::new(nodes(), [], r(-1), r(1), 1, None).unwrap_err(),
            ModelError::NegativeCost("c_s")
        );
    }

    #[test]
    fn instance_requires_dense_ids_and_consistent_positions() {
        let err = Instance::new(
            vec![Node::new(0, Source), Node::new(2, PotentialSink)],
            [],
            r(1),
            r(1),
            1,
            None,
        )
        .unwrap_err();
        assert_eq!(err, ModelError::MissingId(1));

        let err = Instance::new(
            vec![Node::at(0, Source, 0.0, 0.0), Node::new(1, PotentialSink)],
            [],
            r(1),
            r(1),
            1,
            None,
        )
        .unwrap_err();
        assert_eq!(err, ModelError::MixedPositions);
    }

    #[test]
    fn cost_is_linear_in_counts() {
        let inst = Instance::new(
            vec![Node::new(0, Source), Node::new(1, PotentialSink)],
            [(NodeId(0), NodeId(1))],
            r(10),
            r(1),
            1,
            None,
        )
        .unwrap();
        assert_eq!(inst.cost_of(2, 3), r(23));
    }
}
