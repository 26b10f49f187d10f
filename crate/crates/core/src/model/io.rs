//! JSON documents for instances and designs.
//!
//! Keys are emitted in a fixed order and arrays sorted by id, so identical
//! values always serialize to identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Design, Instance, ModelError, Node, NodeId, NodeKind, Route};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("field `{0}` is not a valid cost")]
    BadNumber(&'static str),
    #[error("invalid instance: {0}")]
    Invalid(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Source,
    Relay,
    Sink,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u32,
    kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    nodes: Vec<NodeDoc>,
    edges: Vec<[u32; 2]>,
    c_s: serde_json::Number,
    c_r: serde_json::Number,
    h_max: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteDoc {
    source: u32,
    sink: u32,
    path: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DesignDoc {
    sinks: Vec<u32>,
    relays: Vec<u32>,
    routes: Vec<RouteDoc>,
    cost: serde_json::Number,
}

fn parse<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| IoError::Schema { path: e.path().to_string(), message: e.inner().to_string() })
}

fn render<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn instance_to_json<C: Scalar>(instance: &Instance<C>) -> String {
    let nodes = instance
        .nodes()
        .iter()
        .map(|n| NodeDoc {
            id: n.id.0,
            kind: match n.kind {
                NodeKind::Source => KindDoc::Source,
                NodeKind::PotentialRelay => KindDoc::Relay,
                NodeKind::PotentialSink => KindDoc::Sink,
                NodeKind::VirtualSink => unreachable!("instances never hold a virtual sink"),
            },
            x: n.position.map(|p| p.0),
            y: n.position.map(|p| p.1),
        })
        .collect();
    render(&InstanceDoc {
        nodes,
        edges: instance.edges().iter().map(|&(a, b)| [a.0, b.0]).collect(),
        c_s: instance.sink_cost().to_json(),
        c_r: instance.relay_cost().to_json(),
        h_max: instance.h_max(),
        r_max: instance.r_max(),
    })
}

pub fn instance_from_json<C: Scalar>(text: &str) -> Result<Instance<C>, IoError> {
    let doc: InstanceDoc = parse(text)?;
    let mut nodes = Vec::with_capacity(doc.nodes.len());
    for (i, n) in doc.nodes.iter().enumerate() {
        let kind = match n.kind {
            KindDoc::Source => NodeKind::Source,
            KindDoc::Relay => NodeKind::PotentialRelay,
            KindDoc::Sink => NodeKind::PotentialSink,
        };
        let position = match (n.x, n.y) {
            (Some(x), Some(y)) => Some((x, y)),
            (None, None) => None,
            _ => {
                return Err(IoError::Schema {
                    path: format!("nodes[{i}]"),
                    message: "x and y must be given together".into(),
                })
            }
        };
        nodes.push(Node { id: NodeId(n.id), kind, position });
    }
    let c_s = C::from_json(&doc.c_s).ok_or(IoError::BadNumber("c_s"))?;
    let c_r = C::from_json(&doc.c_r).ok_or(IoError::BadNumber("c_r"))?;
    let edges = doc.edges.iter().map(|&[a, b]| (NodeId(a), NodeId(b)));
    Ok(Instance::new(nodes, edges, c_s, c_r, doc.h_max, doc.r_max)?)
}

pub fn design_to_json<C: Scalar>(design: &Design<C>) -> String {
    render(&DesignDoc {
        sinks: design.selected_sinks.iter().map(|v| v.0).collect(),
        relays: design.selected_relays.iter().map(|v| v.0).collect(),
        routes: design
            .routes
            .iter()
            .map(|(q, r)| RouteDoc { source: q.0, sink: r.sink.0, path: r.path.iter().map(|v| v.0).collect() })
            .collect(),
        cost: design.cost.to_json(),
    })
}

/// Parses a design document. Structural checks against an instance are
/// left to [`validate`](super::validate).
pub fn design_from_json<C: Scalar>(text: &str) -> Result<Design<C>, IoError> {
    let doc: DesignDoc = parse(text)?;
    let routes: BTreeMap<_, _> = doc
        .routes
        .into_iter()
        .map(|r| (NodeId(r.source), Route { sink: NodeId(r.sink), path: r.path.into_iter().map(NodeId).collect() }))
        .collect();
    Ok(Design {
        selected_sinks: doc.sinks.into_iter().map(NodeId).collect::<BTreeSet<_>>(),
        selected_relays: doc.relays.into_iter().map(NodeId).collect(),
        routes,
        cost: C::from_json(&doc.cost).ok_or(IoError::BadNumber("cost"))?,
    })
}

pub fn read_instance<C: Scalar>(path: impl AsRef<Path>) -> Result<Instance<C>, IoError> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn write_instance<C: Scalar>(path: impl AsRef<Path>, instance: &Instance<C>) -> Result<(), IoError> {
    Ok(fs::write(path, instance_to_json(instance))?)
}

pub fn read_design<C: Scalar>(path: impl AsRef<Path>) -> Result<Design<C>, IoError> {
    design_from_json(&fs::read_to_string(path)?)
}

pub fn write_design<C: Scalar>(path: impl AsRef<Path>, design: &Design<C>) -> Result<(), IoError> {
    Ok(fs::write(path, design_to_json(design))?)
}
