use super::{Instance, NodeId};
use crate::scalar::Scalar;

/// Membership mask over the nodes of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeMask(Vec<bool>);

impl NodeMask {
    pub fn empty(n: usize) -> Self {
        NodeMask(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        NodeMask(vec![true; n])
    }

    pub fn from_ids(n: usize, ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut mask = Self::empty(n);
        for id in ids {
            mask.insert(id);
        }
        mask
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        self.0.get(v.index()).copied().unwrap_or(false)
    }

    #[inline]
    pub fn insert(&mut self, v: NodeId) {
        self.0[v.index()] = true;
    }

    #[inline]
    pub fn remove(&mut self, v: NodeId) {
        self.0[v.index()] = false;
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| NodeId::from_index(i))
    }
}

/// Breadth-first hop counts towards one or more roots.
///
/// `parent[v]` is the smallest-id neighbor one hop closer to a root, so
/// the tree is a pure function of the graph and the allowed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopTree {
    pub dist: Vec<Option<u32>>,
    pub parent: Vec<Option<NodeId>>,
}

impl HopTree {
    pub fn distance(&self, v: NodeId) -> Option<u32> {
        self.dist[v.index()]
    }

    pub fn within(&self, v: NodeId, h_max: u32) -> bool {
        self.distance(v).is_some_and(|d| d <= h_max)
    }

    /// Tree path from `v` to its root, both endpoints included.
    pub fn path_to_root(&self, v: NodeId) -> Option<Vec<NodeId>> {
        self.distance(v)?;
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur.index()] {
            path.push(p);
            cur = p;
        }
        Some(path)
    }
}

/// Hop distances from `root` over the subgraph induced by `allowed`
/// (the root is always included).
pub fn hop_distances<C: Scalar>(instance: &Instance<C>, root: NodeId, allowed: &NodeMask) -> HopTree {
    multi_root_hop_distances(instance, &[root], allowed)
}

/// Hop distances to the nearest of several roots. Roots are never expanded
/// through one another unless they are also in `allowed`.
pub fn multi_root_hop_distances<C: Scalar>(
    instance: &Instance<C>,
    roots: &[NodeId],
    allowed: &NodeMask,
) -> HopTree {
    let n = instance.node_count();
    let mut dist = vec![None; n];
    let mut parent = vec![None; n];
    let mut frontier: Vec<NodeId> = roots.to_vec();
    frontier.sort_unstable();
    frontier.dedup();
    for &r in &frontier {
        dist[r.index()] = Some(0);
    }
    let mut level = 0u32;
    while !frontier.is_empty() {
        level += 1;
        let mut next = Vec::new();
        // frontier is ascending, so the first discoverer is the smallest parent
        for &u in &frontier {
            for &v in instance.neighbors(u) {
                if dist[v.index()].is_none() && allowed.contains(v) {
                    dist[v.index()] = Some(level);
                    parent[v.index()] = Some(u);
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        frontier = next;
    }
    HopTree { dist, parent }
}
