//! Lower bound from the LP relaxation of the node-cut formulation.
//!
//! Every potential sink is joined to an extra virtual sink `b0`. A source is
//! served when some path reaches `b0`; the relaxation asks that every node
//! set separating a source from `b0` carries routing weight at least one.
//! Such cuts are generated lazily by a max-flow separation oracle.

mod maxflow;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Solution, Variable};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::greedy::check_feasibility;
use crate::model::{Design, Instance, NodeId, NodeKind};
use crate::scalar::{LpFloat, Scalar};

pub use maxflow::FlowNetwork;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpBoundError {
    #[error("instance is infeasible: source {witness} cannot reach any sink within the hop bound")]
    Infeasible { witness: NodeId },
    #[error("LP failure in round {round}: {message}")]
    Numerical { round: usize, message: String },
    #[error("{cut:?} does not separate source {origin} from the virtual sink")]
    NotACut { origin: NodeId, cut: Vec<NodeId> },
}

/// The instance plus a virtual sink adjacent to every potential sink.
#[derive(Debug, Clone)]
pub struct AugmentedGraph<'a, C: Scalar> {
    base: &'a Instance<C>,
    virtual_sink: NodeId,
    adjacency: Vec<Vec<NodeId>>,
    pool: Vec<(NodeId, C)>,
}

pub fn augment<C: Scalar>(instance: &Instance<C>) -> AugmentedGraph<'_, C> {
    let n = instance.node_count();
    let b0 = NodeId::from_index(n);
    let mut adjacency: Vec<Vec<NodeId>> = (0..n).map(|i| instance.neighbors(NodeId::from_index(i)).to_vec()).collect();
    adjacency.push(instance.sinks().to_vec());
    for &b in instance.sinks() {
        adjacency[b.index()].push(b0);
    }
    let mut pool: Vec<(NodeId, C)> = instance
        .relays()
        .iter()
        .map(|&r| (r, instance.relay_cost().clone()))
        .chain(instance.sinks().iter().map(|&b| (b, instance.sink_cost().clone())))
        .collect();
    pool.sort_by_key(|p| p.0);
    AugmentedGraph { base: instance, virtual_sink: b0, adjacency, pool }
}

impl<'a, C: Scalar> AugmentedGraph<'a, C> {
    pub fn base(&self) -> &'a Instance<C> {
        self.base
    }

    pub fn virtual_sink(&self) -> NodeId {
        self.virtual_sink
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.base.edges().len() + self.base.sinks().len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.index()]
    }

    pub fn kind(&self, v: NodeId) -> Option<NodeKind> {
        if v == self.virtual_sink {
            Some(NodeKind::VirtualSink)
        } else {
            self.base.kind(v)
        }
    }

    /// Relays and potential sinks with their costs, sorted by id.
    pub fn pool(&self) -> &[(NodeId, C)] {
        &self.pool
    }

    /// Hop bound on paths from a source to the virtual sink.
    pub fn hop_bound(&self) -> u32 {
        self.base.h_max() + 1
    }

    /// Whether removing `cut` leaves no path from `source` to the virtual sink.
    pub fn disconnects(&self, source: NodeId, cut: &[NodeId]) -> bool {
        let mut blocked = vec![false; self.node_count()];
        for &v in cut {
            blocked[v.index()] = true;
        }
        let mut seen = vec![false; self.node_count()];
        seen[source.index()] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            if u == self.virtual_sink {
                return false;
            }
            for &v in self.neighbors(u) {
                if !seen[v.index()] && !blocked[v.index()] {
                    seen[v.index()] = true;
                    queue.push_back(v);
                }
            }
        }
        true
    }
}

/// Node set whose deletion separates `source` from the virtual sink.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CutConstraint {
    source: NodeId,
    cut: Vec<NodeId>,
}

impl CutConstraint {
    pub fn new<C: Scalar>(
        graph: &AugmentedGraph<'_, C>,
        source: NodeId,
        cut: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, LpBoundError> {
        let cut: Vec<NodeId> = cut.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let legal = cut.iter().all(|&v| v != source && v.index() < graph.virtual_sink.index());
        if !graph.base.is_source(source) || !legal || !graph.disconnects(source, &cut) {
            return Err(LpBoundError::NotACut { origin: source, cut });
        }
        Ok(CutConstraint { source, cut })
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    /// Sorted node ids.
    pub fn cut(&self) -> &[NodeId] {
        &self.cut
    }

    pub fn weight<F: LpFloat>(&self, point: &FractionalPoint<F>) -> F {
        let y = &point.routing[&self.source];
        self.cut.iter().fold(F::zero(), |acc, v| acc + y[v.index()])
    }

    pub fn is_satisfied_by<F: LpFloat>(&self, point: &FractionalPoint<F>, tolerance: F) -> bool {
        self.weight(point) >= F::one() - tolerance
    }
}

/// Values of the relaxed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPoint<F: LpFloat> {
    /// Per source, routing weight `y_{j,k}` indexed by node id over the
    /// augmented graph. The source's own entry and the virtual sink are zero.
    pub routing: BTreeMap<NodeId, Vec<F>>,
    /// Selection weight `y_j` of every relay and potential sink.
    pub selection: BTreeMap<NodeId, F>,
}

impl<F: LpFloat> FractionalPoint<F> {
    /// The 0/1 point induced by a design: a node is used by a source when
    /// it lies on that source's route after the source itself.
    pub fn from_design<C: Scalar>(instance: &Instance<C>, design: &Design<C>) -> Self {
        let width = instance.node_count() + 1;
        let routing = instance
            .sources()
            .iter()
            .map(|&q| {
                let mut y = vec![F::zero(); width];
                if let Some(route) = design.routes.get(&q) {
                    for &v in route.path.iter().skip(1) {
                        y[v.index()] = F::one();
                    }
                }
                (q, y)
            })
            .collect();
        let selection = instance
            .relays()
            .iter()
            .chain(instance.sinks())
            .map(|&v| {
                let on = design.selected_relays.contains(&v) || design.selected_sinks.contains(&v);
                (v, if on { F::one() } else { F::zero() })
            })
            .collect();
        FractionalPoint { routing, selection }
    }

    pub fn objective<C: Scalar>(&self, instance: &Instance<C>) -> F {
        self.selection.iter().fold(F::zero(), |acc, (&v, &y)| {
            let c = if instance.is_sink(v) { instance.sink_cost() } else { instance.relay_cost() };
            acc + y * F::of(c.to_f64().unwrap_or(f64::NAN))
        })
    }
}

/// Minimum-weight node cut between `source` and the virtual sink, where
/// node `j` costs `weights[j]`. Among minimum cuts the one closest to the
/// source is returned.
pub fn min_node_cut<C: Scalar, F: LpFloat>(
    graph: &AugmentedGraph<'_, C>,
    source: NodeId,
    weights: &[F],
) -> (CutConstraint, F) {
    let n = graph.node_count();
    let b0 = graph.virtual_sink;
    let cuttable = |v: usize| v != source.index() && v != b0.index();
    let caps: Vec<F> = (0..n)
        .map(|v| if cuttable(v) { weights[v].max(F::zero()).min(F::one()) } else { F::zero() })
        .collect();
    let inf = caps.iter().fold(F::one(), |a, &c| a + c);
    let eps = F::epsilon() * F::of(64.0) * inf;
    let mut net = FlowNetwork::new(2 * n, eps);
    for (v, &cap) in caps.iter().enumerate() {
        net.add_arc(2 * v, 2 * v + 1, if cuttable(v) { cap } else { inf });
        for &u in &graph.adjacency[v] {
            net.add_arc(2 * v + 1, 2 * u.index(), inf);
        }
    }
    net.max_flow(2 * source.index() + 1, 2 * b0.index());
    let side = net.source_side(2 * source.index() + 1);
    let cut: Vec<NodeId> = (0..n).filter(|&v| cuttable(v) && side[2 * v] && !side[2 * v + 1]).map(NodeId::from_index).collect();
    let weight = cut.iter().fold(F::zero(), |a, v| a + caps[v.index()]);
    debug_assert!(graph.disconnects(source, &cut));
    (CutConstraint { source, cut }, weight)
}

/// A violated cut for `source`, if the minimum cut weight is below
/// `1 - tolerance`.
pub fn separate<C: Scalar, F: LpFloat>(
    graph: &AugmentedGraph<'_, C>,
    source: NodeId,
    weights: &[F],
    tolerance: F,
) -> Option<(CutConstraint, F)> {
    let (cut, weight) = min_node_cut(graph, source, weights);
    (weight < F::one() - tolerance).then_some((cut, weight))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions<F: LpFloat> {
    pub tolerance: F,
    pub max_rounds: usize,
}

impl<F: LpFloat> Default for LpOptions<F> {
    fn default() -> Self {
        LpOptions { tolerance: F::of(1e-6), max_rounds: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpCertificate<F: LpFloat> {
    pub bound: F,
    /// Final LP point.
    pub point: FractionalPoint<F>,
    /// Seed cuts first, then generated cuts in the order they were added.
    pub constraints: Vec<CutConstraint>,
    /// Separation rounds that added cuts.
    pub rounds: usize,
    pub early_stopped: bool,
    pub tolerance: F,
    /// LP value after each solve.
    pub history: Vec<F>,
}

/// Master LP: routing variables `y_{j,k}` for every source `k` and node
/// `j != k`, selection variables `y_j` for relays and sinks, all in `[0, 1]`.
struct Master {
    routing: Vec<Vec<Option<Variable>>>,
    selection: Vec<Variable>,
}

impl Master {
    fn cut_row(&self, si: usize, cut: &CutConstraint) -> LinearExpr {
        let mut row = LinearExpr::empty();
        for v in &cut.cut {
            row.add(self.routing[si][v.index()].expect("cuts exclude their source"), 1.0);
        }
        row
    }

    fn point<F: LpFloat>(&self, sources: &[NodeId], pool: &[NodeId], solution: &Solution) -> FractionalPoint<F> {
        let clip = |x: f64| F::of(x.clamp(0.0, 1.0));
        let routing = sources
            .iter()
            .zip(&self.routing)
            .map(|(&k, vars)| {
                let mut y: Vec<F> = vars.iter().map(|v| v.map_or(F::zero(), |v| clip(solution.var_value(v)))).collect();
                y.push(F::zero());
                (k, y)
            })
            .collect();
        let selection = pool.iter().zip(&self.selection).map(|(&j, &v)| (j, clip(solution.var_value(v)))).collect();
        FractionalPoint { routing, selection }
    }
}

/// LP relaxation bound with lazily generated node-cut constraints.
///
/// The master LP is solved in double precision; separation runs in `F`.
pub fn lp_lower_bound<C: Scalar, F: LpFloat>(
    instance: &Instance<C>,
    options: &LpOptions<F>,
) -> Result<LpCertificate<F>, LpBoundError> {
    let feasibility = check_feasibility(instance);
    if let Some(witness) = feasibility.witness {
        return Err(LpBoundError::Infeasible { witness });
    }
    let graph = augment(instance);
    let n = instance.node_count();
    let sources = instance.sources();
    let pool: Vec<NodeId> = graph.pool.iter().map(|p| p.0).collect();

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let routing: Vec<Vec<Option<Variable>>> = sources
        .iter()
        .map(|&k| (0..n).map(|j| (j != k.index()).then(|| problem.add_var(0.0, (0.0, 1.0)))).collect())
        .collect();
    let selection: Vec<Variable> =
        graph.pool.iter().map(|(_, c)| problem.add_var(c.to_f64().unwrap_or(f64::NAN), (0.0, 1.0))).collect();
    let master = Master { routing, selection };

    let mut constraints = Vec::new();
    for (si, &k) in sources.iter().enumerate() {
        for (&j, &y_j) in pool.iter().zip(&master.selection) {
            let mut row = LinearExpr::empty();
            row.add(master.routing[si][j.index()].expect("pool nodes are not sources"), 1.0);
            row.add(y_j, -1.0);
            problem.add_constraint(row, ComparisonOp::Le, 0.0);
        }
        let mut hops = LinearExpr::empty();
        for &v in master.routing[si].iter().flatten() {
            hops.add(v, 1.0);
        }
        problem.add_constraint(hops, ComparisonOp::Le, f64::from(instance.h_max()));
        let seed = CutConstraint::new(&graph, k, instance.sinks().iter().copied()).expect("sink layer separates");
        problem.add_constraint(master.cut_row(si, &seed), ComparisonOp::Ge, 1.0);
        constraints.push(seed);
    }
    let mut seen: HashSet<CutConstraint> = constraints.iter().cloned().collect();

    let fail = |round: usize| move |e: microlp::Error| LpBoundError::Numerical { round, message: e.to_string() };
    let settle = |outcome: microlp::SolveOutcome, round: usize| {
        outcome.into_solution().map_err(|_| LpBoundError::Numerical { round, message: "solve interrupted".into() })
    };
    let mut solution = settle(problem.solve().map_err(fail(0))?, 0)?;
    let mut history = vec![F::of(solution.objective())];
    let mut rounds = 0;
    let mut early_stopped = false;

    loop {
        let point: FractionalPoint<F> = master.point(sources, &pool, &solution);
        let violated: Vec<CutConstraint> = sources
            .par_iter()
            .filter_map(|k| separate(&graph, *k, &point.routing[k], options.tolerance).map(|(c, _)| c))
            .collect();
        if violated.is_empty() {
            break;
        }
        let fresh: Vec<_> = violated.into_iter().filter(|c| !seen.contains(c)).collect();
        if fresh.is_empty() || rounds >= options.max_rounds {
            // out of budget, or a pooled cut is only met to within solver precision
            early_stopped = true;
            break;
        }
        rounds += 1;
        for cut in fresh {
            let si = sources.binary_search(&cut.source).expect("cut source is a source");
            let outcome = solution.add_constraint(master.cut_row(si, &cut), ComparisonOp::Ge, 1.0).map_err(fail(rounds))?;
            solution = settle(outcome, rounds)?;
            seen.insert(cut.clone());
            constraints.push(cut);
        }
        history.push(F::of(solution.objective()));
    }

    Ok(LpCertificate {
        bound: F::of(solution.objective()),
        point: master.point(sources, &pool, &solution),
        constraints,
        rounds,
        early_stopped,
        tolerance: options.tolerance,
        history,
    })
}

/// Fresh separation pass: minimum node-cut weight per source under the
/// certificate's routing weights.
pub fn min_cut_weights<C: Scalar, F: LpFloat>(instance: &Instance<C>, certificate: &LpCertificate<F>) -> BTreeMap<NodeId, F> {
    let graph = augment(instance);
    certificate.point.routing.iter().map(|(&k, y)| (k, min_node_cut(&graph, k, y).1)).collect()
}

#[derive(Serialize)]
struct CertificateDoc {
    bound: f64,
    rounds: usize,
    constraints: Vec<CutConstraint>,
    early_stopped: bool,
}

pub fn certificate_to_json<F: LpFloat>(certificate: &LpCertificate<F>) -> String {
    let doc = CertificateDoc {
        bound: certificate.bound.to_f64().unwrap_or(f64::NAN),
        rounds: certificate.rounds,
        constraints: certificate.constraints.clone(),
        early_stopped: certificate.early_stopped,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("certificate serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Node, NodeKind::*};
    use num_rational::Rational64;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn graph(kinds: &[NodeKind], edges: &[(u32, u32)], h_max: u32) -> Instance {
        Instance::new(
            kinds.iter().enumerate().map(|(i, &k)| Node::new(i as u32, k)).collect(),
            edges.iter().map(|&(a, b)| (NodeId(a), NodeId(b))),
            r(10),
            r(1),
            h_max,
            None,
        )
        .unwrap()
    }

    fn t1() -> Instance {
        graph(&[Source, PotentialSink], &[(0, 1)], 1)
    }

    fn chain() -> Instance {
        graph(&[Source, PotentialRelay, PotentialRelay, PotentialSink], &[(0, 1), (1, 2), (2, 3)], 3)
    }

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn augmentation_shape() {
        let t = t1();
        let a = augment(&t);
        assert_eq!(a.virtual_sink(), NodeId(2));
        assert_eq!(a.neighbors(NodeId(2)), &[NodeId(1)]);
        assert_eq!(a.kind(NodeId(2)), Some(VirtualSink));
        assert_eq!(a.hop_bound(), 2);

        let three = graph(&[Source, PotentialSink, PotentialSink, PotentialSink, PotentialRelay], &[(0, 1), (0, 4), (4, 2), (4, 3)], 2);
        let a = augment(&three);
        assert_eq!(a.neighbors(a.virtual_sink()).len(), 3);
        assert_eq!(a.edge_count(), three.edges().len() + 3);
        assert_eq!(a.pool().len(), 4);
    }

    #[test]
    fn cut_constraints_are_checked() {
        let c = chain();
        let a = augment(&c);
        assert!(CutConstraint::new(&a, NodeId(0), ids(&[2])).is_ok());
        assert!(matches!(CutConstraint::new(&a, NodeId(0), []), Err(LpBoundError::NotACut { .. })));
        assert!(CutConstraint::new(&a, NodeId(0), ids(&[0])).is_err());
        assert!(CutConstraint::new(&a, NodeId(0), ids(&[4])).is_err());
        assert!(CutConstraint::new(&a, NodeId(1), ids(&[2])).is_err());
    }

    #[test]
    fn separation_on_chain() {
        let c = chain();
        let a = augment(&c);
        let (cut, w) = separate(&a, NodeId(0), &[0.0; 5], 1e-6).unwrap();
        assert_eq!(cut.cut(), ids(&[1]));
        assert_eq!(w, 0.0);

        let (cut, w) = separate(&a, NodeId(0), &[0.0, 1.0, 0.0, 0.0, 0.0], 1e-6).unwrap();
        assert_eq!(cut.cut(), ids(&[2]));
        assert_eq!(w, 0.0);

        assert!(separate(&a, NodeId(0), &[0.0, 1.0, 1.0, 1.0, 0.0], 1e-6).is_none());
    }

    #[test]
    fn separation_finds_minimum_over_parallel_paths() {
        // q0 - r1 - b3, q0 - r2 - b3 ; weights r1 = r2 = 0.4, b3 = 0.9
        let g = graph(&[Source, PotentialRelay, PotentialRelay, PotentialSink], &[(0, 1), (0, 2), (1, 3), (2, 3)], 2);
        let a = augment(&g);
        let (cut, w) = min_node_cut(&a, NodeId(0), &[0.0f64, 0.4, 0.4, 0.9, 0.0]);
        assert_eq!(cut.cut(), ids(&[1, 2]));
        assert!((w - 0.8).abs() < 1e-12);
    }

    #[test]
    fn single_sink_bound() {
        let cert: LpCertificate<f64> = lp_lower_bound(&t1(), &LpOptions::default()).unwrap();
        assert!((cert.bound - 10.0).abs() < 1e-9);
        assert!(!cert.early_stopped);
    }

    #[test]
    fn chain_bound() {
        let cert: LpCertificate<f64> = lp_lower_bound(&chain(), &LpOptions::default()).unwrap();
        assert!((cert.bound - 12.0).abs() < 1e-9, "{}", cert.bound);
        for w in cert.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
        for (_, w) in min_cut_weights(&chain(), &cert) {
            assert!(w >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn single_precision_chain_bound() {
        let cert: LpCertificate<f32> = lp_lower_bound(&chain(), &LpOptions::default()).unwrap();
        assert!((cert.bound - 12.0).abs() < 1e-3);
    }

    #[test]
    fn infeasible_instance_is_rejected() {
        let g = graph(&[Source, PotentialRelay, PotentialSink], &[(0, 1), (1, 2)], 1);
        let err = lp_lower_bound::<_, f64>(&g, &LpOptions::default()).unwrap_err();
        assert_eq!(err, LpBoundError::Infeasible { witness: NodeId(0) });
    }

    #[test]
    fn round_budget_flags_early_stop() {
        let opts = LpOptions { max_rounds: 0, ..LpOptions::default() };
        let cert: LpCertificate<f64> = lp_lower_bound(&chain(), &opts).unwrap();
        assert!(cert.early_stopped);
        assert_eq!(cert.rounds, 0);
        assert!(cert.bound <= 12.0 + 1e-9);
    }

    #[test]
    fn design_point_satisfies_pool() {
        let c = chain();
        let cert: LpCertificate<f64> = lp_lower_bound(&c, &LpOptions::default()).unwrap();
        let design = crate::greedy::smart_select(&c).unwrap().design;
        let point = FractionalPoint::<f64>::from_design(&c, &design);
        assert!(cert.constraints.iter().all(|k| k.is_satisfied_by(&point, 0.0)));
        assert_eq!(point.objective(&c), 12.0);
    }

    #[test]
    fn certificate_json_shape() {
        let cert: LpCertificate<f64> = lp_lower_bound(&t1(), &LpOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&certificate_to_json(&cert)).unwrap();
        assert_eq!(v["bound"], 10.0);
        assert_eq!(v["early_stopped"], false);
        assert_eq!(v["constraints"][0]["source"], 0);
        assert_eq!(v["constraints"][0]["cut"], serde_json::json!([1]));
    }
}
