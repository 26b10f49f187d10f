//! Random instances for the three experimental setups, plus set-cover
//! reduction instances.
//!
//! Randomness comes from SplitMix64 seeded directly with the user seed:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output z ^ (z >> 31)            (all arithmetic mod 2^64)
//! ```
//!
//! A uniform real in `[0, 1)` is `(output >> 11) * 2^-53`; a uniform index
//! below `n` is the high word of `output * n` (128-bit product).
//!
//! Node ids are assigned sources first, then relays, then sinks. Uniform
//! placements draw `x` then `y` for each node in id order. Lattice
//! placements run a partial Fisher–Yates shuffle over the row-major list of
//! lattice points and give the `i`-th shuffled point to node `i`.

use std::fmt;
use std::str::FromStr;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::model::{build_geometric, Instance, Node, NodeId, NodeKind};
use crate::scalar::Scalar;

/// Deterministic random stream.
#[derive(Debug, Clone)]
pub struct Stream(SplitMix64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(SplitMix64::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Continuous uniform positions in `[0, side)²`.
    Uniform { side: f64 },
    /// Distinct corners of a square grid with the given pitch, `0..=side`.
    Lattice { side: f64, pitch: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub sources: usize,
    pub relays: usize,
    pub sinks: usize,
    pub placement: Placement,
    pub r_max: f64,
    pub h_max: u32,
    pub c_s: i64,
    pub c_r: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setup {
    One,
    Two,
    Three,
}

impl Setup {
    pub const ALL: [Setup; 3] = [Setup::One, Setup::Two, Setup::Three];

    pub fn number(self) -> u8 {
        match self {
            Setup::One => 1,
            Setup::Two => 2,
            Setup::Three => 3,
        }
    }

    pub fn scenario(self) -> Scenario {
        let base = Scenario {
            sources: 20,
            relays: 30,
            sinks: 10,
            placement: Placement::Uniform { side: 100.0 },
            r_max: 20.0,
            h_max: 5,
            c_s: 10,
            c_r: 1,
        };
        match self {
            Setup::One => base,
            Setup::Two => Scenario { sources: 40, relays: 50, sinks: 15, placement: Placement::Uniform { side: 140.0 }, ..base },
            Setup::Three => Scenario {
                sources: 30,
                relays: 50,
                sinks: 15,
                placement: Placement::Lattice { side: 140.0, pitch: 10.0 },
                r_max: 30.0,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown setup `{0}`; expected 1, 2 or 3")]
pub struct UnknownSetup(pub String);

impl FromStr for Setup {
    type Err = UnknownSetup;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" => Ok(Setup::One),
            "2" => Ok(Setup::Two),
            "3" => Ok(Setup::Three),
            other => Err(UnknownSetup(other.to_string())),
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

fn kinds(s: &Scenario) -> impl Iterator<Item = NodeKind> {
    std::iter::repeat_n(NodeKind::Source, s.sources)
        .chain(std::iter::repeat_n(NodeKind::PotentialRelay, s.relays))
        .chain(std::iter::repeat_n(NodeKind::PotentialSink, s.sinks))
}

fn positions(s: &Scenario, rng: &mut Stream) -> Vec<(f64, f64)> {
    let n = s.sources + s.relays + s.sinks;
    match s.placement {
        Placement::Uniform { side } => (0..n)
            .map(|_| {
                let x = rng.unit() * side;
                let y = rng.unit() * side;
                (x, y)
            })
            .collect(),
        Placement::Lattice { side, pitch } => {
            let per_row = (side / pitch).round() as usize + 1;
            let mut points: Vec<(f64, f64)> = (0..per_row * per_row)
                .map(|i| ((i % per_row) as f64 * pitch, (i / per_row) as f64 * pitch))
                .collect();
            assert!(n <= points.len(), "lattice has {} points for {n} nodes", points.len());
            for i in 0..n {
                let j = i + rng.below((points.len() - i) as u64) as usize;
                points.swap(i, j);
            }
            points.truncate(n);
            points
        }
    }
}

/// Geometric instance for an arbitrary scenario.
pub fn generate_scenario<C: Scalar>(scenario: &Scenario, seed: u64) -> Instance<C> {
    let mut rng = Stream::new(seed);
    let nodes = kinds(scenario)
        .zip(positions(scenario, &mut rng))
        .enumerate()
        .map(|(i, (kind, (x, y)))| Node::at(i as u32, kind, x, y))
        .collect();
    build_geometric(
        nodes,
        scenario.r_max,
        C::from_i64(scenario.c_s).expect("cost fits"),
        C::from_i64(scenario.c_r).expect("cost fits"),
        scenario.h_max,
    )
    .expect("generated nodes are well formed")
}

pub fn generate<C: Scalar>(setup: Setup, seed: u64) -> Instance<C> {
    generate_scenario(&setup.scenario(), seed)
}

/// Position-free instance on `sources + relays + sinks` nodes where each
/// pair is linked with probability `edge_probability`.
pub fn random_graph<C: Scalar>(
    counts: (usize, usize, usize),
    edge_probability: f64,
    h_max: u32,
    costs: (C, C),
    seed: u64,
) -> Instance<C> {
    let s = Scenario {
        sources: counts.0,
        relays: counts.1,
        sinks: counts.2,
        placement: Placement::Uniform { side: 1.0 },
        r_max: 1.0,
        h_max,
        c_s: 0,
        c_r: 0,
    };
    let mut rng = Stream::new(seed);
    let nodes: Vec<Node> = kinds(&s).enumerate().map(|(i, k)| Node::new(i as u32, k)).collect();
    let n = nodes.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.unit() < edge_probability {
                edges.push((NodeId::from_index(a), NodeId::from_index(b)));
            }
        }
    }
    Instance::new(nodes, edges, costs.0, costs.1, h_max, None).expect("generated graph is well formed")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("element {0} belongs to no subset")]
    Uncovered(usize),
    #[error("subset {subset} names element {element}, but there are only {elements} elements")]
    UnknownElement { subset: usize, element: usize, elements: usize },
    #[error("hop bound must be at least 1")]
    ZeroHops,
}

/// Sink placement instance encoding a set cover problem over elements
/// `0..elements`.
///
/// Element `e` becomes source `e`. Subset `i` becomes a sink joined to each
/// of its elements by a private chain of `h_max - 1` zero-cost relays, so a
/// sink covers exactly the sources of its subset. Ids run sources, relays,
/// then sinks in subset order.
pub fn generate_setcover_reduction<C: Scalar>(
    elements: usize,
    subsets: &[Vec<usize>],
    h_max: u32,
    c_s: C,
) -> Result<Instance<C>, ReductionError> {
    if h_max == 0 {
        return Err(ReductionError::ZeroHops);
    }
    let mut covered = vec![false; elements];
    for (i, set) in subsets.iter().enumerate() {
        for &e in set {
            if e >= elements {
                return Err(ReductionError::UnknownElement { subset: i, element: e, elements });
            }
            covered[e] = true;
        }
    }
    if let Some(e) = covered.iter().position(|c| !c) {
        return Err(ReductionError::Uncovered(e));
    }

    let chain = h_max as usize - 1;
    let pairs: Vec<(usize, usize)> = subsets
        .iter()
        .enumerate()
        .flat_map(|(i, set)| {
            let mut set = set.clone();
            set.sort_unstable();
            set.dedup();
            set.into_iter().map(move |e| (i, e))
        })
        .collect();
    let relays = pairs.len() * chain;
    let sink_of = |i: usize| NodeId::from_index(elements + relays + i);

    let mut nodes: Vec<Node> = (0..elements).map(|e| Node::new(e as u32, NodeKind::Source)).collect();
    nodes.extend((0..relays).map(|r| Node::new((elements + r) as u32, NodeKind::PotentialRelay)));
    nodes.extend((0..subsets.len()).map(|i| Node::new(sink_of(i).0, NodeKind::PotentialSink)));

    let mut edges = Vec::new();
    for (p, &(i, e)) in pairs.iter().enumerate() {
        let mut prev = NodeId::from_index(e);
        for step in 0..chain {
            let relay = NodeId::from_index(elements + p * chain + step);
            edges.push((prev, relay));
            prev = relay;
        }
        edges.push((prev, sink_of(i)));
    }
    Ok(Instance::new(nodes, edges, c_s, C::zero(), h_max, None).expect("reduction graph is well formed"))
}
