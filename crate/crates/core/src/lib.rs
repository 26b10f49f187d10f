//! Sink and relay placement for wireless sensor networks under a hop
//! constraint.
//!
//! Given sources, candidate relay sites and candidate sink sites, pick the
//! cheapest set of sinks and relays so that every source reaches a selected
//! sink within `h_max` hops through sources and selected relays.
//!
//! - [`greedy`]: greedy sink selection with per-sink relay minimization.
//! - [`repair`]: destroy-and-repair improvement of a greedy design.
//! - [`exact`]: exhaustive optimum for small instances, and the greedy
//!   worst-case guarantees.
//! - [`lpbound`]: LP relaxation lower bound with node-cut separation.
//! - [`scenarios`]: seeded random instances and set-cover reductions.
//! - [`bench`]: batch experiments and reports.
//!
//! Costs are generic over [`Scalar`]; exact rationals are the default.

pub mod bench;
pub mod cli;
pub mod exact;
pub mod greedy;
pub mod lpbound;
pub mod model;
pub mod repair;
pub mod scalar;
pub mod scenarios;

pub use exact::{exact_optimum, theoretical_bounds};
pub use greedy::{check_feasibility, smart_select};
pub use lpbound::{lp_lower_bound, LpCertificate};
pub use model::{validate, Design, Instance, Node, NodeId, NodeKind, Route};
pub use repair::destroy_and_repair;
pub use scalar::{LpFloat, Scalar};
pub use scenarios::{generate, Setup};

/// Exact rational cost.
pub type Rational = num_rational::Rational64;
/// Instance with exact rational costs.
pub type ExactInstance = Instance<Rational>;
/// Design with exact rational costs.
pub type ExactDesign = Design<Rational>;
/// Instance with double-precision costs.
pub type FloatInstance = Instance<f64>;
/// Design with double-precision costs.
pub type FloatDesign = Design<f64>;
/// Double-precision LP certificate.
pub type LpCertificate64 = LpCertificate<f64>;
/// Single-precision LP certificate.
pub type LpCertificate32 = LpCertificate<f32>;
