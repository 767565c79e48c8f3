//! Exact matching toolkit for weighted hypergraphs.
//!
//! Everything here works over exact rationals: the fractional matching LP is
//! solved with an exact simplex, discount schedules are evaluated in closed
//! form, and the iterated-rounding loop either returns a matching with a
//! proven weight guarantee or a machine-checkable stuck certificate.

pub mod analysis;
pub mod discounts;
pub mod generators;
pub mod hypergraph;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod rational;
pub mod rounding;
pub mod sampling;

pub use hypergraph::{Hypergraph, Matching, WeightedInstance};
pub use rational::Rat;
