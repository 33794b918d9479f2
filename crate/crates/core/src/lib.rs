//! Online maximization of a sum of weighted matroid rank functions subject to
//! a matroid constraint.
//!
//! The crate is organized bottom-up:
//!
//! * [`matroid`] and [`set`]: independence, rank, span and weighted rank
//!   oracles for uniform, partition, graphic and explicit matroids.
//! * [`polytope`]: membership, headroom and tight-set queries over the
//!   matroid polytope.
//! * [`fractional`]: the online fractional algorithm with its guess schemes.
//! * [`rounding`]: the coupled randomized rounding that grows an independent
//!   set from the fractional increments.
//! * [`covering`]: sampling from half the polytope and covering the sample by
//!   independent sets.
//! * [`oracle`]: offline ground truth (brute force, greedy, LP checkers and
//!   the per-guess decomposition of an optimum).
//! * [`weighted`]: the weight-bucketing reduction to unit weights.

pub mod covering;
pub mod error;
pub mod fractional;
pub mod instance;
pub mod invariants;
pub mod matroid;
pub mod oracle;
pub mod polytope;
pub mod rng;
pub mod rounding;
pub mod set;
pub mod weighted;

pub use error::{Error, Result};
pub use instance::{Arrival, Instance};
pub use matroid::{Matroid, MatroidSpec, WeightVector};
pub use set::ElementSet;
