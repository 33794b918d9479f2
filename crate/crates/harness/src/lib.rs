//! Command-line harness: instance generation, seeded experiments and the
//! invariant suites.

pub mod experiment;
pub mod generate;
pub mod verify;
